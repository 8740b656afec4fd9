"""Run coordination: baseline, optimization loop, and the similarity sweep.

All persisted outputs are deterministic functions of the run config: no
timestamps, no absolute paths inside records, and every random draw is
keyed on the config seed plus stable content (prompt text or mesh bytes).
Re-running a saved config snapshot therefore reproduces records.ndjson
byte-for-byte, regardless of worker count.

Candidate meshes are generated with the run seed and batch index 0 by
default, so an identical prompt decoded in any generation maps to the
identical mesh and drag value (the generator runs with a fixed seed, as a
reproducible text-to-3D setup would). Set per_candidate_seed to give each
candidate slot its own derived seed instead. The reference set varies
designs through the batch index of one batched request.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import cmaes, lexicon, tokenizer
from .config import (
    BOW_DIM,
    BOW_SIGMA0,
    ENCODING_BOW,
    ENCODING_TOKEN,
    TOKEN_SIGMA0_FULL_SCALE,
    RunConfig,
)
from .errors import (
    AeropromptError,
    EmptyMesh,
    EvaluationFailed,
    GenerationFailed,
    ZeroProjection,
)
from .evaluator import (
    BaselineStats,
    CfdEvaluator,
    ProxyCoefficients,
    ProxyEvaluator,
    compute_baseline,
)
from .genbridge import (
    BridgeClient,
    GenerationRequest,
    SyntheticGenerator,
    default_scratch_dir,
)
from .geometry import (
    TriMesh,
    align_to_axes,
    chamfer_distance,
    sample_surface,
    save_obj,
    validate_mesh,
)

STATUS_OK = "ok"
STATUS_GEN_FAILED = "generation_failed"
STATUS_EVAL_FAILED = "evaluation_failed"

SWEEP_POINTS = 16384
TOKEN_PAD_ID = 0


def _generator_factory(config: RunConfig):
    if config.generator == "synthetic":
        return SyntheticGenerator()
    return BridgeClient(config.generator_command, scratch_dir=default_scratch_dir())


def _evaluator_factory(config: RunConfig):
    if config.evaluator == "proxy":
        coeff = ProxyCoefficients(
            c0=ProxyCoefficients.c0 if config.proxy_c0 is None else config.proxy_c0,
            c1=ProxyCoefficients.c1 if config.proxy_c1 is None else config.proxy_c1,
            noise_sigma=(
                ProxyCoefficients.noise_sigma
                if config.proxy_noise_sigma is None
                else config.proxy_noise_sigma
            ),
        )
        return ProxyEvaluator(
            coefficients=coeff, seed=config.seed, grid_resolution=config.grid_resolution
        )
    return CfdEvaluator(
        config.evaluator_command,
        scratch_dir=default_scratch_dir(),
        grid_resolution=config.grid_resolution,
    )


@dataclass(frozen=True)
class DesignRecord:
    """One evaluated candidate, exactly as persisted to records.ndjson."""

    generation: int
    index: int
    genome: list
    prompt: str
    status: str
    fitness: float
    cd: float = None
    cd_normalized: float = None
    frontal_area: float = None
    length: float = None
    width: float = None
    height: float = None
    mesh_hash: str = None
    error: str = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class RunResult:
    config: RunConfig
    run_dir: Path
    baseline: BaselineStats
    generations: list  # per-generation stat dicts
    records: list  # DesignRecord
    best: DesignRecord  # None when every candidate failed
    converged_reason: str


class _Codec:
    """Genome -> prompt decoding for the configured encoding."""

    def __init__(self, config: RunConfig):
        self.encoding = config.encoding
        if config.encoding == ENCODING_BOW:
            taxonomy = lexicon.load_taxonomy(
                config.taxonomy_path or lexicon.fixture_path()
            )
            self.word_set = lexicon.build_word_set(
                taxonomy,
                config.ref_adjective,
                config.ref_noun,
                n=config.word_set_size,
                seed=config.seed,
            )
            self.dim = BOW_DIM
            self.sigma0 = config.sigma0 if config.sigma0 is not None else BOW_SIGMA0
            self.initial_mean = np.array([1.0, 1.0])
        else:
            self.vocab = tokenizer.load_vocab(
                config.vocab_path or tokenizer.fixture_path()
            )
            self.dim = config.genome_dim
            if config.sigma0 is not None:
                self.sigma0 = config.sigma0
            else:
                # keep the full-scale default's proportion of the id range
                self.sigma0 = TOKEN_SIGMA0_FULL_SCALE * (
                    self.vocab.size / tokenizer.FULL_SCALE_ID_LIMIT
                )
            ids = tokenizer.encode_text(self.vocab, " " + config.ref_noun)
            ids = (ids + [TOKEN_PAD_ID] * self.dim)[: self.dim]
            self.initial_mean = np.array(ids, dtype=np.float64)

    def decode(self, genome: np.ndarray) -> str:
        if self.encoding == ENCODING_BOW:
            return lexicon.decode_bow(lexicon.BowGenome.from_vector(genome), self.word_set)
        return tokenizer.decode_token_genome(self.vocab, genome)


def _evaluate_candidate(generator, evaluator, baseline, prompt, seed):
    """Generate, validate, align, and score one candidate prompt.

    Returns fields for a DesignRecord. Pure given (prompt, seed) and the
    backends, so candidates may be processed on any worker in any order.
    A mesh that fails validation is a generator contract breach and counts
    as a generation failure.
    """
    try:
        result = generator.generate(
            GenerationRequest(prompt=prompt, seed=seed, batch_size=1)
        )
        mesh = align_to_axes(validate_mesh(result.meshes[0]))
    except (GenerationFailed, EmptyMesh) as exc:
        return {"status": STATUS_GEN_FAILED, "error": str(exc)}
    try:
        result = evaluator.evaluate(mesh)
    except (ZeroProjection, EvaluationFailed) as exc:
        return {"status": STATUS_EVAL_FAILED, "error": str(exc)}
    cd_n = baseline.normalize(result.cd)
    return {
        "status": STATUS_OK,
        "cd": result.cd,
        "cd_normalized": cd_n,
        "frontal_area": result.frontal_area,
        "length": result.dims.lx,
        "width": result.dims.ly,
        "height": result.dims.lz,
        "mesh_hash": mesh.content_hash(),
        "mesh": mesh,
    }


def compute_reference_set(generator, evaluator, prompt: str, n: int, seed: int,
                          workers: int = 1, records_path=None):
    """Evaluate the n-design reference population for a prompt.

    One batched request produces the population; per-design variation comes
    from the batch index. Returns (EvalResult list, BaselineStats). When
    records_path is given the per-design rows are persisted as NDJSON.
    """
    generated = generator.generate(
        GenerationRequest(prompt=prompt, seed=seed, batch_size=n)
    )

    def score(mesh: TriMesh):
        return evaluator.evaluate(align_to_axes(validate_mesh(mesh)))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(score, generated.meshes))
    else:
        results = [score(m) for m in generated.meshes]

    if records_path is not None:
        with Path(records_path).open("w", encoding="utf-8") as fh:
            for i, r in enumerate(results):
                row = {
                    "prompt": prompt,
                    "index": i,
                    "cd": r.cd,
                    "frontal_area": r.frontal_area,
                    "length": r.dims.lx,
                    "width": r.dims.ly,
                    "height": r.dims.lz,
                }
                fh.write(json.dumps(row) + "\n")
    return results, compute_baseline(results)


def _reference_summary(prompt: str, results) -> dict:
    cds = np.array([r.cd for r in results], dtype=np.float64)
    ci = 1.96 * np.std(cds, ddof=1) / np.sqrt(len(cds)) if len(cds) > 1 else 0.0
    return {
        "prompt": prompt,
        "n": len(results),
        "cd_mean": float(np.mean(cds)),
        "cd_ci95": float(ci),
        "cd_min": float(np.min(cds)),
        "cd_max": float(np.max(cds)),
    }


def _unique_run_dir(out_dir: Path, name: str) -> Path:
    """First free directory under out_dir: name, name_2, name_3, ...

    Repeat invocations of the same config then land in fresh directories
    with identical contents instead of clobbering earlier runs.
    """
    candidate = out_dir / name
    suffix = 2
    while candidate.exists() and any(candidate.iterdir()):
        candidate = out_dir / f"{name}_{suffix}"
        suffix += 1
    return candidate


def _candidate_seed(config: RunConfig, generation: int, index: int) -> int:
    if config.per_candidate_seed:
        return config.seed + generation * config.population_size + index
    return config.seed


def run_optimization(config: RunConfig) -> RunResult:
    """Full optimization run: baseline, CMA-ES loop, persisted outputs."""
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    run_dir = _unique_run_dir(out_dir, config.resolved_run_name)
    run_dir.mkdir(parents=True, exist_ok=True)

    codec = _Codec(config)
    generator = _generator_factory(config)
    evaluator = _evaluator_factory(config)

    try:
        ref_results, baseline = compute_reference_set(
            generator,
            evaluator,
            config.reference_prompt,
            config.reference_size,
            config.seed,
            workers=config.workers,
            records_path=run_dir / "reference.ndjson",
        )

        initial_prompt = codec.decode(codec.initial_mean)
        initial_reference = None
        if config.initial_reference_size >= 2:
            init_results, _ = compute_reference_set(
                generator,
                evaluator,
                initial_prompt,
                config.initial_reference_size,
                config.seed,
                workers=config.workers,
                records_path=run_dir / "initial_reference.ndjson",
            )
            initial_reference = _reference_summary(initial_prompt, init_results)
            initial_reference["cd_n_mean"] = float(
                np.mean([baseline.normalize(r.cd) for r in init_results])
            )

        cma_config = cmaes.CmaConfig(
            dim=codec.dim,
            population_size=config.population_size,
            n_parents=config.n_parents,
            sigma0=codec.sigma0,
            mode=config.cma_mode,
            seed=config.seed,
            max_generations=config.max_generations,
        )
        state = cmaes.init(cma_config, mean=codec.initial_mean)

        records = []
        gen_stats = []
        best = None
        best_mesh = None
        penalty = baseline.penalty_fitness()

        records_path = run_dir / "records.ndjson"
        with records_path.open("w", encoding="utf-8") as records_file:
            while True:
                done, reason = cmaes.has_converged(state)
                if done:
                    break
                if (
                    config.plus_switch_generation is not None
                    and state.generation >= config.plus_switch_generation
                ):
                    state.mode = cmaes.PLUS

                gen = state.generation
                solutions = cmaes.ask(state)
                prompts = [codec.decode(solutions[i]) for i in range(len(solutions))]

                def job(args):
                    i, prompt = args
                    return _evaluate_candidate(
                        generator,
                        evaluator,
                        baseline,
                        prompt,
                        _candidate_seed(config, gen, i),
                    )

                tasks = list(enumerate(prompts))
                if config.workers > 1:
                    with ThreadPoolExecutor(max_workers=config.workers) as pool:
                        outcomes = list(pool.map(job, tasks))
                else:
                    outcomes = [job(t) for t in tasks]

                fitnesses = []
                for i, (prompt, out) in enumerate(zip(prompts, outcomes)):
                    mesh = out.pop("mesh", None)
                    fitness = out.get("cd_normalized")
                    if fitness is None:
                        fitness = penalty
                    rec = DesignRecord(
                        generation=gen,
                        index=i,
                        genome=[float(v) for v in solutions[i]],
                        prompt=prompt,
                        fitness=float(fitness),
                        **out,
                    )
                    records.append(rec)
                    records_file.write(json.dumps(rec.to_dict()) + "\n")
                    fitnesses.append(fitness)
                    if rec.status == STATUS_OK and (best is None or rec.fitness < best.fitness):
                        best = rec
                        best_mesh = mesh
                records_file.flush()

                cmaes.tell(state, solutions, fitnesses)
                gen_stats.append(
                    _generation_stats(gen, solutions, records[-len(prompts):], state)
                )

        (run_dir / "baseline.json").write_text(
            json.dumps(baseline.to_dict(), indent=1) + "\n", encoding="utf-8"
        )
        (run_dir / "config.json").write_text(
            json.dumps(config.to_dict(), indent=1) + "\n", encoding="utf-8"
        )
        (run_dir / "cma_final.json").write_text(
            json.dumps(cmaes.snapshot(state)) + "\n", encoding="utf-8"
        )
        runlog = {
            "config": config.to_dict(),
            "baseline": baseline.to_dict(),
            "initial_reference": initial_reference,
            "generations": gen_stats,
            "converged_reason": reason,
            "best": best.to_dict() if best is not None else None,
            "generator_model": getattr(generator, "model_name", "unknown"),
        }
        (run_dir / "runlog.json").write_text(
            json.dumps(runlog, indent=1) + "\n", encoding="utf-8"
        )
        _write_gen_csv(run_dir / "gen_stats.csv", gen_stats)
        if best_mesh is not None:
            save_obj(best_mesh, run_dir / "best_mesh.obj")

        return RunResult(
            config=config,
            run_dir=run_dir,
            baseline=baseline,
            generations=gen_stats,
            records=records,
            best=best,
            converged_reason=reason,
        )
    finally:
        close = getattr(generator, "close", None)
        if close is not None:
            close()


def _generation_stats(gen: int, solutions: np.ndarray, gen_records, state) -> dict:
    ok = [r.cd_normalized for r in gen_records if r.status == STATUS_OK]
    fits = [r.fitness for r in gen_records]
    pool_best = min(pf for _, pf in state.parents) if state.parents else min(fits)
    stats = {
        "generation": gen,
        "n_ok": len(ok),
        "n_failed": len(gen_records) - len(ok),
        "cd_n_mean": float(np.mean(ok)) if ok else None,
        "cd_n_min": float(np.min(ok)) if ok else None,
        "cd_n_ci95": (
            float(1.96 * np.std(ok, ddof=1) / np.sqrt(len(ok))) if len(ok) > 1 else None
        ),
        "best_pool_cdn": float(pool_best),
        "sigma": float(state.sigma),
        "mean_genome": [float(v) for v in np.mean(solutions, axis=0)],
        "genome_variance": [float(v) for v in np.var(solutions, axis=0)],
    }
    return stats


def _write_gen_csv(path: Path, gen_stats: list):
    if not gen_stats:
        return
    scalar_keys = [k for k in gen_stats[0] if not isinstance(gen_stats[0][k], list)]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=scalar_keys, extrasaction="ignore")
        writer.writeheader()
        for row in gen_stats:
            writer.writerow({k: row[k] for k in scalar_keys})


def similarity_sweep(
    word_count: int,
    reference: str,
    config: RunConfig,
    generator=None,
    taxonomy=None,
    n_points: int = SWEEP_POINTS,
) -> list:
    """Word-level similarity versus shape-level distance, one row per word.

    The reference word is always the first row (unit similarity, zero
    distance); the remaining word_count - 1 rows are drawn uniformly without
    replacement from the rest of the taxonomy, adjectives and nouns alike.
    Each word is fed to the generator as a word-only prompt; distance is the
    symmetric Chamfer value between surface samples of the word mesh and
    the reference mesh, both drawn with the same sample seed. Rows whose
    generation fails are kept and flagged rather than dropped.
    """
    if word_count < 1:
        raise AeropromptError("word_count must be >= 1")
    if taxonomy is None:
        taxonomy = lexicon.load_taxonomy(config.taxonomy_path or lexicon.fixture_path())
    own_generator = generator is None
    if own_generator:
        generator = _generator_factory(config)

    pool = sorted(
        set(taxonomy.words(lexicon.ADJECTIVE)) | set(taxonomy.words(lexicon.NOUN))
    )
    if reference not in pool:
        raise AeropromptError(f"reference word {reference!r} not in taxonomy")
    others = [w for w in pool if w != reference]
    rng = np.random.default_rng(config.seed)
    k = min(word_count - 1, len(others))
    sampled = list(rng.choice(others, size=k, replace=False)) if k else []

    def word_pos(word):
        return taxonomy.pos[word]

    def word_cloud(word):
        result = generator.generate(
            GenerationRequest(prompt=word, seed=config.seed, batch_size=1)
        )
        mesh = align_to_axes(validate_mesh(result.meshes[0]))
        return sample_surface(mesh, n_points, seed=config.seed)

    try:
        ref_cloud = word_cloud(reference)
        rows = []
        for word in [reference] + sampled:
            row = {
                "word": word,
                "pos": word_pos(word),
                "wup": lexicon.wup_similarity(taxonomy, word, reference),
                "chamfer": None,
                "status": STATUS_OK,
            }
            try:
                row["chamfer"] = chamfer_distance(word_cloud(word), ref_cloud)
            except (GenerationFailed, EmptyMesh, ZeroProjection) as exc:
                row["status"] = STATUS_GEN_FAILED
                row["error"] = str(exc)
            rows.append(row)
        return rows
    finally:
        if own_generator:
            close = getattr(generator, "close", None)
            if close is not None:
                close()


def write_sweep_csv(path, rows):
    fields = ["word", "pos", "wup", "chamfer", "status"]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
