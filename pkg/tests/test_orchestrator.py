from __future__ import annotations

import json

import numpy as np
import pytest

from aeroprompt import orchestrator
from aeroprompt.config import RunConfig, config_from_dict
from aeroprompt.errors import (
    AeropromptError,
    DegenerateBaseline,
    EvaluationFailed,
    GenerationFailed,
)
from aeroprompt.evaluator import ProxyCoefficients, ProxyEvaluator
from aeroprompt.genbridge import GenerationRequest, GenerationResult, SyntheticGenerator
from aeroprompt.orchestrator import (
    STATUS_EVAL_FAILED,
    STATUS_GEN_FAILED,
    STATUS_OK,
    _candidate_seed,
    _Codec,
    _evaluate_candidate,
    _unique_run_dir,
    compute_reference_set,
    run_optimization,
    similarity_sweep,
    write_sweep_csv,
)

from conftest import box_mesh


def small_config(tmp, **overrides):
    base = dict(
        seed=0,
        population_size=4,
        n_parents=2,
        max_generations=3,
        reference_size=20,
        initial_reference_size=0,
        grid_resolution=64,
        out_dir=str(tmp),
        run_name="run",
    )
    base.update(overrides)
    return RunConfig(**base)


class FailingGenerator:
    """Succeeds only for an allowlist of prompts."""

    def __init__(self, allow=("A car",)):
        self.allow = set(allow)
        self.inner = SyntheticGenerator()

    def generate(self, request):
        if request.prompt not in self.allow:
            raise GenerationFailed(f"refused {request.prompt!r}")
        return self.inner.generate(request)


class ConstantGenerator:
    """Same box for every prompt and batch index."""

    def generate(self, request):
        mesh = box_mesh((1.0, 0.5, 0.3))
        return GenerationResult(
            meshes=tuple(mesh for _ in range(request.batch_size)),
            generator_id="constant",
            latency_s=0.0,
        )


class ExplodingEvaluator:
    def evaluate(self, mesh):
        raise EvaluationFailed("solver on strike")


class TestCodec:
    def test_bow_defaults(self, tmp_path):
        codec = _Codec(small_config(tmp_path))
        assert codec.dim == 2
        assert codec.sigma0 == 0.25
        np.testing.assert_array_equal(codec.initial_mean, [1.0, 1.0])
        assert codec.decode(codec.initial_mean) == "A fast car in the shape of wing"

    def test_token_defaults(self, tmp_path):
        codec = _Codec(small_config(tmp_path, encoding="token", genome_dim=3))
        assert codec.dim == 3
        # sigma0 keeps the full-scale default's proportion of the id range
        assert codec.sigma0 == pytest.approx(3000.0 * codec.vocab.size / 32768)
        assert codec.initial_mean[0] == 330.0  # " wing" is one fixture token
        assert codec.initial_mean[1] == 0.0
        prompt = codec.decode(codec.initial_mean)
        assert prompt.startswith("A car in the shape of ")
        assert "wing" in prompt

    def test_sigma0_override(self, tmp_path):
        codec = _Codec(small_config(tmp_path, sigma0=0.5))
        assert codec.sigma0 == 0.5


class TestUniqueRunDir:
    def test_fresh_name(self, tmp_path):
        assert _unique_run_dir(tmp_path, "abc") == tmp_path / "abc"

    def test_empty_dir_reused(self, tmp_path):
        (tmp_path / "abc").mkdir()
        assert _unique_run_dir(tmp_path, "abc") == tmp_path / "abc"

    def test_occupied_dirs_skipped(self, tmp_path):
        for name in ("abc", "abc_2"):
            d = tmp_path / name
            d.mkdir()
            (d / "records.ndjson").write_text("{}\n")
        assert _unique_run_dir(tmp_path, "abc") == tmp_path / "abc_3"


class TestCandidateSeed:
    def test_constant_by_default(self, tmp_path):
        cfg = small_config(tmp_path, seed=9)
        assert _candidate_seed(cfg, 0, 0) == 9
        assert _candidate_seed(cfg, 5, 3) == 9

    def test_derived_when_enabled(self, tmp_path):
        cfg = small_config(tmp_path, seed=9, per_candidate_seed=True)
        assert _candidate_seed(cfg, 0, 0) == 9
        assert _candidate_seed(cfg, 5, 3) == 9 + 5 * 4 + 3


class TestEvaluateCandidate:
    def setup_method(self):
        self.gen = SyntheticGenerator()
        self.ev = ProxyEvaluator(grid_resolution=64)
        from aeroprompt.evaluator import compute_baseline

        results, self.baseline = compute_reference_set(self.gen, self.ev, "A car", 20, 0)

    def test_ok_fields(self):
        out = _evaluate_candidate(self.gen, self.ev, self.baseline, "A fast car", 0)
        assert out["status"] == STATUS_OK
        assert out["cd_normalized"] == pytest.approx(
            self.baseline.normalize(out["cd"])
        )
        assert out["length"] >= out["width"] >= out["height"]
        assert len(out["mesh_hash"]) == 64

    def test_same_prompt_same_result(self):
        a = _evaluate_candidate(self.gen, self.ev, self.baseline, "A sleek car", 0)
        b = _evaluate_candidate(self.gen, self.ev, self.baseline, "A sleek car", 0)
        assert a["cd"] == b["cd"]
        assert a["mesh_hash"] == b["mesh_hash"]

    def test_generation_failure(self):
        out = _evaluate_candidate(
            FailingGenerator(allow=()), self.ev, self.baseline, "A car", 0
        )
        assert out["status"] == STATUS_GEN_FAILED
        assert "refused" in out["error"]
        assert "cd" not in out

    def test_evaluation_failure(self):
        out = _evaluate_candidate(
            self.gen, ExplodingEvaluator(), self.baseline, "A car", 0
        )
        assert out["status"] == STATUS_EVAL_FAILED
        assert "strike" in out["error"]


class TestReferenceSet:
    def test_batch_and_stats(self, tmp_path):
        gen = SyntheticGenerator()
        ev = ProxyEvaluator(grid_resolution=64)
        path = tmp_path / "ref.ndjson"
        results, baseline = compute_reference_set(gen, ev, "A car", 25, 0,
                                                  records_path=path)
        assert len(results) == 25
        assert baseline.n == 25
        rows = [json.loads(line) for line in path.read_text().splitlines()]
        assert len(rows) == 25
        assert rows[0]["prompt"] == "A car"
        assert [r["index"] for r in rows] == list(range(25))
        assert rows[3]["cd"] == results[3].cd

    def test_workers_do_not_change_results(self):
        gen = SyntheticGenerator()
        ev = ProxyEvaluator(grid_resolution=64)
        r1, b1 = compute_reference_set(gen, ev, "A car", 16, 0, workers=1)
        r4, b4 = compute_reference_set(gen, ev, "A car", 16, 0, workers=4)
        assert [r.cd for r in r1] == [r.cd for r in r4]
        assert b1 == b4

    def test_identical_designs_degenerate(self):
        ev = ProxyEvaluator(grid_resolution=64)
        with pytest.raises(DegenerateBaseline):
            compute_reference_set(ConstantGenerator(), ev, "A car", 5, 0)


@pytest.fixture(scope="module")
def bow_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("bowrun")
    cfg = small_config(tmp)
    return run_optimization(cfg), cfg, tmp


class TestRunOptimization:
    def test_record_layout(self, bow_run):
        result, cfg, _ = bow_run
        assert len(result.records) == 4 * 3
        assert [r.generation for r in result.records] == [g for g in range(3) for _ in range(4)]
        assert [r.index for r in result.records] == [i for _ in range(3) for i in range(4)]
        assert result.converged_reason == "max_generations"

    def test_records_file_matches_memory(self, bow_run):
        result, _, _ = bow_run
        lines = (result.run_dir / "records.ndjson").read_text().splitlines()
        assert len(lines) == len(result.records)
        for line, rec in zip(lines, result.records):
            assert json.loads(line) == rec.to_dict()

    def test_ok_records_normalized_against_baseline(self, bow_run):
        result, _, _ = bow_run
        span = result.baseline.span
        for rec in result.records:
            assert rec.status == STATUS_OK
            assert rec.fitness == rec.cd_normalized
            assert rec.cd_normalized == pytest.approx(rec.cd / span, abs=1e-15)

    def test_duplicate_prompts_identical_outcomes(self, bow_run):
        result, _, _ = bow_run
        by_prompt = {}
        for rec in result.records:
            by_prompt.setdefault(rec.prompt, []).append(rec)
        multi = [v for v in by_prompt.values() if len(v) > 1]
        assert multi, "expected repeated prompts near the bow initial mean"
        for group in multi:
            assert len({r.cd for r in group}) == 1
            assert len({r.mesh_hash for r in group}) == 1

    def test_generation_stats_recomputable(self, bow_run):
        result, _, _ = bow_run
        for gen, stats in enumerate(result.generations):
            recs = [r for r in result.records if r.generation == gen]
            ok = [r.cd_normalized for r in recs if r.status == STATUS_OK]
            assert stats["generation"] == gen
            assert stats["n_ok"] == len(ok)
            assert stats["n_failed"] == len(recs) - len(ok)
            assert stats["cd_n_mean"] == pytest.approx(np.mean(ok), abs=1e-12)
            assert stats["cd_n_min"] == pytest.approx(np.min(ok), abs=1e-12)
            genomes = np.array([r.genome for r in recs])
            np.testing.assert_allclose(stats["mean_genome"], genomes.mean(axis=0),
                                       atol=1e-12)
            np.testing.assert_allclose(stats["genome_variance"], genomes.var(axis=0),
                                       atol=1e-12)

    def test_best_is_minimum_ok_fitness(self, bow_run):
        result, _, _ = bow_run
        best_fit = min(r.fitness for r in result.records if r.status == STATUS_OK)
        assert result.best.fitness == best_fit

    def test_output_files(self, bow_run):
        result, _, _ = bow_run
        for name in ("records.ndjson", "reference.ndjson", "baseline.json",
                     "config.json", "cma_final.json", "runlog.json",
                     "gen_stats.csv", "best_mesh.obj"):
            assert (result.run_dir / name).exists(), name

    def test_config_snapshot_roundtrips(self, bow_run):
        result, cfg, _ = bow_run
        doc = json.loads((result.run_dir / "config.json").read_text())
        assert config_from_dict(doc) == cfg

    def test_runlog_contents(self, bow_run):
        result, cfg, _ = bow_run
        runlog = json.loads((result.run_dir / "runlog.json").read_text())
        assert runlog["config"] == cfg.to_dict()
        assert runlog["converged_reason"] == "max_generations"
        assert runlog["best"]["fitness"] == result.best.fitness
        assert runlog["generator_model"] == "synthetic-box-v1"
        assert runlog["initial_reference"] is None  # disabled in this config

    def test_gen_csv_has_scalar_columns(self, bow_run):
        result, _, _ = bow_run
        header = (result.run_dir / "gen_stats.csv").read_text().splitlines()[0]
        cols = header.split(",")
        assert "generation" in cols
        assert "cd_n_mean" in cols
        assert "mean_genome" not in cols  # list-valued stats stay in the runlog

    def test_rerun_lands_in_fresh_dir_with_identical_records(self, bow_run):
        result, cfg, tmp = bow_run
        again = run_optimization(cfg)
        assert again.run_dir != result.run_dir
        assert again.run_dir.name == "run_2"
        assert (again.run_dir / "records.ndjson").read_bytes() == (
            result.run_dir / "records.ndjson"
        ).read_bytes()
        assert (again.run_dir / "runlog.json").read_bytes() == (
            result.run_dir / "runlog.json"
        ).read_bytes()

    def test_worker_count_does_not_change_records(self, bow_run, tmp_path):
        result, cfg, _ = bow_run
        import dataclasses

        parallel = dataclasses.replace(cfg, workers=3, out_dir=str(tmp_path))
        other = run_optimization(parallel)
        assert (other.run_dir / "records.ndjson").read_bytes() == (
            result.run_dir / "records.ndjson"
        ).read_bytes()


class TestRunVariants:
    def test_initial_reference_logged(self, tmp_path):
        cfg = small_config(tmp_path, initial_reference_size=5)
        result = run_optimization(cfg)
        runlog = json.loads((result.run_dir / "runlog.json").read_text())
        info = runlog["initial_reference"]
        assert info["n"] == 5
        assert info["prompt"] == "A fast car in the shape of wing"
        for key in ("cd_mean", "cd_ci95", "cd_min", "cd_max", "cd_n_mean"):
            assert isinstance(info[key], float)
        lines = (result.run_dir / "initial_reference.ndjson").read_text().splitlines()
        assert len(lines) == 5

    def test_plus_switch_flips_mode(self, tmp_path):
        cfg = small_config(tmp_path, plus_switch_generation=1, max_generations=4)
        result = run_optimization(cfg)
        snap = json.loads((result.run_dir / "cma_final.json").read_text())
        assert snap["config"]["mode"] == "comma"
        assert snap["mode"] == "plus"
        # best pool fitness must be non-increasing once elitism is active
        pool = [g["best_pool_cdn"] for g in result.generations[1:]]
        assert all(b <= a + 1e-15 for a, b in zip(pool, pool[1:]))

    def test_token_encoding_run(self, tmp_path):
        cfg = small_config(tmp_path, encoding="token", genome_dim=3,
                           max_generations=2)
        result = run_optimization(cfg)
        assert len(result.records) == 8
        assert all(r.prompt.startswith("A car in the shape of") for r in result.records)

    def test_all_candidates_failing_still_completes(self, tmp_path, monkeypatch):
        monkeypatch.setattr(
            orchestrator, "_generator_factory", lambda cfg: FailingGenerator()
        )
        cfg = small_config(tmp_path, max_generations=2)
        result = run_optimization(cfg)
        assert result.best is None
        assert all(r.status == STATUS_GEN_FAILED for r in result.records)
        penalty = result.baseline.penalty_fitness()
        assert all(r.fitness == penalty for r in result.records)
        assert not (result.run_dir / "best_mesh.obj").exists()
        runlog = json.loads((result.run_dir / "runlog.json").read_text())
        assert runlog["best"] is None


class TestSimilaritySweep:
    def test_validates_inputs(self, tmp_path):
        cfg = small_config(tmp_path)
        with pytest.raises(AeropromptError, match="word_count"):
            similarity_sweep(0, "car", cfg)
        with pytest.raises(AeropromptError, match="not in taxonomy"):
            similarity_sweep(3, "zeppelin", cfg)

    def test_row_contract(self, tmp_path):
        cfg = small_config(tmp_path)
        rows = similarity_sweep(10, "car", cfg, n_points=1024)
        assert len(rows) == 10
        first = rows[0]
        assert first["word"] == "car"
        assert first["wup"] == 1.0
        assert first["chamfer"] == 0.0
        assert len({r["word"] for r in rows}) == 10
        for row in rows:
            assert row["status"] == STATUS_OK
            assert 0.0 < row["wup"] <= 1.0
            assert row["pos"] in ("adjective", "noun")
            assert row["chamfer"] >= 0.0

    def test_deterministic(self, tmp_path):
        cfg = small_config(tmp_path)
        a = similarity_sweep(6, "car", cfg, n_points=1024)
        b = similarity_sweep(6, "car", cfg, n_points=1024)
        assert a == b

    def test_word_count_capped_at_pool(self, tmp_path):
        cfg = small_config(tmp_path)
        rows = similarity_sweep(10_000, "car", cfg, n_points=256)
        from aeroprompt import lexicon

        taxonomy = lexicon.load_taxonomy(lexicon.fixture_path())
        pool = set(taxonomy.words(lexicon.ADJECTIVE)) | set(taxonomy.words(lexicon.NOUN))
        assert len(rows) == len(pool)

    def test_shape_distance_tracks_semantics(self, tmp_path):
        # frozen measurement: vs "car" at 4096 points, seed 0, the slender
        # "snake" body sits ~8x farther in chamfer than the near-synonym
        # "machine"; assert a safe 5x separation
        cfg = small_config(tmp_path)
        gen = SyntheticGenerator()
        from aeroprompt import lexicon
        from aeroprompt.geometry import (
            align_to_axes,
            chamfer_distance,
            sample_surface,
            validate_mesh,
        )

        def cloud(word):
            mesh = align_to_axes(validate_mesh(
                gen.generate(GenerationRequest(prompt=word, seed=0)).meshes[0]
            ))
            return sample_surface(mesh, 4096, seed=0)

        ref = cloud("car")
        near = chamfer_distance(cloud("machine"), ref)
        far = chamfer_distance(cloud("snake"), ref)
        assert far > 5.0 * near

    def test_failed_words_flagged(self, tmp_path):
        cfg = small_config(tmp_path)
        gen = FailingGenerator(allow=("car", "machine"))
        rows = similarity_sweep(4, "car", cfg, generator=gen, n_points=512)
        assert rows[0]["status"] == STATUS_OK
        failed = [r for r in rows if r["status"] == STATUS_GEN_FAILED]
        assert failed
        for row in failed:
            assert row["chamfer"] is None
            assert "refused" in row["error"]

    def test_csv_writer(self, tmp_path):
        cfg = small_config(tmp_path)
        rows = similarity_sweep(5, "car", cfg, n_points=256)
        out = tmp_path / "sweep.csv"
        write_sweep_csv(out, rows)
        lines = out.read_text().splitlines()
        assert lines[0] == "word,pos,wup,chamfer,status"
        assert len(lines) == 6
