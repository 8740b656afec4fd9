"""Run configuration: schema, defaults, and TOML/JSON loading.

A config file is a flat table of the fields below. Unknown keys are
rejected rather than ignored, so typos fail loudly. The orchestrator
writes a fully resolved snapshot next to each run's outputs; loading that
snapshot reproduces the run record-for-record.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENCODING_BOW = "bow"
ENCODING_TOKEN = "token"

BOW_SIGMA0 = 0.25
TOKEN_SIGMA0_FULL_SCALE = 3000.0  # relative to the 32768-id full vocabulary
BOW_DIM = 2


@dataclass(frozen=True)
class RunConfig:
    encoding: str = ENCODING_BOW
    seed: int = 0
    population_size: int = 10
    n_parents: int = 3
    max_generations: int = 100
    sigma0: float = None  # None -> encoding default
    genome_dim: int = 3  # token encoding only; bow is always 2
    cma_mode: str = "comma"
    plus_switch_generation: int = None  # flip to plus selection at this generation
    generator: str = "synthetic"
    generator_command: tuple = ()  # argv for the "bridge" generator
    evaluator: str = "proxy"
    evaluator_command: tuple = ()  # argv for the "cfd" evaluator
    proxy_c0: float = None
    proxy_c1: float = None
    proxy_noise_sigma: float = None
    grid_resolution: int = 256
    reference_prompt: str = "A car"
    reference_size: int = 300
    initial_reference_size: int = 50  # 0 or 1 skips the initial-prompt reference
    ref_adjective: str = "fast"
    ref_noun: str = "wing"
    per_candidate_seed: bool = False  # derive a distinct generator seed per slot
    word_set_size: int = 64
    taxonomy_path: str = None  # None -> bundled fixture
    vocab_path: str = None  # None -> bundled fixture
    workers: int = 1
    out_dir: str = "runs"
    run_name: str = None  # None -> derived from encoding and seed

    def __post_init__(self):
        if self.encoding not in (ENCODING_BOW, ENCODING_TOKEN):
            raise ConfigError(f"encoding must be 'bow' or 'token', got {self.encoding!r}")
        if self.population_size < 2:
            raise ConfigError("population_size must be >= 2")
        if not 1 <= self.n_parents < self.population_size:
            raise ConfigError("n_parents must be in [1, population_size)")
        if self.max_generations < 1:
            raise ConfigError("max_generations must be >= 1")
        if self.sigma0 is not None and self.sigma0 <= 0:
            raise ConfigError("sigma0 must be positive")
        if self.genome_dim < 1:
            raise ConfigError("genome_dim must be >= 1")
        if self.cma_mode not in ("comma", "plus"):
            raise ConfigError(f"cma_mode must be 'comma' or 'plus', got {self.cma_mode!r}")
        if self.plus_switch_generation is not None and self.plus_switch_generation < 0:
            raise ConfigError("plus_switch_generation must be >= 0")
        if self.generator not in ("synthetic", "bridge"):
            raise ConfigError(f"generator must be 'synthetic' or 'bridge', got {self.generator!r}")
        if self.generator == "bridge" and not self.generator_command:
            raise ConfigError("generator 'bridge' needs generator_command")
        if self.evaluator not in ("proxy", "cfd"):
            raise ConfigError(f"evaluator must be 'proxy' or 'cfd', got {self.evaluator!r}")
        if self.evaluator == "cfd" and not self.evaluator_command:
            raise ConfigError("evaluator 'cfd' needs evaluator_command")
        if self.grid_resolution < 16:
            raise ConfigError("grid_resolution must be >= 16")
        if self.reference_size < 2:
            raise ConfigError("reference_size must be >= 2")
        if self.initial_reference_size < 0:
            raise ConfigError("initial_reference_size must be >= 0")
        if self.word_set_size < 1:
            raise ConfigError("word_set_size must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        object.__setattr__(self, "generator_command", tuple(self.generator_command))
        object.__setattr__(self, "evaluator_command", tuple(self.evaluator_command))

    @property
    def resolved_run_name(self) -> str:
        return self.run_name or f"run_{self.encoding}_seed{self.seed}"

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["generator_command"] = list(self.generator_command)
        out["evaluator_command"] = list(self.evaluator_command)
        return out


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a table/object")
    unknown = sorted(set(doc) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        return RunConfig(**doc)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    """Load a RunConfig from a .toml or .json file."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    if p.suffix == ".toml":
        try:
            doc = tomllib.loads(p.read_text(encoding="utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {p}: {exc}") from exc
    elif p.suffix == ".json":
        try:
            doc = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {p}: {exc}") from exc
    else:
        raise ConfigError(f"config must be .toml or .json, got {p.suffix!r}")
    return config_from_dict(doc)


EXAMPLE_CONFIG = """\
# prompt-space drag optimization run; every key below shows its default

encoding = "bow"            # "bow" or "token"
seed = 0                    # master seed: drives sampling, generation, noise
population_size = 10        # CMA-ES lambda
n_parents = 3               # CMA-ES mu
max_generations = 100
# sigma0 = 0.25             # initial step size; omitted -> encoding default
                            # (bow: 0.25, token: 3000 scaled to vocab size)
genome_dim = 3              # token encoding only; bow genomes are always 2-D
cma_mode = "comma"          # "comma" or "plus"
# plus_switch_generation = 15   # flip comma -> plus mid-run; omitted -> never

generator = "synthetic"     # or "bridge" with generator_command = ["node", "..."]
# generator_command = []
evaluator = "proxy"         # or "cfd" with evaluator_command = ["..."]
# evaluator_command = []
# proxy_c0 = 0.02           # proxy drag model intercept
# proxy_c1 = 0.5            # proxy drag model slope per unit frontal area
# proxy_noise_sigma = 0.0047    # proxy noise scale (calibrated default)
grid_resolution = 256       # frontal-area projection grid

reference_prompt = "A car"  # baseline population prompt
reference_size = 300        # baseline population size
initial_reference_size = 50 # initial-prompt reference population; 0 skips
ref_adjective = "fast"      # bow word-set reference adjective
ref_noun = "wing"           # bow word-set reference noun
per_candidate_seed = false  # true: derive a distinct generator seed per slot
word_set_size = 64          # bow word-set size per part of speech
# taxonomy_path = "..."     # omitted -> bundled fixture taxonomy
# vocab_path = "..."        # omitted -> bundled fixture BPE vocabulary

workers = 1                 # candidate evaluation worker threads
out_dir = "runs"
# run_name = "..."          # omitted -> derived from encoding and seed
"""


def example_config() -> str:
    return EXAMPLE_CONFIG
