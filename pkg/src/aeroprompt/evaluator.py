"""Drag evaluation: a fast frontal-area proxy and an external CFD adapter.

The proxy models the well-known dominance of frontal area in bluff-body
drag: cd = c0 + c1 * frontal_area + noise. The noise term is keyed on the
mesh content hash, so the same geometry always receives the same drag value
no matter the process, thread, or evaluation order. Its magnitude is frozen
so that drag correlates with frontal area at roughly R^2 ~ 0.84 over a
baseline population (see tools/calibrate_proxy.py for the derivation).

A real solver plugs in through the same one-method interface; the bundled
CfdEvaluator shells out to a user-provided command speaking one JSON request
line {"mesh_path", "case"} -> one response line {"cd", "status"} per mesh.
"""

from __future__ import annotations

import hashlib
import json
import math
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from .errors import DegenerateBaseline, EvaluationFailed
from .geometry import (
    DEFAULT_GRID_RESOLUTION,
    EvalResult,
    TriMesh,
    bounding_dims,
    projected_frontal_area,
    save_obj,
)

PENALTY_FACTOR = 1.2

# frozen by tools/calibrate_proxy.py against the synthetic baseline
DEFAULT_C0 = 0.02
DEFAULT_C1 = 0.5
DEFAULT_NOISE_SIGMA = 0.0047


@dataclass(frozen=True)
class ProxyCoefficients:
    c0: float = DEFAULT_C0
    c1: float = DEFAULT_C1
    noise_sigma: float = DEFAULT_NOISE_SIGMA

    def __post_init__(self):
        if self.c1 <= 0:
            raise ValueError("c1 must be positive so smaller area means smaller drag")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")


class CdEvaluator(Protocol):
    """Anything that scores an aligned mesh with a drag coefficient."""

    def evaluate(self, mesh: TriMesh) -> EvalResult:
        ...


@dataclass(frozen=True)
class ProxyEvaluator:
    """Frontal-area drag proxy with content-keyed measurement noise."""

    coefficients: ProxyCoefficients = ProxyCoefficients()
    seed: int = 0
    grid_resolution: int = DEFAULT_GRID_RESOLUTION

    def evaluate(self, mesh: TriMesh) -> EvalResult:
        area = projected_frontal_area(mesh, self.grid_resolution)
        dims = bounding_dims(mesh)
        c = self.coefficients
        cd = c.c0 + c.c1 * area
        if c.noise_sigma > 0:
            key = f"{self.seed}|{mesh.content_hash()}".encode("ascii")
            digest = hashlib.sha256(key).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
            cd += c.noise_sigma * float(rng.standard_normal())
        return EvalResult(cd=float(cd), frontal_area=area, dims=dims)


@dataclass(frozen=True)
class BaselineStats:
    """Population statistics for a reference set of evaluated designs."""

    n: int
    cd_min: float
    cd_max: float
    cd_mean: float
    cd_ci95: float
    r_squared: float

    @property
    def span(self) -> float:
        return self.cd_max - self.cd_min

    def normalize(self, cd: float) -> float:
        return cd / self.span

    def penalty_fitness(self) -> float:
        """Fitness assigned to failed candidates: safely worse than any
        observed baseline design, in normalized units."""
        return PENALTY_FACTOR * self.cd_max / self.span

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "cd_min": self.cd_min,
            "cd_max": self.cd_max,
            "cd_mean": self.cd_mean,
            "cd_ci95": self.cd_ci95,
            "r_squared": self.r_squared,
        }


def compute_baseline(results) -> BaselineStats:
    """Summarize a reference population of EvalResults.

    Raises DegenerateBaseline when the population cannot anchor a
    normalization: fewer than two designs, zero drag span, or no frontal
    area variance (the regression would be ill-posed).
    """
    results = list(results)
    n = len(results)
    if n < 2:
        raise DegenerateBaseline(f"need at least 2 baseline designs, got {n}")
    cd = np.array([r.cd for r in results], dtype=np.float64)
    area = np.array([r.frontal_area for r in results], dtype=np.float64)

    span = float(cd.max() - cd.min())
    if span <= 0.0:
        raise DegenerateBaseline("baseline drag span is zero")
    if float(np.var(area)) == 0.0:
        raise DegenerateBaseline("baseline frontal areas are constant")

    slope, intercept = np.polyfit(area, cd, 1)
    fitted = slope * area + intercept
    ss_res = float(np.sum((cd - fitted) ** 2))
    ss_tot = float(np.sum((cd - cd.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot

    sd = float(np.std(cd, ddof=1))
    return BaselineStats(
        n=n,
        cd_min=float(cd.min()),
        cd_max=float(cd.max()),
        cd_mean=float(cd.mean()),
        cd_ci95=1.96 * sd / math.sqrt(n),
        r_squared=r_squared,
    )


class CfdEvaluator:
    """Adapter for an external solver process.

    Each evaluation writes the mesh as OBJ into the scratch directory and
    runs `command` once with the request JSON on stdin; the process must
    print one JSON line {"cd": float, "status": "ok"} and exit. Anything
    else raises EvaluationFailed. Frontal area and dims still come from the
    local geometry pipeline so results stay comparable with the proxy.
    """

    def __init__(self, command, scratch_dir, case: str = "default",
                 grid_resolution: int = DEFAULT_GRID_RESOLUTION, timeout: float = 3600.0):
        self.command = list(command)
        self.scratch_dir = Path(scratch_dir)
        self.scratch_dir.mkdir(parents=True, exist_ok=True)
        self.case = case
        self.grid_resolution = grid_resolution
        self.timeout = timeout
        self._counter = 0

    def evaluate(self, mesh: TriMesh) -> EvalResult:
        area = projected_frontal_area(mesh, self.grid_resolution)
        dims = bounding_dims(mesh)
        self._counter += 1
        mesh_path = self.scratch_dir / f"cfd_{self._counter:06d}_{mesh.content_hash()[:12]}.obj"
        save_obj(mesh, mesh_path)
        request = json.dumps({"mesh_path": str(mesh_path), "case": self.case})
        try:
            proc = subprocess.run(
                self.command,
                input=request + "\n",
                capture_output=True,
                text=True,
                timeout=self.timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise EvaluationFailed(f"solver did not run: {exc}") from exc
        if proc.returncode != 0:
            raise EvaluationFailed(f"solver exited {proc.returncode}: {proc.stderr.strip()}")
        reply = None
        for line in proc.stdout.splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                candidate = json.loads(line)
            except json.JSONDecodeError:
                continue
            if isinstance(candidate, dict) and "status" in candidate:
                reply = candidate
        if reply is None:
            raise EvaluationFailed("solver produced no JSON status line")
        if reply.get("status") != "ok" or "cd" not in reply:
            raise EvaluationFailed(f"solver error: {reply!r}")
        return EvalResult(cd=float(reply["cd"]), frontal_area=area, dims=dims)
