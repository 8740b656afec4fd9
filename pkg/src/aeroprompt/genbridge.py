"""Prompt-to-mesh generation: a built-in synthetic generator plus a wire
protocol client for external generator processes.

The synthetic generator is the default backend. It maps a prompt to car-like
box geometry through a fixed keyword table, so prompt wording changes shape
deterministically and known slender words genuinely shrink the frontal area.
It is a stand-in with the same interface contract as a learned text-to-3D
model: prompt + seed + batch index fully determine the mesh.

External generators run as subprocesses speaking newline-delimited JSON on
stdio: one handshake line {"ready": true, "model": ...} at startup, then
request {"id", "prompt", "seed", "batch"} ->
response {"id", "status": "ok"|"error", "mesh_paths": [...], "message": ...}.
Mesh files are OBJ, written under a scratch directory the client owns.
"""

from __future__ import annotations

import hashlib
import json
import os
import queue
import subprocess
import tempfile
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from .errors import GenerationFailed
from .geometry import TriMesh, load_obj

SCRATCH_ENV = "AEROPROMPT_SCRATCH"

HANDSHAKE_TIMEOUT = 60.0
REQUEST_TIMEOUT = 300.0

BODY_LENGTH = 1.0
BASE_WIDTH = 0.55
BASE_HEIGHT = 0.42
WIDTH_SLOPE = 0.115
HEIGHT_SLOPE = 0.075
WIDTH_RANGE = (0.2, 0.8)
HEIGHT_RANGE = (0.2, 0.5)
BASE_TAPER = 0.12
TAPER_RANGE = (0.0, 0.5)
CABIN_RANGE = (0.1, 1.4)
CABIN_WIDTH_FRAC = 0.78
CABIN_HEIGHT_FRAC = 0.45
BLUFFNESS_CAP = 3.0
RESIDUAL_WH = 0.04
RESIDUAL_TAPER = 0.03

# word -> (bluffness, cabin delta, taper delta); negative bluffness slims the
# cross section, so prompts stacking these words produce lower-drag bodies
KEYWORDS = {
    "fast": (-0.5, 0.0, 0.02),
    "quick": (-0.45, 0.0, 0.02),
    "slow": (0.6, 0.0, -0.02),
    "lazy": (0.5, 0.0, -0.02),
    "sleek": (-0.9, -0.1, 0.05),
    "streamlined": (-1.1, -0.15, 0.08),
    "aerodynamic": (-1.5, -0.2, 0.1),
    "boxy": (1.2, 0.1, -0.08),
    "blocky": (1.1, 0.1, -0.06),
    "bulky": (1.0, 0.15, -0.04),
    "flat": (-0.8, -0.3, 0.0),
    "thin": (-1.0, -0.25, 0.0),
    "wing": (-0.5, -0.2, 0.05),
    "aileron": (-0.5, -0.15, 0.05),
    "machine": (0.5, 0.05, 0.0),
    "wedge": (-0.7, -0.1, 0.15),
    "needle": (-1.3, -0.3, 0.2),
    "arrow": (-1.2, -0.25, 0.18),
    "tube": (-1.5, -0.5, 0.0),
    "pipe": (-1.5, -0.5, 0.0),
    "box": (1.2, 0.2, -0.1),
    "truck": (0.8, 0.3, -0.05),
    "balloon": (1.3, 0.35, -0.02),
    "cloud": (1.5, 0.4, 0.0),
    "airplane": (-1.0, -0.1, 0.12),
    "bird": (-0.6, -0.05, 0.1),
    "shark": (-1.2, -0.2, 0.15),
    "snake": (-1.4, -0.45, 0.3),
    "frog": (0.6, 0.45, -0.05),
}


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    seed: int
    batch_size: int = 1

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class GenerationResult:
    meshes: tuple
    generator_id: str
    latency_s: float


class ShapeGenerator(Protocol):
    """Anything that turns a prompt request into a batch of meshes."""

    def generate(self, request: GenerationRequest) -> GenerationResult:
        ...


def canonical_prompt(prompt: str) -> str:
    return " ".join(prompt.lower().split())


def _prompt_words(prompt: str) -> set:
    words = set()
    for token in canonical_prompt(prompt).split():
        word = "".join(ch for ch in token if ch.isalpha())
        if word:
            words.add(word)
    return words


def _residual_rng(prompt: str, seed: int, batch_index: int) -> np.random.Generator:
    key = f"{canonical_prompt(prompt)}|{seed}|{batch_index}".encode("utf-8")
    digest = hashlib.sha256(key).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def synthetic_shape_params(prompt: str, seed: int = 0, batch_index: int = 0) -> dict:
    """Deterministic shape parameters for a prompt: width, height, taper,
    cabin scale, plus the raw keyword bluffness that drove them."""
    words = _prompt_words(prompt)
    bluff = 0.0
    cabin = 1.0
    taper = BASE_TAPER
    for w in sorted(words):
        if w in KEYWORDS:
            b, c, t = KEYWORDS[w]
            bluff += b
            cabin += c
            taper += t
    bluff = min(BLUFFNESS_CAP, max(-BLUFFNESS_CAP, bluff))

    rng = _residual_rng(prompt, seed, batch_index)
    u = rng.uniform(-1.0, 1.0, size=3)
    width = BASE_WIDTH + WIDTH_SLOPE * bluff + RESIDUAL_WH * u[0]
    height = BASE_HEIGHT + HEIGHT_SLOPE * bluff + RESIDUAL_WH * u[1]
    taper = taper + RESIDUAL_TAPER * u[2]

    return {
        "bluffness": bluff,
        "width": float(min(WIDTH_RANGE[1], max(WIDTH_RANGE[0], width))),
        "height": float(min(HEIGHT_RANGE[1], max(HEIGHT_RANGE[0], height))),
        "taper": float(min(TAPER_RANGE[1], max(TAPER_RANGE[0], taper))),
        "cabin": float(min(CABIN_RANGE[1], max(CABIN_RANGE[0], cabin))),
    }


def expected_frontal_area(params: dict) -> float:
    """Analytic frontal area of the synthetic body for a parameter dict."""
    return params["width"] * params["height"] * (
        1.0 + CABIN_WIDTH_FRAC * CABIN_HEIGHT_FRAC * params["cabin"]
    )


def _hexahedron_faces(offset: int) -> list:
    # corner order: (x, y, z) bits, x fastest axis pairing front/rear quads
    quads = [
        (0, 1, 3, 2),  # rear  x=-0.5
        (4, 6, 7, 5),  # front x=+0.5
        (0, 4, 5, 1),  # -y side
        (2, 3, 7, 6),  # +y side
        (0, 2, 6, 4),  # bottom
        (1, 5, 7, 3),  # top
    ]
    faces = []
    for a, b, c, d in quads:
        faces.append((offset + a, offset + b, offset + c))
        faces.append((offset + a, offset + c, offset + d))
    return faces


def build_synthetic_mesh(params: dict) -> TriMesh:
    """Tapered box body with a cabin block on top.

    The rear face is exactly width x height and taper only shrinks the front
    face, so the frontal area has the closed form width*height*(1 + 0.351*cabin)
    regardless of taper. The body spans x in [-0.5, 0.5] exactly.
    """
    w = params["width"]
    h = params["height"]
    t = params["taper"]
    g = params["cabin"]

    def body_corner(front: bool, py: bool, pz: bool):
        scale = 1.0 - t if front else 1.0
        x = 0.5 if front else -0.5
        y = (w / 2.0 * scale) * (1.0 if py else -1.0)
        z = h * scale if pz else 0.0
        return (x, y, z)

    # corner index = 4*front + 2*py + pz, matching _hexahedron_faces
    verts = [
        body_corner(bool(i & 4), bool(i & 2), bool(i & 1)) for i in range(8)
    ]
    faces = _hexahedron_faces(0)

    cw = CABIN_WIDTH_FRAC * w / 2.0
    cz0 = h
    cz1 = h + CABIN_HEIGHT_FRAC * h * g
    cabin = [
        (x, y, z)
        for x in (-0.35, 0.10)
        for y in (-cw, cw)
        for z in (cz0, cz1)
    ]
    verts.extend(cabin)
    faces.extend(_hexahedron_faces(8))

    return TriMesh(
        vertices=np.array(verts, dtype=np.float64),
        faces=np.array(faces, dtype=np.int64),
    )


@dataclass
class SyntheticGenerator:
    """In-process generator: keyword table + residual hash -> box car."""

    model_name: str = "synthetic-box-v1"

    def generate(self, request: GenerationRequest) -> GenerationResult:
        start = time.monotonic()
        meshes = tuple(
            build_synthetic_mesh(synthetic_shape_params(request.prompt, request.seed, i))
            for i in range(request.batch_size)
        )
        return GenerationResult(
            meshes=meshes,
            generator_id=self.model_name,
            latency_s=time.monotonic() - start,
        )


def default_scratch_dir() -> Path:
    env = os.environ.get(SCRATCH_ENV, "").strip()
    if env:
        path = Path(env)
        path.mkdir(parents=True, exist_ok=True)
        return path
    return Path(tempfile.mkdtemp(prefix="aeroprompt-"))


class BridgeClient:
    """One external generator subprocess speaking the stdio protocol.

    Lines on the child's stdout that do not parse as JSON objects are
    ignored, so generators may log freely. Thread-safe: requests serialize
    through an internal lock.
    """

    def __init__(
        self,
        command,
        scratch_dir=None,
        handshake_timeout: float = HANDSHAKE_TIMEOUT,
        request_timeout: float = REQUEST_TIMEOUT,
    ):
        self.command = list(command)
        self.scratch_dir = Path(scratch_dir) if scratch_dir else default_scratch_dir()
        self.scratch_dir.mkdir(parents=True, exist_ok=True)
        self.request_timeout = request_timeout
        self._lock = threading.Lock()
        self._lines: queue.Queue = queue.Queue()

        env = dict(os.environ)
        env[SCRATCH_ENV] = str(self.scratch_dir)
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=None,
                env=env,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise GenerationFailed(f"could not start generator {self.command!r}: {exc}") from exc

        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

        hello = self._next_message(handshake_timeout)
        if not (isinstance(hello, dict) and hello.get("ready") is True):
            self.close()
            raise GenerationFailed(f"generator handshake failed: {hello!r}")
        self.model_name = str(hello.get("model", "unknown"))

    def _pump(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _next_message(self, timeout: float):
        deadline = time.monotonic() + timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise GenerationFailed(f"generator timed out after {timeout:.0f}s")
            try:
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                raise GenerationFailed(f"generator timed out after {timeout:.0f}s")
            if line is None:
                raise GenerationFailed("generator process closed its output")
            line = line.strip()
            if not line:
                continue
            try:
                msg = json.loads(line)
            except json.JSONDecodeError:
                continue  # log noise from the generator
            if isinstance(msg, dict):
                return msg

    def generate(self, request: GenerationRequest) -> GenerationResult:
        start = time.monotonic()
        req_id = uuid.uuid4().hex
        payload = json.dumps(
            {
                "id": req_id,
                "prompt": request.prompt,
                "seed": request.seed,
                "batch": request.batch_size,
            }
        )
        with self._lock:
            if self._proc.poll() is not None:
                raise GenerationFailed("generator process has exited")
            try:
                self._proc.stdin.write(payload + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise GenerationFailed(f"generator pipe broken: {exc}") from exc
            while True:
                msg = self._next_message(self.request_timeout)
                if msg.get("id") == req_id:
                    break
        if msg.get("status") != "ok":
            raise GenerationFailed(
                f"generator error: {msg.get('message', 'no message')!r}"
            )
        paths = msg.get("mesh_paths")
        if not isinstance(paths, list) or len(paths) != request.batch_size:
            raise GenerationFailed(
                f"expected {request.batch_size} mesh paths, got {paths!r}"
            )
        meshes = []
        for p in paths:
            try:
                meshes.append(load_obj(p))
            except Exception as exc:
                raise GenerationFailed(f"could not load mesh {p!r}: {exc}") from exc
        return GenerationResult(
            meshes=tuple(meshes),
            generator_id=self.model_name,
            latency_s=time.monotonic() - start,
        )

    def close(self):
        proc = getattr(self, "_proc", None)
        if proc is None:
            return
        try:
            if proc.stdin:
                proc.stdin.close()
            proc.wait(timeout=5)
        except Exception:
            proc.kill()
            proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
