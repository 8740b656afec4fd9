"""Evolutionary drag optimization over natural-language prompt space.

Design variables encode a text prompt; a pluggable generator turns the
prompt into a triangle mesh; the mesh is scored by projected frontal area
drag; CMA-ES searches the prompt encoding for low-drag wording.
"""

from .config import RunConfig, load_config
from .errors import AeropromptError
from .geometry import TriMesh, chamfer_distance, projected_frontal_area
from .orchestrator import run_optimization, similarity_sweep

__version__ = "0.1.0"

__all__ = [
    "AeropromptError",
    "RunConfig",
    "TriMesh",
    "chamfer_distance",
    "load_config",
    "projected_frontal_area",
    "run_optimization",
    "similarity_sweep",
    "__version__",
]
