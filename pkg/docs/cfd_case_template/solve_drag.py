#!/usr/bin/env python3
"""Reference CFD adapter: JSON protocol wrapper around an OpenFOAM case.

Reads one request line {"mesh_path", "case"} from stdin, runs the case
template against the mesh, and prints one {"cd", "status"} line. This is
documentation-grade code: it shows the wiring, but the solver steps are a
sketch that you must adapt to your OpenFOAM installation and case setup.
"""

import json
import re
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

TEMPLATE = Path(__file__).resolve().parent / "case"


def run(cmd, cwd):
    proc = subprocess.run(cmd, cwd=cwd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"{cmd[0]} failed:\n{proc.stderr[-2000:]}")


def latest_cd(case_dir: Path) -> float:
    """Last Cd sample from the forceCoeffs output."""
    coeff_files = sorted(case_dir.glob("postProcessing/forces/*/coefficient*.dat"))
    if not coeff_files:
        raise RuntimeError("no forceCoeffs output found")
    last = None
    for line in coeff_files[-1].read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        last = re.split(r"\s+", line.strip())
    if last is None:
        raise RuntimeError("forceCoeffs output is empty")
    return float(last[1])  # columns: time Cd Cs Cl ...


def solve(mesh_path: str) -> float:
    with tempfile.TemporaryDirectory(prefix="cfd-case-") as tmp:
        case = Path(tmp) / "case"
        shutil.copytree(TEMPLATE, case)
        tri = case / "constant" / "triSurface"
        tri.mkdir(parents=True, exist_ok=True)
        run(["surfaceMeshConvert", mesh_path, str(tri / "design.stl")], case)
        run(["blockMesh"], case)
        run(["snappyHexMesh", "-overwrite"], case)
        run(["simpleFoam"], case)
        return latest_cd(case)


def main() -> int:
    try:
        request = json.loads(sys.stdin.readline())
        cd = solve(request["mesh_path"])
    except Exception as exc:  # any failure -> penalty path upstream
        print(json.dumps({"status": "error", "message": str(exc)}))
        return 0
    print(json.dumps({"cd": cd, "status": "ok"}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
