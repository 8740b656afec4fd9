"""Backend parity: the numba kernels and the numpy fallbacks must agree
to the last bit, and the dispatch flag must actually switch paths."""

from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from aeroprompt import kernels

needs_numba = pytest.mark.skipif(
    not kernels.USE_NUMBA, reason="numba backend not active"
)


class TestNearestSqdist:
    def test_numpy_matches_bruteforce(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(50, 3))
        b = rng.normal(size=(70, 3))
        out = kernels.nearest_sqdist_numpy(a, b)
        full = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=2)
        np.testing.assert_allclose(out, full.min(axis=1), rtol=1e-14)

    @needs_numba
    def test_backends_agree_bitwise(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(123, 3))
        b = rng.normal(size=(77, 3))
        np.testing.assert_array_equal(
            kernels.nearest_sqdist_numba(a, b), kernels.nearest_sqdist_numpy(a, b)
        )

    def test_single_points(self):
        a = np.array([[0.0, 0.0, 0.0]])
        b = np.array([[1.0, 2.0, 2.0]])
        assert kernels.nearest_sqdist(a, b)[0] == 9.0


class TestCoverLattice:
    @staticmethod
    def _tris(rng, k):
        return rng.uniform(-1.0, 1.0, size=(k, 3, 2))

    @needs_numba
    def test_backends_agree_exactly(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            tris = self._tris(rng, 12)
            args = (tris, -1.0, -1.0, 2.0 / 32, 2.0 / 32, 32)
            np.testing.assert_array_equal(
                kernels.cover_lattice_numba(*args), kernels.cover_lattice_numpy(*args)
            )

    def test_full_cover_triangle(self):
        # one triangle swallowing the whole lattice covers every corner
        tris = np.array([[[-10.0, -10.0], [10.0, -10.0], [0.0, 10.0]]])
        covered = kernels.cover_lattice(tris, -1.0, -1.0, 0.125, 0.125, 16)
        assert covered.shape == (17, 17)
        assert covered.all()

    def test_empty_triangle_list(self):
        tris = np.zeros((0, 3, 2))
        covered = kernels.cover_lattice(tris, 0.0, 0.0, 0.1, 0.1, 16)
        assert not covered.any()

    def test_winding_independence(self):
        tri = np.array([[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]])
        flipped = tri[:, ::-1, :]
        args = (0.0, 0.0, 1.0 / 16, 1.0 / 16, 16)
        np.testing.assert_array_equal(
            kernels.cover_lattice(tri, *args), kernels.cover_lattice(flipped, *args)
        )


class TestDispatch:
    def test_backend_name_matches_flag(self):
        assert kernels.active_backend() in ("numba", "numpy")
        assert (kernels.active_backend() == "numba") == kernels.USE_NUMBA

    def test_env_flag_forces_numpy(self):
        env = dict(os.environ, AEROPROMPT_NO_NUMBA="1")
        out = subprocess.run(
            [sys.executable, "-c",
             "from aeroprompt import kernels; print(kernels.active_backend())"],
            capture_output=True, text=True, env=env, check=True,
        )
        assert out.stdout.strip() == "numpy"

    def test_warm_up_idempotent(self):
        kernels.warm_up()
        kernels.warm_up()
