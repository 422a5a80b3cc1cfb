"""Dense array helpers and deterministic seeded random number generation.

Matrices are plain 2-D float64 numpy arrays. Reproducibility contract:
equal (seed, stream) pairs give bitwise-identical draw sequences on any
platform, because PCG64 keyed through SeedSequence is platform-stable.
"""

import numpy as np

__all__ = ["matmul", "RngState"]


def matmul(A, B):
    """Matrix product A @ B with an explicit conformability check.

    Raises ValueError on a shape mismatch instead of numpy's generic error.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2:
        raise ValueError(f"matmul expects 2-D arrays, got {A.ndim}-D and {B.ndim}-D")
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"matmul shape mismatch: {A.shape} x {B.shape}")
    return A @ B


class RngState:
    """Deterministic random stream keyed by (seed, stream).

    Independent parallel work derives child streams via `child(stream)`;
    distinct stream indices give statistically independent sequences
    (SeedSequence spawn keys).
    """

    def __init__(self, seed, stream=0):
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def child(self, stream):
        """Fresh independent stream with the same master seed."""
        return RngState(self.seed, stream)

    def uniform01(self, n):
        """n i.i.d. draws from U[0, 1)."""
        if n < 0:
            raise ValueError("n must be >= 0")
        return self._gen.random(n)

    def standard_normal(self, n):
        """n i.i.d. N(0, 1) draws (ziggurat transform of the uniform stream)."""
        if n < 0:
            raise ValueError("n must be >= 0")
        return self._gen.standard_normal(n)

    def student_t2(self, n):
        """n i.i.d. Student-t draws with 2 degrees of freedom.

        Constructed as Z / sqrt(V / 2) with Z ~ N(0,1) and V ~ chi2(2).
        """
        if n < 0:
            raise ValueError("n must be >= 0")
        z = self._gen.standard_normal(n)
        v = self._gen.chisquare(2, n)
        return z / np.sqrt(v / 2.0)

    def bernoulli_mask(self, shape, keep_prob):
        """Boolean array with independent P(True) = keep_prob entries."""
        return self._gen.random(shape) < keep_prob

    def permutation(self, n):
        """Random permutation of range(n)."""
        return self._gen.permutation(n)
