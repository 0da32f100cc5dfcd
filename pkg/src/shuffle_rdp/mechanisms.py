"""Discrete eps0-LDP randomizers and gradient clipping.

Two mechanisms: binary randomized response, and an unbiased vector
randomizer for inputs in an l-infinity ball.  The vector mechanism picks
one coordinate uniformly, stochastically quantizes it to {-C, +C},
randomizes that sign bit with binary randomized response, and rescales so
the output is unbiased.  Its output alphabet has 2d points, its
worst-case second moment matches C^2 d^2 ((e^{eps0}+1)/(e^{eps0}-1))^2,
and its kernel satisfies the eps0 likelihood-ratio bound with equality at
the ball surface.

Randomness is always a caller-owned numpy Generator; mechanism objects
are immutable and shareable across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Rr2Mech:
    """Binary randomized response: keeps the bit with prob e^{eps0}/(e^{eps0}+1)."""

    eps0: float

    def __post_init__(self):
        if not (math.isfinite(self.eps0) and self.eps0 >= 0):
            raise ValueError(f"eps0 must be finite and >= 0, got {self.eps0}")

    @property
    def flip_prob(self) -> float:
        """1/(e^{eps0}+1), in (0, 1/2] for eps0 >= 0."""
        return 1.0 / (math.exp(self.eps0) + 1.0)


def rr2_randomize(bit: int, mech: Rr2Mech, rng: np.random.Generator) -> int:
    """Randomized response on a single bit."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    if rng.random() < mech.flip_prob:
        return 1 - bit
    return bit


def clip(x: np.ndarray, C: float, norm: str = "linf") -> np.ndarray:
    """x / max(1, ||x|| / C) for the l-infinity or l2 norm."""
    if not C > 0:
        raise ValueError(f"clip radius must be positive, got {C}")
    x = np.asarray(x, dtype=np.float64)
    if norm == "linf":
        nrm = float(np.max(np.abs(x))) if x.size else 0.0
    elif norm == "l2":
        nrm = float(np.linalg.norm(x))
    else:
        raise ValueError(f"norm must be 'linf' or 'l2', got {norm!r}")
    return x / max(1.0, nrm / C)


def clip_batch(X: np.ndarray, C: float, norm: str = "linf") -> np.ndarray:
    """Row-wise clip for a (k, d) batch."""
    if not C > 0:
        raise ValueError(f"clip radius must be positive, got {C}")
    X = np.asarray(X, dtype=np.float64)
    if norm == "linf":
        nrm = np.max(np.abs(X), axis=1)
    elif norm == "l2":
        nrm = np.linalg.norm(X, axis=1)
    else:
        raise ValueError(f"norm must be 'linf' or 'l2', got {norm!r}")
    return X / np.maximum(1.0, nrm / C)[:, None]


@dataclass(frozen=True)
class VecMech:
    """Unbiased coordinate-sampling randomizer on the l-infinity ball of radius C."""

    eps0: float
    d: int
    C: float

    def __post_init__(self):
        if not (math.isfinite(self.eps0) and self.eps0 > 0):
            raise ValueError(
                f"eps0 must be positive and finite (the variance bound diverges "
                f"at eps0 = 0), got {self.eps0}"
            )
        if self.d < 1 or self.d != int(self.d):
            raise ValueError(f"dimension must be a positive integer, got {self.d}")
        if not self.C > 0:
            raise ValueError(f"radius must be positive, got {self.C}")

    @property
    def flip_prob(self) -> float:
        return 1.0 / (math.exp(self.eps0) + 1.0)

    @property
    def scale(self) -> float:
        """Output magnitude d C (e^{eps0}+1)/(e^{eps0}-1) restoring unbiasedness."""
        return self.d * self.C * (math.exp(self.eps0) + 1.0) / math.expm1(self.eps0)

    @property
    def variance_bound(self) -> float:
        """Worst-case E||output - x||_2^2 over the ball: C^2 d^2 ((e+1)/(e-1))^2."""
        return self.scale**2


# Inputs may exceed the ball by a relative hair from upstream float clipping.
_BALL_SLACK = 1e-9


def _check_in_ball(x: np.ndarray, mech: VecMech) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != mech.d:
        raise ValueError(f"expected dimension {mech.d}, got {x.shape[-1]}")
    if np.max(np.abs(x), axis=-1).max() > mech.C * (1.0 + _BALL_SLACK):
        raise ValueError("input outside the l-infinity ball; clip first")
    return x


def vec_randomize(x: np.ndarray, mech: VecMech, rng: np.random.Generator) -> np.ndarray:
    """One draw of the vector mechanism: E[output | x] = x."""
    x = _check_in_ball(x, mech)
    j = int(rng.integers(mech.d))
    q = 0.5 + x[j] / (2.0 * mech.C)
    b = 1.0 if rng.random() < q else -1.0
    if rng.random() < mech.flip_prob:
        b = -b
    out = np.zeros(mech.d)
    out[j] = mech.scale * b
    return out


def vec_randomize_batch(
    X: np.ndarray, mech: VecMech, rng: np.random.Generator
) -> np.ndarray:
    """Vectorized independent draws for a (k, d) batch of inputs."""
    X = _check_in_ball(np.atleast_2d(X), mech)
    k = X.shape[0]
    j = rng.integers(mech.d, size=k)
    q = 0.5 + X[np.arange(k), j] / (2.0 * mech.C)
    b = np.where(rng.random(k) < q, 1.0, -1.0)
    b = np.where(rng.random(k) < mech.flip_prob, -b, b)
    out = np.zeros_like(X)
    out[np.arange(k), j] = mech.scale * b
    return out


def vec_kernel(x: np.ndarray, mech: VecMech) -> dict[tuple[int, int], float]:
    """Exact output law of vec_randomize: (coordinate, sign) -> probability.

    The alphabet has 2d points; total mass 1.  Used for the exhaustive
    likelihood-ratio check of the eps0-LDP property.
    """
    x = _check_in_ball(x, mech)
    p = mech.flip_prob
    kernel: dict[tuple[int, int], float] = {}
    for j in range(mech.d):
        q = 0.5 + float(x[j]) / (2.0 * mech.C)
        plus = (q * (1.0 - p) + (1.0 - q) * p) / mech.d
        kernel[(j, +1)] = plus
        kernel[(j, -1)] = 1.0 / mech.d - plus
    return kernel
