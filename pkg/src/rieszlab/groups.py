"""Homogeneous groups as coordinate spaces with diagonal dilations.

Two law families are built in: Abelian R^N with arbitrary positive dilation
weights, and the Heisenberg group H_n in polarized coordinates (a, b, t),
a, b in R^n, with weights (1, ..., 1, 2).  Points are plain numpy arrays;
all operations accept a single point (N,) or a batch (m, N) and are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import LAW_ABELIAN, LAW_HEISENBERG

__all__ = ["GroupSpec", "abelian", "heisenberg", "group_from_config"]


@dataclass(frozen=True)
class GroupSpec:
    """A homogeneous group: coordinate dimension, dilation weights, law tag."""

    law: str                      # "abelian" | "heisenberg"
    weights: tuple[float, ...]
    n: int = 0                    # Heisenberg parameter, N = 2n + 1

    def __post_init__(self):
        if self.law not in ("abelian", "heisenberg"):
            raise ValueError(f"unknown group law {self.law!r}")
        if any(w <= 0 for w in self.weights):
            raise ValueError("dilation weights must be positive")
        if self.law == "heisenberg":
            expected = (1.0,) * (2 * self.n) + (2.0,)
            if self.n < 1 or self.weights != expected:
                raise ValueError(
                    "heisenberg group requires weights (1,...,1,2) with N = 2n+1"
                )

    @property
    def dim(self) -> int:
        return len(self.weights)

    @property
    def homogeneous_dimension(self) -> float:
        return float(sum(self.weights))

    Q = homogeneous_dimension

    @property
    def law_code(self) -> int:
        return LAW_HEISENBERG if self.law == "heisenberg" else LAW_ABELIAN

    @property
    def weights_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=np.float64)

    def identity(self) -> np.ndarray:
        return np.zeros(self.dim)

    def _check(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dim:
            raise ValueError(
                f"point has {x.shape[-1]} coordinates, group has {self.dim}"
            )
        return x

    def multiply(self, x, y) -> np.ndarray:
        """Group product x . y (componentwise sum for the Abelian law)."""
        x, y = self._check(x), self._check(y)
        out = x + y
        if self.law == "heisenberg":
            n = self.n
            a1, b1 = x[..., :n], x[..., n : 2 * n]
            a2, b2 = y[..., :n], y[..., n : 2 * n]
            drift = 0.5 * (np.sum(a1 * b2, axis=-1) - np.sum(b1 * a2, axis=-1))
            out = out.copy()
            out[..., -1] += drift
        return out

    def inverse(self, x) -> np.ndarray:
        """Group inverse; coordinate negation for both built-in laws."""
        return -self._check(x)

    def dilate(self, t, x) -> np.ndarray:
        """Anisotropic dilation: coordinate i scales by t**weights[i]."""
        t = np.asarray(t, dtype=np.float64)
        if np.any(t <= 0):
            raise ValueError("dilation parameter must be positive")
        x = self._check(x)
        return x * np.asarray(t)[..., None] ** self.weights_array

    def left_translation_jacobian(self, x, y, h=1e-5) -> np.ndarray:
        """Finite-difference Jacobian of z -> x . z at z = y."""
        x, y = self._check(x), self._check(y)
        J = np.empty((self.dim, self.dim))
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = h
            J[:, j] = (self.multiply(x, y + e) - self.multiply(x, y - e)) / (2 * h)
        return J


def abelian(weights) -> GroupSpec:
    return GroupSpec(law="abelian", weights=tuple(float(w) for w in weights))


def heisenberg(n: int) -> GroupSpec:
    return GroupSpec(law="heisenberg", weights=(1.0,) * (2 * n) + (2.0,), n=n)


def group_from_config(cfg: dict) -> GroupSpec:
    """Build a group from ``{"law": "heisenberg", "n": 1}`` or
    ``{"law": "abelian", "weights": [1, 3]}``."""
    cfg = dict(cfg)
    law = cfg.pop("law", None)
    if law == "heisenberg":
        n = cfg.pop("n", 1)
        if cfg:
            raise ValueError(f"unknown group config keys: {sorted(cfg)}")
        return heisenberg(int(n))
    if law == "abelian":
        weights = cfg.pop("weights", None)
        if weights is None:
            raise ValueError("abelian group config requires 'weights'")
        if cfg:
            raise ValueError(f"unknown group config keys: {sorted(cfg)}")
        return abelian(weights)
    raise ValueError(f"unknown group law {law!r}")
