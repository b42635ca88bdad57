"""Homogeneous quasi-norms: evaluation, axiom checks, triangle and
equivalence constant estimation.

Built-in kinds: euclidean (unit weights only), max-weighted
max_i |x_i|^(1/nu_i), sum-weighted (sum_i |x_i|^(rho/nu_i))^(1/rho) with an
even exponent rho, and the Koranyi gauge ((|a|^2+|b|^2)^2 + c t^2)^(1/4) on
Heisenberg groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, rng
from ._kernels import NORM_EUCLIDEAN, NORM_KORANYI, NORM_MAX, NORM_SUM
from .groups import GroupSpec

__all__ = [
    "QuasiNorm", "euclidean_norm", "max_norm", "sum_norm", "koranyi_norm",
    "norm_from_config", "check_axioms", "triangle_constant_estimate",
    "equivalence_constants", "rescale_to_unit_sphere",
]

_KIND_CODES = {
    "euclidean": NORM_EUCLIDEAN,
    "max": NORM_MAX,
    "sum": NORM_SUM,
    "koranyi": NORM_KORANYI,
}


def _default_sum_rho(weights) -> int:
    # even, at least twice the largest weight, small enough to stay smooth
    rho = 2 * math.ceil(max(weights))
    if rho % 2:
        rho += 1
    return min(max(rho, 2), 12)


@dataclass(frozen=True)
class QuasiNorm:
    """A homogeneous quasi-norm bound to a group."""

    kind: str
    group: GroupSpec
    param: float = 0.0            # rho for "sum", gauge constant c for "koranyi"
    is_triangle: bool = False     # declared; verified by triangle_constant_estimate

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise ValueError(f"unknown quasi-norm kind {self.kind!r}")
        if self.kind == "euclidean" and any(w != 1.0 for w in self.group.weights):
            raise ValueError("euclidean norm requires unit dilation weights")
        if self.kind == "koranyi":
            if self.group.law != "heisenberg":
                raise ValueError("koranyi gauge is defined on Heisenberg groups")
            if self.param <= 0:
                raise ValueError("koranyi gauge constant must be positive")
        if self.kind == "sum":
            rho = self.param
            if rho < 2 * max(self.group.weights) or int(rho) % 2:
                raise ValueError("sum norm needs an even rho >= 2*max(weights)")

    @property
    def kind_code(self) -> int:
        return _KIND_CODES[self.kind]

    def __call__(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        r = _kernels.norm_batch(x, self.kind_code, self.group.weights_array,
                                self.param)
        return float(r[0]) if single else r

    def unit_ball_halfwidths(self) -> np.ndarray:
        """Per-coordinate halfwidths of a box containing the unit ball."""
        N = self.group.dim
        h = np.ones(N)
        if self.kind == "koranyi":
            h[-1] = self.param ** -0.5
        return h

    def ball_box_halfwidths(self, R: float) -> np.ndarray:
        # B(0,R) = D_R B(0,1): coordinate i scales by R**nu_i
        return self.unit_ball_halfwidths() * R ** self.group.weights_array


def euclidean_norm(g: GroupSpec) -> QuasiNorm:
    return QuasiNorm("euclidean", g, is_triangle=True)


def max_norm(g: GroupSpec) -> QuasiNorm:
    # |x_i + y_i|^(1/nu) <= |x_i|^(1/nu) + |y_i|^(1/nu) needs nu >= 1
    return QuasiNorm("max", g, is_triangle=all(w >= 1 for w in g.weights))


def sum_norm(g: GroupSpec, rho: int | None = None) -> QuasiNorm:
    if rho is None:
        rho = _default_sum_rho(g.weights)
    triangle = all(w == 1 for w in g.weights) and rho == 2
    return QuasiNorm("sum", g, param=float(rho), is_triangle=triangle)


def koranyi_norm(g: GroupSpec, c: float = 16.0) -> QuasiNorm:
    # c = 16 is the gauge constant for which this is a true norm under the
    # polarized law with 1/2 (a1.b2 - b1.a2) drift
    return QuasiNorm("koranyi", g, param=float(c), is_triangle=(c == 16.0))


def norm_from_config(cfg: dict, g: GroupSpec) -> QuasiNorm:
    """Build a norm from ``{"kind": "koranyi", "c": 16}`` style config."""
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    if kind == "euclidean":
        out = euclidean_norm(g)
    elif kind == "max":
        out = max_norm(g)
    elif kind == "sum":
        out = sum_norm(g, cfg.pop("rho", None))
    elif kind == "koranyi":
        out = koranyi_norm(g, cfg.pop("c", 16.0))
    else:
        raise ValueError(f"unknown norm kind {kind!r}")
    if cfg:
        raise ValueError(f"unknown norm config keys: {sorted(cfg)}")
    return out


# ------------------------------------------------------------------ sampling


def _random_points(g: GroupSpec, samples: int, seed: int, salt: str,
                   radius_range=(1e-2, 1e2)) -> np.ndarray:
    """Random points spread over many scales: unit-box directions dilated
    by a log-uniform radius."""
    u = rng.uniform_blocks(seed, rng.salt_of(salt), samples, g.dim + 1)
    dirs = 2.0 * u[:, : g.dim] - 1.0
    lo, hi = radius_range
    t = lo * (hi / lo) ** u[:, g.dim]
    return dirs * t[:, None] ** g.weights_array


def check_axioms(norm: QuasiNorm, samples: int = 10_000, seed: int = 0) -> dict:
    """Max relative violation of symmetry, homogeneity and definiteness.

    Returns a dict with per-axiom violations; all should sit at rounding
    level for the built-in norms.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    g = norm.group
    x = _random_points(g, samples, seed, "axioms:x", radius_range=(1e-1, 1e1))
    r = norm(x)
    r_inv = norm(g.inverse(x))
    symmetry = float(np.max(np.abs(r - r_inv) / np.where(r > 0, r, 1.0)))

    u = rng.uniform_blocks(seed, rng.salt_of("axioms:t"), samples, 1)[:, 0]
    t = 1e-2 * (1e4) ** u
    r_dil = norm(g.dilate(t, x))
    homogeneity = float(np.max(np.abs(r_dil - t * r) / np.where(t * r > 0, t * r, 1.0)))

    origin = float(norm(g.identity()))
    positive = float(np.min(r[np.any(x != 0, axis=1)])) if samples else 0.0
    return {
        "symmetry": symmetry,
        "homogeneity": homogeneity,
        "value_at_origin": origin,
        "min_off_origin": positive,
        "samples": samples,
        "seed": seed,
    }


def triangle_constant_estimate(norm: QuasiNorm, samples: int = 100_000,
                               seed: int = 0) -> float:
    """Empirical sup of |x . y| / (|x| + |y|) over random pairs."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    g = norm.group
    x = _random_points(g, samples, seed, "tri:x")
    y = _random_points(g, samples, seed, "tri:y")
    num = norm(g.multiply(x, y))
    den = norm(x) + norm(y)
    ok = den > 0
    return float(np.max(num[ok] / den[ok]))


def rescale_to_unit_sphere(norm: QuasiNorm, x, tol: float = 1e-12,
                           max_iter: int = 120):
    """Dilate x onto the unit sphere of ``norm`` by bisection in the
    dilation parameter.  Accepts a point or a batch; returns (points, t)."""
    g = norm.group
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    r = np.atleast_1d(norm(X))
    if np.any(r == 0):
        raise ValueError("cannot rescale the origin onto the unit sphere")
    lo, hi = 0.5 / r, 2.0 / r
    for _ in range(80):
        bad = np.atleast_1d(norm(g.dilate(lo, X))) > 1.0
        if not np.any(bad):
            break
        lo[bad] *= 0.5
    for _ in range(80):
        bad = np.atleast_1d(norm(g.dilate(hi, X))) < 1.0
        if not np.any(bad):
            break
        hi[bad] *= 2.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        below = np.atleast_1d(norm(g.dilate(mid, X))) < 1.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= tol * hi):
            break
    t = 0.5 * (lo + hi)
    out = g.dilate(t, X)
    if single:
        return out[0], float(t[0])
    return out, t


def equivalence_constants(n1: QuasiNorm, n2: QuasiNorm, samples: int = 20_000,
                          seed: int = 0) -> tuple[float, float]:
    """Empirical (inf, sup) of n1(x)/n2(x) over the unit sphere of n1.

    Directions are random points rescaled onto the n1 sphere by bisection;
    the ratio is 0-homogeneous, so the constants sandwich n1 by n2
    everywhere: c_low * n2(x) <= n1(x) <= c_high * n2(x).
    """
    if n1.group != n2.group:
        raise ValueError("norms must live on the same group")
    g = n1.group
    x = _random_points(g, samples, seed, "equiv:x", radius_range=(0.5, 2.0))
    x = x[(n1(x) > 0) & (n2(x) > 0)]
    xs, _ = rescale_to_unit_sphere(n1, x)
    ratio = n1(xs) / n2(xs)
    return float(np.min(ratio)), float(np.max(ratio))
