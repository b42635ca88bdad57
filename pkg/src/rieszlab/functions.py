"""Test functions: anisotropic Gaussians, ball/annulus indicators,
regularized power decay, conformal profiles.

Each function knows how to evaluate itself on batches of points, how it
transforms under dilation (every kind is dilation-closed), and what its
tail looks like, which drives truncation radii and analytic tail
corrections in the integration engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .groups import GroupSpec
from .norms import QuasiNorm

__all__ = [
    "TestFunction", "gaussian", "ball_indicator", "power_decay",
    "conformal_profile", "function_from_config", "standard_family",
]


@dataclass(frozen=True)
class TestFunction:
    """One member of the test family.

    kind "gaussian":  amp * exp(-sum_i ((x-c)_i / sigma_i)^(2/nu_i))
    kind "ball":      amp * indicator(r_inner < |x| <= radius)
    kind "power":     amp * (delta^2 + |x|^2)^(-decay/2)
    kind "conformal": amp * (scale^2 + |x|^2)^(-gamma), i.e. power with
                      decay = 2*gamma, delta = scale
    Norm-dependent kinds ("ball", "power", "conformal") are radial in the
    quasi-norm attached at evaluation time.
    """

    kind: str
    amp: float = 1.0
    sigma: tuple[float, ...] = ()
    center: tuple[float, ...] = ()
    radius: float = 1.0
    r_inner: float = 0.0
    decay: float = 0.0
    delta: float = 1.0
    sigma_group: GroupSpec | None = None   # gaussian evaluation needs weights

    def __call__(self, pts, norm: QuasiNorm | None = None,
                 norms=None) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        if self.kind == "gaussian":
            nu = np.asarray(self.sigma_group.weights_array)
            z = pts - np.asarray(self.center)
            e = np.sum(np.abs(z / np.asarray(self.sigma)) ** (2.0 / nu), axis=1)
            return self.amp * np.exp(-e)
        if norms is None:
            if norm is None:
                raise ValueError(f"{self.kind} function needs a quasi-norm")
            norms = norm(pts)
        r = np.atleast_1d(norms)
        if self.kind == "ball":
            return self.amp * ((r > self.r_inner) & (r <= self.radius))
        # power / conformal
        return self.amp * (self.delta ** 2 + r ** 2) ** (-self.decay / 2.0)

    def dilated(self, t: float) -> "TestFunction":
        """The function x -> f(D_t x); every kind stays in family."""
        if self.kind == "gaussian":
            nu = self.sigma_group.weights_array
            return replace(
                self,
                sigma=tuple(s / t ** w for s, w in zip(self.sigma, nu)),
                center=tuple(c / t ** w for c, w in zip(self.center, nu)),
            )
        if self.kind == "ball":
            return replace(self, radius=self.radius / t,
                           r_inner=self.r_inner / t)
        # (d^2 + |D_t x|^2)^(-s/2) = t^(-s) ((d/t)^2 + |x|^2)^(-s/2)
        return replace(self, delta=self.delta / t,
                       amp=self.amp * t ** -self.decay)

    def scaled(self, c: float) -> "TestFunction":
        return replace(self, amp=self.amp * c)

    # ---- truncation control -------------------------------------------

    def core_radius(self) -> float:
        """Quasi-norm radius beyond which the function is negligible
        (for power tails: where the tail correction takes over)."""
        if self.kind == "gaussian":
            # exponent reaches ~30 at |x_i| = sigma_i 30^(nu_i/2), i.e. at
            # quasi-norm radius ~ sqrt(30) sigma_i^(1/nu_i)
            nu = self.sigma_group.weights_array
            r = max(float(5.5 * s ** (1.0 / w)) for s, w in zip(self.sigma, nu))
            if any(self.center):
                r += max(float(abs(c)) ** (1.0 / w)
                         for c, w in zip(self.center, nu))
            return r
        if self.kind == "ball":
            return self.radius
        return 8.0 * self.delta

    def tail_exponent(self) -> float | None:
        """s such that f ~ amp |x|^(-s) at infinity; None if superpolynomial
        decay (gaussian) or compact support (ball)."""
        if self.kind in ("gaussian", "ball"):
            return None
        return self.decay

    def mass_is_finite(self, p: float, weight_power: float, Q: float) -> bool:
        """Whether int |f|^p |x|^w dx converges (tail side)."""
        s = self.tail_exponent()
        return s is None or s * p - weight_power > Q


def gaussian(g: GroupSpec, sigma, center=None, amp: float = 1.0) -> TestFunction:
    sigma = tuple(float(s) for s in np.broadcast_to(sigma, (g.dim,)))
    center = tuple(float(c) for c in (center if center is not None
                                      else np.zeros(g.dim)))
    return TestFunction("gaussian", amp=amp, sigma=sigma, center=center,
                        sigma_group=g)


def ball_indicator(radius: float, amp: float = 1.0,
                   r_inner: float = 0.0) -> TestFunction:
    return TestFunction("ball", amp=amp, radius=float(radius),
                        r_inner=float(r_inner))


def power_decay(decay: float, delta: float = 0.5, amp: float = 1.0) -> TestFunction:
    if delta <= 0:
        raise ValueError("power decay needs a positive regularization delta")
    return TestFunction("power", amp=amp, decay=float(decay), delta=float(delta))


def conformal_profile(gamma: float, scale: float = 1.0,
                      amp: float = 1.0) -> TestFunction:
    return TestFunction("conformal", amp=amp, decay=2.0 * float(gamma),
                        delta=float(scale))


def function_from_config(cfg: dict, g: GroupSpec) -> TestFunction:
    """Build from config like ``{"kind": "gaussian", "sigma": [1, 1]}``."""
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    amp = float(cfg.pop("amp", 1.0))
    if kind == "gaussian":
        out = gaussian(g, cfg.pop("sigma", 1.0), cfg.pop("center", None), amp)
    elif kind == "ball":
        out = ball_indicator(cfg.pop("R", 1.0), amp, cfg.pop("r_inner", 0.0))
    elif kind == "power":
        out = power_decay(cfg.pop("s"), cfg.pop("delta", 0.5), amp)
    elif kind == "conformal":
        out = conformal_profile(cfg.pop("gamma"), cfg.pop("scale", 1.0), amp)
    else:
        raise ValueError(f"unknown test function kind {kind!r}")
    if cfg:
        raise ValueError(f"unknown function config keys: {sorted(cfg)}")
    return out


def standard_family(g: GroupSpec, p: float, alpha: float,
                    seed: int = 7) -> list[TestFunction]:
    """The 50-function verification family: 20 gaussians with varied
    anisotropic scales and centers, 10 ball indicators, 10 regularized
    power-decay profiles, 10 conformal profiles.

    Decay exponents are chosen above the membership floor Q/p + alpha so
    every member has finite weighted L^p norm.
    """
    rng_ = np.random.default_rng(seed)
    Q = g.homogeneous_dimension
    fam: list[TestFunction] = []
    for _ in range(20):
        sig = rng_.uniform(0.6, 1.8, g.dim)
        center = np.zeros(g.dim)
        if rng_.random() < 0.5:
            center = rng_.uniform(-1.5, 1.5, g.dim)
        fam.append(gaussian(g, sig, center, amp=rng_.uniform(0.5, 2.0)))
    for _ in range(10):
        fam.append(ball_indicator(rng_.uniform(0.5, 2.5),
                                  amp=rng_.uniform(0.5, 2.0)))
    floor = Q / p + alpha
    for _ in range(10):
        fam.append(power_decay(floor + rng_.uniform(0.75, 2.5),
                               delta=rng_.uniform(0.4, 1.2),
                               amp=rng_.uniform(0.5, 2.0)))
    for _ in range(10):
        gamma = 0.5 * (floor + rng_.uniform(0.75, 2.5))
        fam.append(conformal_profile(gamma, scale=rng_.uniform(0.5, 1.5),
                                     amp=rng_.uniform(0.5, 2.0)))
    return fam
