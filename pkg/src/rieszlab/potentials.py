"""Riesz-type potentials: convolution with |x|^(-lam), L^p norms, kernel
split norms, superlevel-set measures, and the bilinear pairing.

The convolution I u(x) = int u(y) |y^{-1} x|^{-lam} dy is evaluated with a
three-part rule:

  * an analytic frozen-coefficient term u(x) |S| eps^(Q-lam)/(Q-lam) for the
    ball |y^{-1} x| <= eps,
  * a translated node cloud on dyadic shells eps < |w| <= r0 around the
    singularity (w = y^{-1} x), with the kernel absorbed into the node
    weights, evaluating u at x . w^{-1},
  * origin-stratified far samples for |y^{-1} x| > r0, shared across eval
    points and test functions, plus an analytic remainder for power tails.

All sampling is deterministic given the spec seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .functions import TestFunction
from .groups import GroupSpec
from .norms import QuasiNorm
from .quadrature import (AnnulusIntegral, DivergenceError, QuadratureSpec,
                         RegionSamples, cached_sphere_measure, dyadic_samples,
                         power_annulus_integral, sample_window)

__all__ = [
    "KernelSplit", "NearRule", "build_near_rule", "build_far_sampler",
    "potential_on_points", "riesz_potential", "lp_norm",
    "weighted_potential_norm", "split_near_l1_norm", "split_far_lp_norm",
    "superlevel_measures", "bilinear_pairing", "PotentialNorm",
]

_ROW_CHUNK = 2048
_COL_CHUNK = 8192


# ---------------------------------------------------------------- kernel split


@dataclass(frozen=True)
class KernelSplit:
    """Truncation of |x|^(-order) at radius ``cutoff`` into a compactly
    supported part and a bounded tail part."""

    cutoff: float
    order: float

    def __post_init__(self):
        if self.cutoff <= 0:
            raise ValueError("cutoff must be positive")


def split_near_l1_norm(g: GroupSpec, n: QuasiNorm, split: KernelSplit,
                       spec: QuadratureSpec | None = None) -> AnnulusIntegral:
    """L^1 norm of the compact part: numeric value and the closed form
    |S| mu^(Q-lam) / (Q-lam)."""
    Q = g.homogeneous_dimension
    lam = split.order
    if not 0 < lam < Q:
        raise ValueError(f"kernel order must lie in (0, {Q})")
    return power_annulus_integral(g, n, Q - lam, 0.0, split.cutoff, spec)


def split_far_lp_norm(g: GroupSpec, n: QuasiNorm, split: KernelSplit, p: float,
                      spec: QuadratureSpec | None = None):
    """L^{p'} norm of the tail part with the closed form
    (|S|/(lam p' - Q))^(1/p') mu^(-Q/q); returns (result, q_induced).

    Divergent when lam p' <= Q.
    """
    Q = g.homogeneous_dimension
    lam = split.order
    pp = p / (p - 1.0)
    if lam * pp <= Q:
        return AnnulusIntegral(None, None, None, True,
                               "tail requires lam * p' > Q"), math.inf
    # (Q - lam p')/p' = -Q/q under the exponent balance
    q = -Q * pp / (Q - lam * pp)
    raw = power_annulus_integral(g, n, Q - lam * pp, split.cutoff, math.inf, spec)
    sigma = cached_sphere_measure(g, n)
    closed = (sigma / (lam * pp - Q)) ** (1.0 / pp) * split.cutoff ** (-Q / q)
    out = AnnulusIntegral(raw.numeric ** (1.0 / pp),
                          raw.numeric_err / pp * raw.numeric ** (1.0 / pp - 1.0),
                          closed)
    return out, q


# ------------------------------------------------------------------ near rule


@dataclass
class NearRule:
    """Quadrature rule for int_{eps<|w|<=r0} u(x . w^{-1}) |w|^{-lam} dw
    plus the analytic center coefficient for |w| <= eps."""

    nodes: np.ndarray          # (K, N)
    weights: np.ndarray        # (K,) kernel value times shell volume weight
    r_inner: float
    r_outer: float
    center_coef: float         # |S| eps^(Q-lam) / (Q - lam)


def build_near_rule(g: GroupSpec, n: QuasiNorm, lam: float, eps: float,
                    r0: float, spec: QuadratureSpec, salt: str = "") -> NearRule:
    Q = g.homogeneous_dimension
    if not 0 < lam < Q:
        raise ValueError(f"kernel order must lie in (0, {Q})")
    per_shell = 1 << 11
    samp = dyadic_samples(g, n, eps, r0, per_shell, spec.method, spec.seed,
                          f"near{salt}")
    w = samp.weights * samp.norms ** (-lam)
    sigma = cached_sphere_measure(g, n)
    coef = sigma * eps ** (Q - lam) / (Q - lam)
    return NearRule(samp.points, w, eps, r0, coef)


def build_far_sampler(g: GroupSpec, n: QuasiNorm, core: float, r_max: float,
                      spec: QuadratureSpec, salt: str = "") -> RegionSamples:
    """Origin-stratified samples covering B(0, r_max): a core ball plus
    dyadic shells, sized from the spec budget."""
    n_core = max(1 << 10, spec.samples)
    core_part = sample_window(g, n, 0.0, core, n.ball_box_halfwidths(core),
                              n_core, spec.method, spec.seed, f"far-core{salt}")
    if r_max <= core:
        return core_part
    n_shell = max(1 << 9, spec.samples // 8)
    shells = dyadic_samples(g, n, core, r_max, n_shell, spec.method, spec.seed,
                            f"far-shells{salt}")
    pts = np.concatenate([core_part.points, shells.points])
    w = np.concatenate([core_part.weights, shells.weights])
    r = np.concatenate([core_part.norms, shells.norms])
    return RegionSamples(pts, w, r, coverage_radius=r_max)


# ------------------------------------------------------------------- engine


def _power_tail_constant(g, n, f: TestFunction, lam: float, L: float) -> float:
    """Analytic int_{|y|>L} f(y) |y|^{-lam} dy for power-tail functions,
    assuming |x| << L so the kernel is ~ |y|^{-lam}."""
    s = f.tail_exponent()
    if s is None or math.isinf(L):
        return 0.0
    Q = g.homogeneous_dimension
    if s + lam - Q <= 0:
        raise DivergenceError("potential tail s + lam <= Q is not integrable")
    sigma = cached_sphere_measure(g, n)
    return f.amp * sigma * L ** (Q - s - lam) / (s + lam - Q)


def potential_on_points(g: GroupSpec, n: QuasiNorm, lam: float,
                        funcs: list[TestFunction], X, far: RegionSamples,
                        near: NearRule, alpha: float = 0.0,
                        zones: bool = False) -> np.ndarray:
    """Convolution values of |y|^{-alpha} f(y) against |y^{-1}x|^{-lam}.

    Returns (M, F) values, or (M, 3, F) split into the inner / middle /
    outer integration zones (|y| vs |x|/2, 2|x|) when ``zones`` is set.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    M, F = X.shape[0], len(funcs)
    xnorm = n(X)
    law, nh = g.law_code, g.n
    kc, nu, par = n.kind_code, g.weights_array, n.param

    # far sample values per function, with the alpha weight folded in
    fw = far.weights if alpha == 0.0 else far.weights * far.norms ** (-alpha)
    U = np.empty((len(far.points), F))
    for j, f in enumerate(funcs):
        U[:, j] = f(far.points, norm=n, norms=far.norms)
    U *= fw[:, None]

    zone_list = (1, 2, 3) if zones else (0,)
    out = np.zeros((M, len(zone_list), F))
    for zi, zone in enumerate(zone_list):
        for r0 in range(0, M, _ROW_CHUNK):
            r1 = min(r0 + _ROW_CHUNK, M)
            for c0 in range(0, len(far.points), _COL_CHUNK):
                c1 = min(c0 + _COL_CHUNK, len(far.points))
                K = _kernels.kernel_block(
                    X[r0:r1], xnorm[r0:r1], far.points[c0:c1],
                    far.norms[c0:c1], law, nh, kc, nu, par, lam,
                    d_min=near.r_outer, d_max=np.inf, zone=zone)
                out[r0:r1, zi] += K @ U[c0:c1]

    # near rule: evaluate u at x . w^{-1}; kernel absorbed in node weights
    if len(near.nodes):
        for c0 in range(0, len(near.nodes), 1 << 9):
            c1 = min(c0 + (1 << 9), len(near.nodes))
            Z, tn = _kernels.translate_norm_block(X, near.nodes[c0:c1],
                                                  law, nh, kc, nu, par)
            wts = near.weights[c0:c1]
            Zf = Z.reshape(-1, g.dim)
            tnf = tn.reshape(-1)
            aw = np.ones_like(tnf) if alpha == 0.0 else tnf ** (-alpha)
            for j, f in enumerate(funcs):
                vals = (f(Zf, norm=n, norms=tnf) * aw).reshape(tn.shape)
                if zones:
                    for zi, zone in enumerate((1, 2, 3)):
                        mk = _zone_mask(tn, xnorm, zone)
                        out[:, zi, j] += (vals * mk) @ wts
                else:
                    out[:, 0, j] += vals @ wts

    # frozen-coefficient center term; the ball |y^{-1}x|<=eps sits in the
    # middle zone whenever eps < |x|/2
    aw_x = np.ones(M) if alpha == 0.0 else np.where(xnorm > 0, xnorm, 1.0) ** (-alpha)
    zc = 1 if zones else 0
    for j, f in enumerate(funcs):
        out[:, zc, j] += f(X, norm=n, norms=xnorm) * aw_x * near.center_coef

    # analytic far tail |y| > coverage radius, kernel ~ |y|^{-lam}: outer zone
    if math.isfinite(far.coverage_radius):
        for j, f in enumerate(funcs):
            if f.tail_exponent() is not None and alpha == 0.0:
                out[:, -1 if zones else 0, j] += _power_tail_constant(
                    g, n, f, lam, far.coverage_radius)

    return out if zones else out[:, 0, :]


def _zone_mask(ynorm, xnorm, zone):
    if zone == 1:
        return ynorm <= 0.5 * xnorm[:, None]
    if zone == 2:
        return (ynorm > 0.5 * xnorm[:, None]) & (ynorm < 2.0 * xnorm[:, None])
    return ynorm >= 2.0 * xnorm[:, None]


def _engine_pieces(g, n, lam, funcs, spec, salt=""):
    core = max(f.core_radius() for f in funcs)
    r0 = max(0.5 * core, 16.0 * spec.singularity_radius)
    eps = min(spec.singularity_radius, 1e-2 * r0)
    near = build_near_rule(g, n, lam, eps, r0, spec, salt)
    has_power = any(f.tail_exponent() is not None for f in funcs)
    r_max = 4.0 * core if has_power else core
    far = build_far_sampler(g, n, core, max(r_max, spec.box_halfwidth), spec,
                            salt)
    return near, far


def riesz_potential(g: GroupSpec, n: QuasiNorm, lam: float, u: TestFunction,
                    x, spec: QuadratureSpec | None = None,
                    salt: str = "") -> tuple[np.ndarray | float, float]:
    """I u at one point or a batch of points, with a rough error estimate
    (center-term magnitude plus far-field batch spread)."""
    spec = spec or QuadratureSpec()
    Q = g.homogeneous_dimension
    if not 0 < lam < Q:
        raise ValueError(f"potential order must lie in (0, {Q})")
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    near, far = _engine_pieces(g, n, lam, [u], spec, salt)
    vals = potential_on_points(g, n, lam, [u], X, far, near)[:, 0]
    # error proxy: spread over 8 far-sample batches plus the center term
    xn = n(X)
    umax = float(np.max(np.abs(u(X, norm=n, norms=xn))))
    sub = []
    for k in range(8):
        fs = RegionSamples(far.points[k::8], far.weights[k::8] * 8.0,
                           far.norms[k::8], far.coverage_radius)
        sub.append(potential_on_points(g, n, lam, [u], X[:1], fs, near)[0, 0])
    err = float(np.std(sub) / math.sqrt(8)) + near.center_coef * umax
    if single:
        return float(vals[0]), err
    return vals, err


# ------------------------------------------------------------------- norms


def lp_norm(g: GroupSpec, n: QuasiNorm, u: TestFunction, p: float,
            spec: QuadratureSpec | None = None, weight_power: float = 0.0,
            salt: str = "") -> float:
    """(int |u(x)|^p |x|^w dx)^(1/p) by stratified quadrature with an
    analytic power-tail remainder.  Raises DivergenceError when the tail
    is not integrable."""
    spec = spec or QuadratureSpec()
    if p < 1:
        raise ValueError("p must be >= 1")
    Q = g.homogeneous_dimension
    if not u.mass_is_finite(p, weight_power, Q):
        raise DivergenceError(
            f"|u|^{p} |x|^{weight_power} has a non-integrable tail")
    core = u.core_radius()
    s = u.tail_exponent()
    r_max = core if s is None else core * min(
        1e4, max(8.0, 1e4 ** (1.0 / max(s * p - weight_power - Q, 0.25))))
    far = build_far_sampler(g, n, core, r_max, spec, f"lp{salt}")
    vals = np.abs(u(far.points, norm=n, norms=far.norms)) ** p
    if weight_power != 0.0:
        good = far.norms > 0
        vals = vals[good] * far.norms[good] ** weight_power
        w = far.weights[good]
    else:
        w = far.weights
    total = float(np.sum(vals * w))
    if s is not None:
        sigma = cached_sphere_measure(g, n)
        expo = s * p - weight_power
        total += u.amp ** p * sigma * r_max ** (Q - expo) / (expo - Q)
    return total ** (1.0 / p)


@dataclass
class PotentialNorm:
    """Weighted q-norm of a potential with share diagnostics."""

    value: float
    tail_share: float
    center_share: float
    eval_points: int


def weighted_potential_norm(g: GroupSpec, n: QuasiNorm, lam: float, q: float,
                            beta: float, funcs: list[TestFunction],
                            spec: QuadratureSpec, alpha: float = 0.0,
                            salt: str = "") -> list[PotentialNorm]:
    """|| |x|^{-beta} I(|y|^{-alpha} f) ||_q for each f, by stratified outer
    quadrature with analytic center and tail terms."""
    Q = g.homogeneous_dimension
    if not 0 < lam < Q:
        raise ValueError(f"potential order must lie in (0, {Q})")
    near, far = _engine_pieces(g, n, lam, funcs, spec, salt)
    core = max(f.core_radius() for f in funcs)

    # outer truncation from the slowest tail among the family
    tail_expos = []
    for f in funcs:
        s = f.tail_exponent()
        t = (lam + beta) * q - Q if s is None else (s + lam + beta + alpha - Q) * q - Q
        tail_expos.append(t)
    t_min = min(tail_expos)
    if t_min <= 0:
        raise DivergenceError("outer integrand tail is not integrable")
    margin = min(64.0, max(8.0, 1e3 ** (1.0 / t_min)))
    L_out = core * margin
    r_in = 0.02 * core
    if beta * q >= Q:
        raise DivergenceError("weight |x|^{-beta q} is not integrable at 0")

    per_shell = 1 << 9
    ev = dyadic_samples(g, n, r_in, L_out, per_shell, spec.method, spec.seed,
                        f"outer{salt}")
    vals = potential_on_points(g, n, lam, funcs, ev.points, far, near,
                               alpha=alpha)
    center_vals = potential_on_points(g, n, lam, funcs,
                                      np.zeros((1, g.dim)), far, near,
                                      alpha=alpha)[0]
    sigma = cached_sphere_measure(g, n)
    out = []
    for j, f in enumerate(funcs):
        G = np.abs(vals[:, j]) ** q * ev.norms ** (-beta * q)
        total = float(np.sum(G * ev.weights))
        center = abs(center_vals[j]) ** q * sigma * r_in ** (Q - beta * q) / (Q - beta * q)
        tail = 0.0
        if f.tail_exponent() is None and alpha == 0.0:
            # I ~ mass * |x|^{-lam} beyond the outer box
            m0 = float(np.sum(f(far.points, norm=n, norms=far.norms)
                              * far.weights))
            tail = abs(m0) ** q * sigma * L_out ** (Q - (lam + beta) * q) / (
                (lam + beta) * q - Q)
        full = total + center + tail
        out.append(PotentialNorm(full ** (1.0 / q),
                                 tail / full if full else 0.0,
                                 center / full if full else 0.0,
                                 len(ev.points)))
    return out


# ----------------------------------------------------------- weak-type tools


def superlevel_measures(g: GroupSpec, n: QuasiNorm, lam: float,
                        u: TestFunction, zeta_grid, spec: QuadratureSpec,
                        salt: str = "") -> list[tuple[float, float]]:
    """Measure of { x : |I u (x)| > zeta } over the truncation region, per
    zeta.  The region is the quasi-ball of radius spec.box_halfwidth,
    sampled with origin-stratified points so small superlevel sets near the
    origin and fat ones far out are both resolved."""
    near, far = _engine_pieces(g, n, lam, [u], spec, salt)
    L = spec.box_halfwidth
    ev = dyadic_samples(g, n, 0.02 * L, L, 1 << 10, spec.method, spec.seed,
                        f"superlevel{salt}")
    vals = np.abs(potential_on_points(g, n, lam, [u], ev.points, far, near)[:, 0])
    sigma = cached_sphere_measure(g, n)
    Q = g.homogeneous_dimension
    center_vol = sigma * (0.02 * L) ** Q / Q
    v0 = abs(potential_on_points(g, n, lam, [u], np.zeros((1, g.dim)),
                                 far, near)[0, 0])
    out = []
    for z in np.asarray(zeta_grid, dtype=np.float64):
        if z <= 0:
            raise ValueError("superlevel thresholds must be positive")
        m = float(np.sum(ev.weights[vals > z]))
        if v0 > z:
            m += center_vol
        out.append((float(z), m))
    return out


# ------------------------------------------------------------ bilinear form


def bilinear_pairing(g: GroupSpec, n: QuasiNorm, u: TestFunction,
                     h: TestFunction, lam: float, alpha: float, beta: float,
                     spec: QuadratureSpec, salt: str = "") -> float:
    """Double integral of u(y) h(x) / (|x|^beta |y^{-1}x|^lam |y|^alpha)."""
    Q = g.homogeneous_dimension
    if not 0 < lam < Q:
        raise ValueError(f"potential order must lie in (0, {Q})")
    near, far = _engine_pieces(g, n, lam, [u], spec, salt)
    core_h = h.core_radius()
    s = h.tail_exponent()
    r_max = core_h if s is None else 16.0 * core_h
    ev = build_far_sampler(g, n, core_h, r_max, spec, f"pair{salt}")
    inner = potential_on_points(g, n, lam, [u], ev.points, far, near,
                                alpha=alpha)[:, 0]
    hv = h(ev.points, norm=n, norms=ev.norms)
    good = ev.norms > 0
    bw = np.zeros(len(ev.points))
    bw[good] = ev.norms[good] ** (-beta)
    return float(np.sum(ev.weights * hv * bw * inner))
