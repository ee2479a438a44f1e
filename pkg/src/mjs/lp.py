"""Both sides of the L^p curvature estimates and the ingredients of their proof.

For ``p > 1`` and a compatible field ``phi`` the terms are

    LHS = sum theta_i int |A_i|^{2p} |phi_i|^{2p}
    I   = sum theta_i int |grad phi_i|^2 |A_i|^{2p-2} |phi_i|^{2p-2}
    II  = sum theta_i int_Gamma (p-1)/2 |tau_i(log|A_i|)| |A_i|^{2p-2} |phi_i|^{2p}
    III = sum theta_i int_Gamma H_Gamma . tau_i |A_i|^{2p-2} |phi_i|^{2p}

with ``RHS = C I + II - III`` (variant ``eq7``) or
``RHS = C1 int |grad phi|^{2p} + C2 (2 II - III)`` (variant ``eq8``). Flat
sheets contribute nothing to II and III.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import ExponentOutOfRange, ZeroAngleField
from .fields import JunctionScalarField, cutoff_rho, normals_on_gamma, smoothstep
from .geometry import DEFAULT_GRID, gradient_from_partials, param_partials, sample_patch, shape_quantities
from .junction import (
    DEFAULT_GAMMA_SAMPLES,
    MultiJunctionSurface,
    conormal,
    distance_to_gamma,
    equilibrium_angles_check,
)

EPS_A = 1e-12
P_RANGE = {"eq7": (1.0, 1.5), "eq8": (1.0, 1.25)}


@dataclass(frozen=True)
class LpParams:
    """Parameters of one L^p evaluation.

    ``W0`` is either ``{"angle": a}`` (angle in the normal plane measured from
    the conormal of sheet 0 towards ``eta x tau_0``) or ``{"vector": [x, y, z]}``
    (a constant vector projected onto the normal plane of the curve).
    """

    p: float = 1.1
    C: float = 3.0
    C1: float = 12.0
    C2: float = 4.0
    variant: str = "eq7"
    eps_A: float = EPS_A
    r: float = 4.0
    W0: dict = field(default_factory=lambda: {"vector": [0.0, 0.0, 1.0]})
    rotate_90: bool = False
    perturbation: float = 1e-3

    def __post_init__(self):
        if self.variant not in P_RANGE:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not self.p > 1:
            raise ExponentOutOfRange(f"p = {self.p} must exceed 1")
        if not (self.C > 0 and self.C1 > 0 and self.C2 > 0):
            raise ValueError("constants must be positive")
        if not self.r > 2:
            raise ValueError("cutoff radius r must exceed 2")
        if not self.eps_A > 0:
            raise ValueError("eps_A must be positive")
        if set(self.W0) - {"angle", "vector"} or len(self.W0) != 1:
            raise ValueError("W0 must be {'angle': a} or {'vector': [x, y, z]}")

    def check_range(self):
        lo, hi = P_RANGE[self.variant]
        if not lo < self.p < hi:
            raise ExponentOutOfRange(f"p = {self.p} outside ({lo}, {hi}) for {self.variant}")


# --------------------------------------------------------------------------
# curvature along the junction
# --------------------------------------------------------------------------


def boundary_A(M: MultiJunctionSurface, i: int, t):
    """``|A_i|`` at the junction."""
    u, v = M.edge_params(i, np.asarray(t, float))
    return np.sqrt(shape_quantities(M.sheets[i], u, v).normA2)


def _tau_log_A(M, i, t, eps_A):
    patch = M.sheets[i]
    t = np.asarray(t, float)
    if patch.flat:
        return np.zeros(t.shape), 0
    u, v = M.edge_params(i, t)
    sh = shape_quantities(patch, u, v)
    clamps = int(np.sum(np.sqrt(sh.normA2) < eps_A))

    def logA(uu, vv):
        return np.log(np.maximum(np.sqrt(shape_quantities(patch, uu, vv).normA2), eps_A))

    fu, fv = param_partials(patch, logA, u, v)
    grad, _ = gradient_from_partials(sh, fu, fv)
    return np.einsum("...i,...i", grad, conormal(M, i, t)), clamps


def tau_log_A(M: MultiJunctionSurface, i: int, t, eps_A=EPS_A):
    """Derivative of ``log|A_i|`` along the outer conormal at the junction.

    One-sided differences into the sheet, ``|A|`` clamped below by ``eps_A``;
    flat sheets give 0.
    """
    return _tau_log_A(M, i, t, eps_A)[0]


def boundary_g(M: MultiJunctionSurface, i: int, t):
    """``g_i = prod_{j != i, Sigma_j not flat} |A_j|`` along the junction (empty product = 1)."""
    t = np.asarray(t, float)
    g = np.ones(t.shape)
    for j, patch in enumerate(M.sheets):
        if j != i and not patch.flat:
            g = g * boundary_A(M, j, t)
    return g


def extend_g(M: MultiJunctionSurface, i: int, g_boundary=None):
    """Positive extension of junction data ``g(t)`` into sheet ``i``.

    ``G = b(d) g(foot) + 1 - b(d)`` with ``b(d) = eta(1 + d)``: equal to ``g``
    on the junction, to 1 once ``d >= 1``, and positive wherever ``d > 0``
    or ``g(foot) > 0``.
    """
    gb = (lambda t: boundary_g(M, i, t)) if g_boundary is None else g_boundary

    def G(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        b = smoothstep(1.0 + distance_to_gamma(M, i, u, v))
        gf = np.asarray(gb(M.foot_t(i, u, v)), float)
        return b * gf + (1.0 - b)

    return G


# --------------------------------------------------------------------------
# the vector field W0 and the test function
# --------------------------------------------------------------------------


def _rotate_normal(M, t, W, angle):
    eta = M.curve.tangent(t)
    return np.cos(angle) * W + np.sin(angle) * np.cross(eta, W)


def _base_W0(M, params: LpParams):
    spec = params.W0
    if "angle" in spec:
        a = float(spec["angle"])

        def W(t):
            tau0 = conormal(M, 0, t)
            return np.cos(a) * tau0 + np.sin(a) * np.cross(M.curve.tangent(t), tau0)
        return W
    vec = np.asarray(spec["vector"], float)

    def W(t):
        eta = M.curve.tangent(t)
        return vec - np.einsum("...i,i->...", eta, vec)[..., None] * eta
    return W


def build_W0(M: MultiJunctionSurface, params: LpParams, samples=DEFAULT_GAMMA_SAMPLES, zero_tol=1e-6):
    """The junction field actually used: possibly perturbed, possibly rotated by 90 deg.

    The perturbation (``params.perturbation`` radians in the normal plane) is
    applied when any ``W0 . nu_i`` or ``(eta x W0) . nu_i`` nearly vanishes, so
    that both the field and its rotation avoid zero angles.
    Returns ``(W, info)`` with ``W`` a callable of ``t``.
    """
    base = _base_W0(M, params)
    t, _ = M.curve.samples(samples)
    N = normals_on_gamma(M, t)

    def coeffs(Wf):
        W = Wf(t)
        scale = max(float(np.max(np.linalg.norm(W, axis=-1))), 1e-300)
        return np.einsum("nk,nik->ni", W, N) / scale

    rot = lambda Wf: (lambda tt: np.cross(M.curve.tangent(tt), Wf(tt)))
    c0, c0r = coeffs(base), coeffs(rot(base))
    degenerate = bool(np.any(np.abs(c0) < zero_tol) or np.any(np.abs(c0r) < zero_tol))
    W0 = base
    perturbed = False
    if degenerate and params.perturbation > 0:
        W0 = lambda tt: _rotate_normal(M, tt, base(tt), params.perturbation)
        perturbed = True
    W = rot(W0) if params.rotate_90 else W0
    c = coeffs(W)
    if np.any(np.abs(c) < zero_tol):
        raise ZeroAngleField("some c_i = W0 . nu_i vanishes; choose or perturb W0")
    return W, {"perturbed": perturbed, "degenerate_input": degenerate}


def ssy_coefficients(M, W, t):
    """``c_i(t) = W(t) . nu_i(t)``, shape ``(n, q)``."""
    return np.einsum("nk,nik->ni", W(t), normals_on_gamma(M, t))


class SSYTestFunction(JunctionScalarField):
    """Test function ``sign(c_i)|c_i|^{1/p} (rho_1 G_i^{(p-1)/p} + rho_r - rho_1)`` with its metadata."""

    def __init__(self, funcs, M, params, W, info):
        super().__init__(funcs, smoothness="C^1", name="ssy")
        self.M = M
        self.params = params
        self.W = W
        self.info = info

    def identity_residual(self, samples=DEFAULT_GAMMA_SAMPLES):
        """Max misfit of ``sign(phi_i)|A_i|^{p-1}|phi_i|^p = (prod_j |A_j|^{p-1}) c_i`` on the junction.

        Flat sheets enter both sides with ``|A| = 1``.
        """
        lhs, rhs, _ = self.identity_sides(samples)
        return float(np.max(np.abs(lhs - rhs)))

    def identity_sides(self, samples=DEFAULT_GAMMA_SAMPLES):
        M, p = self.M, self.params.p
        t, _ = M.curve.samples(samples)
        Aeff = np.stack([np.ones(t.shape) if s.flat else boundary_A(M, i, t) for i, s in enumerate(M.sheets)], -1)
        phi = np.stack([self.value(i, *M.edge_params(i, t)) for i in range(M.q)], -1)
        lhs = np.sign(phi) * Aeff ** (p - 1) * np.abs(phi) ** p
        rhs = np.prod(Aeff ** (p - 1), axis=-1, keepdims=True) * ssy_coefficients(M, self.W, t)
        return lhs, rhs, t

    def psi_field(self):
        """``sign(phi_i)|A_i|^{p-1}|phi_i|^p`` as a junction field (flat sheets use ``|A| = 1``)."""
        M, p = self.M, self.params.p
        funcs = []
        for i, patch in enumerate(M.sheets):
            def f(u, v, i=i, patch=patch):
                ph = self.value(i, u, v)
                A = 1.0 if patch.flat else np.sqrt(shape_quantities(patch, u, v).normA2)
                return np.sign(ph) * A ** (p - 1) * np.abs(ph) ** p
            funcs.append(f)
        return JunctionScalarField(funcs, name="psi")


def build_ssy_test_function(M: MultiJunctionSurface, params: LpParams, require_equilibrium=True):
    """The proof's test function for junctions with equilibrium angles."""
    if require_equilibrium and not equilibrium_angles_check(M).is_equilibrium:
        raise ValueError(f"{M.name} does not have equilibrium angles")
    W, info = build_W0(M, params)
    p, r = params.p, params.r
    funcs = []
    for i in range(M.q):
        G = extend_g(M, i)

        def f(u, v, i=i, G=G):
            u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
            tf = M.foot_t(i, u, v)
            c = ssy_coefficients(M, W, tf.ravel())[:, i].reshape(u.shape)
            rho1 = cutoff_rho(M, i, u, v, 1.0)
            rhor = cutoff_rho(M, i, u, v, r)
            return np.sign(c) * np.abs(c) ** (1.0 / p) * (rho1 * G(u, v) ** ((p - 1.0) / p) + rhor - rho1)
        funcs.append(f)
    return SSYTestFunction(funcs, M, params, W, info)


# --------------------------------------------------------------------------
# the two sides of the estimate
# --------------------------------------------------------------------------


@dataclass
class LpReport:
    variant: str
    p: float
    r: float
    LHS: float
    RHS: float
    I: float
    II: float
    III: float
    grad_2p: float
    I1: float
    I2: float
    ratio: Optional[float]
    per_sheet: list
    clamp_counts: dict
    flat_zero_hits: int
    max_abs_tau_log_A: float
    profiles: dict = field(default_factory=dict, repr=False)

    def to_dict(self):
        d = {k: getattr(self, k) for k in (
            "variant", "p", "r", "LHS", "RHS", "I", "II", "III", "grad_2p", "I1", "I2", "ratio",
            "per_sheet", "clamp_counts", "flat_zero_hits", "max_abs_tau_log_A")}
        d["finite"] = self.finite
        return d

    @property
    def finite(self):
        return bool(np.all(np.isfinite([self.LHS, self.RHS, self.I, self.II, self.III, self.grad_2p])))


def lp_sides(M: MultiJunctionSurface, phi: JunctionScalarField, params: LpParams, grid=DEFAULT_GRID,
             n_gamma=DEFAULT_GAMMA_SAMPLES, split=2.0) -> LpReport:
    """Left side and right-side terms of the chosen L^p estimate.

    ``I1``/``I2`` split ``int |grad phi|^{2p}`` at ``d_Gamma = split``.
    """
    params.check_range()
    p = params.p
    t, wt = M.curve.samples(n_gamma)
    Hg = M.curve.curvature(t)
    tot = dict(LHS=0.0, I=0.0, II=0.0, III=0.0, grad_2p=0.0, I1=0.0, I2=0.0)
    per_sheet, profiles = [], {"t": t}
    clamps = {"tau_log_A": 0, "interior": 0}
    flat_hits, max_tl = 0, 0.0
    for i, (th, patch) in enumerate(zip(M.densities, M.sheets)):
        s = sample_patch(patch, grid)
        f = phi.value(i, s.u, s.v)
        fu, fv = phi.gradient_partials(patch, i, s.u, s.v)
        _, g2 = gradient_from_partials(s.shape, fu, fv)
        A2 = s.shape.normA2
        af = np.abs(f)
        lhs = np.sum(s.dA * A2**p * af ** (2 * p))
        I = np.sum(s.dA * g2 * A2 ** (p - 1) * af ** (2 * p - 2))
        gp = s.dA * g2**p
        d = distance_to_gamma(M, i, s.u, s.v)
        I1, I2 = np.sum(gp[d < split]), np.sum(gp[d >= split])
        if patch.flat:
            II = III = 0.0
            flat_hits += 1
            prof_II = prof_III = np.zeros(t.shape)
        else:
            u, v = M.edge_params(i, t)
            Ab = boundary_A(M, i, t)
            tr = np.abs(phi.value(i, u, v))
            tl, nclamp = _tau_log_A(M, i, t, params.eps_A)
            clamps["tau_log_A"] += nclamp
            max_tl = max(max_tl, float(np.max(np.abs(tl))))
            weight = Ab ** (2 * p - 2) * tr ** (2 * p)
            prof_II = 0.5 * (p - 1) * np.abs(tl) * weight
            prof_III = np.einsum("ni,ni->n", Hg, conormal(M, i, t)) * weight
            II, III = np.sum(wt * prof_II), np.sum(wt * prof_III)
        profiles[f"II_{i}"] = th * prof_II
        profiles[f"III_{i}"] = th * prof_III
        sheet = {"LHS": lhs, "I": I, "II": II, "III": III, "grad_2p": I1 + I2, "I1": I1, "I2": I2}
        per_sheet.append({k: float(th * v) for k, v in sheet.items()})
        for k, v in sheet.items():
            tot[k] += float(th * v)
    if params.variant == "eq7":
        rhs = params.C * tot["I"] + tot["II"] - tot["III"]
    else:
        rhs = params.C1 * tot["grad_2p"] + params.C2 * (2.0 * tot["II"] - tot["III"])
    ratio = tot["LHS"] / rhs if rhs != 0 else None
    return LpReport(
        variant=params.variant, p=p, r=params.r, LHS=tot["LHS"], RHS=float(rhs), I=tot["I"], II=tot["II"],
        III=tot["III"], grad_2p=tot["grad_2p"], I1=tot["I1"], I2=tot["I2"], ratio=ratio, per_sheet=per_sheet,
        clamp_counts=clamps, flat_zero_hits=flat_hits, max_abs_tau_log_A=max_tl, profiles=profiles,
    )


# --------------------------------------------------------------------------
# boundary curvature inequality
# --------------------------------------------------------------------------


class WhiteCheck(NamedTuple):
    boundary_term: float
    total_curvature: float
    holds: bool
    applicable: bool
    band_height: Optional[float]


def white_inequality_check(M: MultiJunctionSurface, i: int, grid=DEFAULT_GRID,
                           n_gamma=DEFAULT_GAMMA_SAMPLES, eps=1e-8):
    """``int_Gamma -H_Gamma . tau_i`` against ``int_{Sigma_i} -K``.

    The inequality concerns non-compact sheets; a truncated sheet stands in for
    one when it has a free edge. Sheets without free edges are reported as not
    applicable.
    """
    patch = M.sheets[i]
    t, wt = M.curve.samples(n_gamma)
    bnd = float(np.sum(wt * -np.einsum("ni,ni->n", M.curve.curvature(t), conormal(M, i, t))))
    s = sample_patch(patch, grid)
    total = float(np.sum(s.dA * -s.shape.K))
    (_, _), (v0, v1) = patch.domain
    return WhiteCheck(bnd, total, bnd <= total + eps, not patch.compact, float(v1 - v0))
