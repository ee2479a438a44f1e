"""Area under deformation, first and second variation, and constrained Rayleigh minimisation.

The quadratic form evaluated here is

    Q(phi) = sum_i theta_i [ int |grad phi_i|^2 - |A_i|^2 phi_i^2 ]
             - sum_i theta_i int_Gamma phi_i^2 H_Gamma . tau_i

over fields satisfying the compatible condition ``phi_i = W . nu_i`` on the
junction curve.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .errors import (
    ConstraintRankFailure,
    DegenerateImmersion,
    EigSolveFailure,
    IncompatibleField,
    NotCompactlySupported,
    NotMinimal,
    StepTooLarge,
)
from .fields import (
    EPS_COMP,
    JunctionScalarField,
    compatibility_solve,
    normals_on_gamma,
    sheet_vector_fields,
    smoothstep,
)
from .geometry import (
    DEFAULT_GRID,
    EPS_IMM,
    gauss_legendre,
    gradient_from_partials,
    param_partials,
    sample_patch,
    shape_quantities,
)
from .junction import (
    DEFAULT_GAMMA_SAMPLES,
    MultiJunctionSurface,
    check_minimal,
    conormal,
    distance_to_gamma,
    write_table_csv,
)

MIN_TOL = 1e-6


# --------------------------------------------------------------------------
# variation fields
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class VariationField:
    """Per-sheet vector field ``V_i(u, v)`` deforming ``x -> x + t V``."""

    per_sheet: tuple
    compact: bool = True
    support: str = ""

    @classmethod
    def ambient(cls, M: MultiJunctionSurface, f, window=True, support="window"):
        """``V = f(x) w_i`` with ``w_i`` the standard support window of each sheet."""
        out = []
        for i, patch in enumerate(M.sheets):
            w = support_window(M, i) if window else None

            def Vi(u, v, patch=patch, w=w):
                u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
                val = np.asarray(f(patch.immersion(u, v)), float) + np.zeros(u.shape + (3,))
                return val if w is None else val * w(u, v)[..., None]
            out.append(Vi)
        return cls(tuple(out), compact=bool(window), support=support if window else "none")

    def normal_to_gamma(self, M: MultiJunctionSurface, width: float):
        """Remove the curve-tangent part of ``V`` within distance ``width`` of the junction."""
        out = []
        for i, Vi in enumerate(self.per_sheet):
            def Wi(u, v, i=i, Vi=Vi):
                u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
                val = Vi(u, v)
                eta = M.curve.tangent(M.foot_t(i, u, v))
                b = smoothstep(1.0 + distance_to_gamma(M, i, u, v) / width)
                return val - (b * np.einsum("...i,...i", val, eta))[..., None] * eta
            out.append(Wi)
        return VariationField(tuple(out), self.compact, self.support + "+normal")

    def scalar_field(self, M):
        from .fields import field_from_vector
        return field_from_vector(M, self)


def support_window(M: MultiJunctionSurface, i: int):
    """Window equal to 1 on the junction (away from its ends) and vanishing on free edges.

    Transverse factor ``(1 - s^2)^3`` with ``s`` the normalised coordinate from
    the junction edge to the opposite edge (omitted when that edge is
    collapsed or itself a junction); along an open curve an extra factor
    ``(1 - xi^2)^3`` of the normalised curve parameter.
    """
    patch = M.sheets[i]
    e = patch.junction_edge
    free = set(patch.free_edges())
    opp = {"u0": "u1", "u1": "u0", "v0": "v1", "v1": "v0"}[e]
    (u0, u1), (v0, v1) = patch.domain
    t0, t1 = M.curve.t_range
    line = M.curve.topology == "line"

    def w(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        out = np.ones(u.shape)
        if opp in free:
            x, a, b = (u, u0, u1) if e[0] == "u" else (v, v0, v1)
            s = (x - a) / (b - a) if e.endswith("0") else (b - x) / (b - a)
            out = out * (1.0 - s**2) ** 3
        if line:
            xi = 2.0 * (M.foot_t(i, u, v) - t0) / (t1 - t0) - 1.0
            out = out * (1.0 - np.clip(xi, -1, 1) ** 2) ** 3
        return out

    return w


def _free_edge_points(patch, n=64):
    (u0, u1), (v0, v1) = patch.domain
    us, vs = np.linspace(u0, u1, n), np.linspace(v0, v1, n)
    pts = []
    for e in patch.free_edges():
        c = patch.edge_coordinate(e)
        pts.append((np.full(n, c), vs) if e[0] == "u" else (us, np.full(n, c)))
    return pts


def check_compact_support(M, V: VariationField, tol=1e-10):
    for patch, Vi in zip(M.sheets, V.per_sheet):
        for u, v in _free_edge_points(patch):
            if np.max(np.abs(Vi(u, v))) > tol:
                raise NotCompactlySupported(f"variation field does not vanish on a free edge of {patch.name}")


# --------------------------------------------------------------------------
# area and its variations
# --------------------------------------------------------------------------


class AreaFunctional:
    """Weighted area of ``M + tV`` on fixed quadrature nodes."""

    def __init__(self, M: MultiJunctionSurface, V, grid=DEFAULT_GRID):
        self.M = M
        self.theta = M.densities
        self.data = []
        for patch, Vi in zip(M.sheets, sheet_vector_fields(M, V)):
            s = sample_patch(patch, grid)
            Vu, Vv = param_partials(patch, Vi, s.u, s.v)
            self.data.append((s.weights, s.shape.Xu, s.shape.Xv, Vu, Vv, patch.name))

    def __call__(self, t: float) -> float:
        total = 0.0
        for th, (w, Xu, Xv, Vu, Vv, name) in zip(self.theta, self.data):
            n = np.linalg.norm(np.cross(Xu + t * Vu, Xv + t * Vv), axis=-1)
            if np.any(n < EPS_IMM):
                raise DegenerateImmersion(f"deformation degenerates {name} at t={t}")
            total += th * float(np.sum(w * n))
        return total


def area_under_variation(M: MultiJunctionSurface, V, t: float, grid=DEFAULT_GRID) -> float:
    """``sum_i theta_i Area(Sigma_i + t V)`` by tensor quadrature."""
    return AreaFunctional(M, V, grid)(t)


def _gamma_integral(M, fn, n_gamma):
    t, w = M.curve.samples(n_gamma)
    return float(sum(th * np.sum(w * fn(i, t)) for i, th in enumerate(M.densities)))


def first_variation(M: MultiJunctionSurface, V, grid=DEFAULT_GRID, n_gamma=DEFAULT_GAMMA_SAMPLES) -> float:
    """``-sum theta_i int V . H_i + sum theta_i int_Gamma V . tau_i``."""
    Vs = sheet_vector_fields(M, V)
    interior = 0.0
    for th, patch, Vi in zip(M.densities, M.sheets, Vs):
        s = sample_patch(patch, grid)
        interior -= th * float(np.sum(s.dA * np.einsum("...i,...i", Vi(s.u, s.v), s.shape.H)))

    def bnd(i, t):
        u, v = M.edge_params(i, t)
        return np.einsum("...i,...i", Vs[i](u, v), conormal(M, i, t))

    return interior + _gamma_integral(M, bnd, n_gamma)


def second_variation_fd_oracle(M: MultiJunctionSurface, V: VariationField, steps=(0.02, 0.01),
                               grid=DEFAULT_GRID, rel_tol=1e-3, check_support=True):
    """Central second difference of the area in ``t`` with one Richardson step.

    Returns ``(value, error_estimate)``; raises :class:`StepTooLarge` when the
    estimate exceeds ``rel_tol * |value|``.
    """
    if check_support:
        check_compact_support(M, V)
    A = AreaFunctional(M, V, grid)
    a0 = A(0.0)

    def d2(h):
        return (A(h) - 2.0 * a0 + A(-h)) / (h * h)

    h1, h2 = steps
    D1, D2 = d2(h1), d2(h2)
    ratio = (h1 / h2) ** 2
    value = (ratio * D2 - D1) / (ratio - 1.0)
    err = abs(D2 - D1) / (ratio - 1.0)
    if err > rel_tol * abs(value):
        raise StepTooLarge(f"Richardson error {err:.3e} exceeds {rel_tol:g}*|{value:.6g}|")
    return value, err


# --------------------------------------------------------------------------
# the stability form
# --------------------------------------------------------------------------


def _assert_minimal(M, grid, n_gamma, tol):
    rep = check_minimal(M, grid, n_gamma)
    if max(rep.max_H) > tol or rep.max_conormal_sum > tol:
        raise NotMinimal(f"{M.name}: max|H| = {max(rep.max_H):.2e}, |sum theta tau| = {rep.max_conormal_sum:.2e}")


def stability_terms(M: MultiJunctionSurface, phi: JunctionScalarField, grid=DEFAULT_GRID,
                    n_gamma=DEFAULT_GAMMA_SAMPLES):
    """Per-sheet Dirichlet, potential and junction terms of ``Q`` (density weighted)."""
    t, wt = M.curve.samples(n_gamma)
    Hg = M.curve.curvature(t)
    out = []
    for i, (th, patch) in enumerate(zip(M.densities, M.sheets)):
        s = sample_patch(patch, grid)
        f = phi.value(i, s.u, s.v)
        fu, fv = phi.gradient_partials(patch, i, s.u, s.v)
        _, g2 = gradient_from_partials(s.shape, fu, fv)
        dirichlet = float(np.sum(s.dA * g2))
        potential = float(np.sum(s.dA * s.shape.normA2 * f**2))
        u, v = M.edge_params(i, t)
        tr = phi.value(i, u, v)
        htau = np.einsum("ni,ni->n", Hg, conormal(M, i, t))
        junction = float(np.sum(wt * tr**2 * htau))
        out.append({"dirichlet": th * dirichlet, "potential": th * potential, "junction": th * junction})
    return out


def stability_form(M: MultiJunctionSurface, phi: JunctionScalarField, grid=DEFAULT_GRID,
                   n_gamma=DEFAULT_GAMMA_SAMPLES, check=True, eps_comp=EPS_COMP, min_tol=MIN_TOL) -> float:
    """Evaluate ``Q(phi)``; with ``check`` the minimality and compatibility preconditions are enforced."""
    if check:
        _assert_minimal(M, DEFAULT_GRID, DEFAULT_GAMMA_SAMPLES, min_tol)
        comp = compatibility_solve(M, phi, n_gamma, eps_comp=eps_comp)
        scale = max(1.0, float(np.max(np.abs(comp.traces)))) if comp.traces.size else 1.0
        if comp.residual > eps_comp * scale:
            raise IncompatibleField(f"compatibility residual {comp.residual:.3e} exceeds {eps_comp:g}")
    terms = stability_terms(M, phi, grid, n_gamma)
    return float(sum(d["dirichlet"] - d["potential"] - d["junction"] for d in terms))


# --------------------------------------------------------------------------
# polynomial / trigonometric bases
# --------------------------------------------------------------------------


def legendre_with_derivative(x, n):
    """``P_0..P_n`` and their derivatives at ``x``; shape ``(..., n + 1)``."""
    x = np.asarray(x, dtype=float)
    P = np.zeros(x.shape + (n + 1,))
    dP = np.zeros_like(P)
    P[..., 0] = 1.0
    if n >= 1:
        P[..., 1] = x
        dP[..., 1] = 1.0
    for k in range(1, n):
        P[..., k + 1] = ((2 * k + 1) * x * P[..., k] - k * P[..., k - 1]) / (k + 1)
        dP[..., k + 1] = dP[..., k - 1] + (2 * k + 1) * P[..., k]
    return P, dP


@dataclass(frozen=True)
class BasisSpec:
    """Per-sheet tensor basis.

    Legendre polynomials up to ``degree`` in each non-periodic coordinate,
    Fourier modes up to ``fourier`` (default ``degree``) in a periodic one,
    Zernike-like ``x^m P_j(2x^2-1)`` on polar discs, all multiplied by a
    window vanishing linearly on free edges.
    """

    degree: int = 8
    fourier: Optional[int] = None
    active_sheets: Optional[tuple] = None
    quad: Optional[tuple] = None

    @property
    def kmax(self):
        return self.degree if self.fourier is None else self.fourier

    def quadrature(self):
        if self.quad is not None:
            return tuple(self.quad)
        return (max(64, 4 * self.kmax + 8), max(32, 2 * self.degree + 12))


class SheetBasis:
    def __init__(self, patch, spec: BasisSpec):
        self.patch = patch
        self.spec = spec
        d, K = spec.degree, spec.kmax
        self.polar = patch.periodic_u and patch.collapsed_edge == "v0"
        self.free = set(patch.free_edges())
        if patch.periodic_u:
            self.umodes = [(0, 0)] + [(m, s) for m in range(1, K + 1) for s in (0, 1)]
        else:
            self.umodes = list(range(d + 1))
        self.vdeg = d
        self.size = len(self.umodes) * (d + 1)

    def _xi(self):
        (u0, u1), (v0, v1) = self.patch.domain
        return u0, u1, v0, v1

    def evaluate(self, u, v):
        """Values and parameter derivatives, each of shape ``(N, size)``."""
        u = np.asarray(u, float).ravel()
        v = np.asarray(v, float).ravel()
        u0, u1, v0, v1 = self._xi()
        Lu, Lv = u1 - u0, v1 - v0
        d = self.vdeg
        # u factors
        if self.patch.periodic_u:
            om = 2 * np.pi / Lu
            cols, dcols, ms = [], [], []
            for m, s in self.umodes:
                a = m * om * (u - u0)
                if s == 0:
                    cols.append(np.cos(a))
                    dcols.append(-m * om * np.sin(a))
                else:
                    cols.append(np.sin(a))
                    dcols.append(m * om * np.cos(a))
                ms.append(m)
            Uf, dUf = np.stack(cols, -1), np.stack(dcols, -1)
        else:
            xu = 2 * (u - u0) / Lu - 1
            Uf, dUf = legendre_with_derivative(xu, d)
            dUf = dUf * 2 / Lu
            ms = [0] * len(self.umodes)
        # v factors
        if self.polar:
            x = (v - v0) / Lv
            P, dP = legendre_with_derivative(2 * x**2 - 1, d)
            Vfs, dVfs = {}, {}
            for m in sorted(set(ms)):
                xm = x**m
                dxm = m * x ** (m - 1) if m > 0 else np.zeros_like(x)
                Vfs[m] = xm[:, None] * P
                dVfs[m] = (dxm[:, None] * P + xm[:, None] * dP * (4 * x)[:, None]) / Lv
        else:
            xv = 2 * (v - v0) / Lv - 1
            Pv, dPv = legendre_with_derivative(xv, d)
            dPv = dPv * 2 / Lv
        # window
        W = np.ones_like(u)
        Wu = np.zeros_like(u)
        Wv = np.zeros_like(u)
        lin = {
            "u0": ((u - u0) / Lu, 1 / Lu, 0.0),
            "u1": ((u1 - u) / Lu, -1 / Lu, 0.0),
            "v0": ((v - v0) / Lv, 0.0, 1 / Lv),
            "v1": ((v1 - v) / Lv, 0.0, -1 / Lv),
        }
        for e in sorted(self.free):
            f, fu, fv = lin[e]
            Wu = Wu * f + W * fu
            Wv = Wv * f + W * fv
            W = W * f
        B, Bu, Bv = [], [], []
        for k in range(len(self.umodes)):
            if self.polar:
                Vf, dVf = Vfs[ms[k]], dVfs[ms[k]]
            else:
                Vf, dVf = Pv, dPv
            uk, duk = Uf[:, k : k + 1], dUf[:, k : k + 1]
            B.append(uk * Vf * W[:, None])
            Bu.append(duk * Vf * W[:, None] + uk * Vf * Wu[:, None])
            Bv.append(uk * dVf * W[:, None] + uk * Vf * Wv[:, None])
        return np.concatenate(B, 1), np.concatenate(Bu, 1), np.concatenate(Bv, 1)

    def nodes(self):
        nu, nv = self.spec.quadrature()
        (u0, u1), (v0, v1) = self.patch.domain
        if self.patch.periodic_u:
            xu = u0 + (u1 - u0) * (np.arange(nu) + 0.5) / nu
            wu = np.full(nu, (u1 - u0) / nu)
        else:
            xu, wu = gauss_legendre(nu, u0, u1)
        xv, wv = gauss_legendre(nv, v0, v1)
        U, V = np.meshgrid(xu, xv, indexing="ij")
        return U.ravel(), V.ravel(), np.outer(wu, wv).ravel()


class JunctionBasis:
    """Concatenated sheet bases with global coefficient vector."""

    def __init__(self, M: MultiJunctionSurface, spec: BasisSpec):
        self.M = M
        self.spec = spec
        active = range(M.q) if spec.active_sheets is None else spec.active_sheets
        self.sheet_bases = [SheetBasis(p, spec) if i in active else None for i, p in enumerate(M.sheets)]
        sizes = [0 if b is None else b.size for b in self.sheet_bases]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        self.size = int(self.offsets[-1])

    def block(self, i):
        return slice(self.offsets[i], self.offsets[i + 1])

    def traces(self, t):
        """Trace matrices ``(n_t, size_i)`` per sheet."""
        out = []
        for i, b in enumerate(self.sheet_bases):
            if b is None:
                out.append(np.zeros((len(t), 0)))
                continue
            u, v = self.M.edge_params(i, t)
            out.append(b.evaluate(u, v)[0])
        return out

    def field(self, coeffs, name="phi*") -> JunctionScalarField:
        coeffs = np.asarray(coeffs, float)
        funcs, parts = [], []
        for i, b in enumerate(self.sheet_bases):
            if b is None:
                funcs.append(lambda u, v: 0.0 * np.asarray(u, float))
                parts.append(lambda u, v: (0.0 * np.asarray(u, float), 0.0 * np.asarray(u, float)))
                continue
            c = coeffs[self.block(i)]

            def f(u, v, b=b, c=c):
                u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
                return (b.evaluate(u, v)[0] @ c).reshape(u.shape)

            def df(u, v, b=b, c=c):
                u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
                _, Bu, Bv = b.evaluate(u, v)
                return (Bu @ c).reshape(u.shape), (Bv @ c).reshape(u.shape)

            funcs.append(f)
            parts.append(df)
        return JunctionScalarField(funcs, parts, smoothness="C^inf (piecewise polynomial)", name=name)


def assemble_forms(basis: JunctionBasis, n_gamma=DEFAULT_GAMMA_SAMPLES):
    """Symmetric stiffness ``Q`` and mass ``Mass`` matrices of the basis."""
    M = basis.M
    n = basis.size
    Q = np.zeros((n, n))
    Mass = np.zeros((n, n))
    t, wt = M.curve.samples(n_gamma)
    Hg = M.curve.curvature(t)
    for i, b in enumerate(basis.sheet_bases):
        if b is None:
            continue
        th = M.densities[i]
        U, V, w = b.nodes()
        sh = shape_quantities(b.patch, U, V)
        B, Bu, Bv = b.evaluate(U, V)
        dA = w * sh.area_element
        gi = sh.metric_inv
        K = (
            Bu.T @ ((dA * gi[:, 0, 0])[:, None] * Bu)
            + Bu.T @ ((dA * gi[:, 0, 1])[:, None] * Bv)
            + Bv.T @ ((dA * gi[:, 1, 0])[:, None] * Bu)
            + Bv.T @ ((dA * gi[:, 1, 1])[:, None] * Bv)
        )
        P = B.T @ ((dA * sh.normA2)[:, None] * B)
        Ms = B.T @ (dA[:, None] * B)
        u, v = M.edge_params(i, t)
        Bt = b.evaluate(u, v)[0]
        htau = np.einsum("ni,ni->n", Hg, conormal(M, i, t))
        J = Bt.T @ ((wt * htau)[:, None] * Bt)
        sl = basis.block(i)
        Q[sl, sl] = th * (K - P - J)
        Mass[sl, sl] = th * Ms
    return 0.5 * (Q + Q.T), 0.5 * (Mass + Mass.T)


def constraint_matrix(basis: JunctionBasis, t, null_tol=1e-10):
    """Rows ``c . (trace_1, ..., trace_q)`` for every left-null vector ``c`` of the normal matrix."""
    M = basis.M
    N = normals_on_gamma(M, t)  # (n, q, 3)
    traces = basis.traces(t)
    rows = []
    for k in range(len(t)):
        Uk, s, _ = np.linalg.svd(N[k])
        r = int(np.sum(s > null_tol * max(s[0], 1e-300)))
        for c in Uk[:, r:].T:
            row = np.zeros(basis.size)
            for i in range(M.q):
                row[basis.block(i)] = c[i] * traces[i][k]
            rows.append(row)
    return np.array(rows).reshape(len(rows), basis.size)


def default_constraint_samples(basis: JunctionBasis, factor=4):
    M = basis.M
    tf, _ = M.curve.samples(512)
    T = np.concatenate(basis.traces(tf), axis=1)
    dim = int(np.linalg.matrix_rank(T, tol=1e-10 * max(1.0, np.abs(T).max()))) if T.size else 0
    n = max(factor * dim, 1)
    if M.curve.topology == "closed":
        return M.curve.samples(n)[0]
    t0, t1 = M.curve.t_range
    return gauss_legendre(n, float(t0), float(t1))[0]


@dataclass
class StabilityReport:
    name: str
    degree: int
    lambda_min: float
    eigenvalues: list
    Q_certificate: float
    certificate_mass: float
    certificate_ok: bool
    basis_size: int
    constraint_count: int
    constraint_rank: int
    reduced_dim: int
    quadrature: list
    n_gamma: int
    clamp_counts: dict = field(default_factory=dict)
    coefficients: Optional[np.ndarray] = None
    certificate: Optional[JunctionScalarField] = None
    trace_t: Optional[np.ndarray] = None
    traces: Optional[np.ndarray] = None

    @property
    def unstable(self):
        return self.lambda_min < -MIN_TOL

    def to_dict(self):
        return {
            "name": self.name,
            "degree": self.degree,
            "lambda_min": self.lambda_min,
            "eigenvalues": list(self.eigenvalues),
            "Q_certificate": self.Q_certificate,
            "certificate_mass": self.certificate_mass,
            "certificate_ok": self.certificate_ok,
            "basis_size": self.basis_size,
            "constraint_count": self.constraint_count,
            "constraint_rank": self.constraint_rank,
            "reduced_dim": self.reduced_dim,
            "quadrature": list(self.quadrature),
            "n_gamma": self.n_gamma,
            "clamp_counts": dict(self.clamp_counts),
            "unstable": self.unstable,
        }

    def write_traces_csv(self, path):
        cols = {"t": self.trace_t}
        for i in range(self.traces.shape[1]):
            cols[f"phi{i}"] = self.traces[:, i]
        write_table_csv(cols, path)


def minimize_rayleigh(M: MultiJunctionSurface, basis_spec: BasisSpec = BasisSpec(), constraint_samples=None,
                      n_gamma=DEFAULT_GAMMA_SAMPLES, n_eig=4, verify=True, min_tol=MIN_TOL,
                      rank_tol=1e-9, mass_tol=1e-12) -> StabilityReport:
    """Minimise ``Q(phi) / sum theta_i int phi_i^2`` over compatible basis combinations.

    The compatible condition is collocated at ``constraint_samples`` (default:
    four times the numerical trace dimension) and eliminated through an
    orthonormal null-space basis, which keeps the reduced eigenproblem
    symmetric. The minimising field is re-evaluated by direct quadrature at
    doubled resolution.
    """
    _assert_minimal(M, DEFAULT_GRID, DEFAULT_GAMMA_SAMPLES, min_tol)
    basis = JunctionBasis(M, basis_spec)
    if isinstance(constraint_samples, (int, np.integer)):
        ts = M.curve.samples(int(constraint_samples))[0]
    elif constraint_samples is None:
        ts = default_constraint_samples(basis)
    else:
        ts = np.asarray(constraint_samples, float)
    C = constraint_matrix(basis, ts)
    if C.shape[0]:
        scale = max(1.0, float(np.abs(C).max()))
        _, s, Vt = np.linalg.svd(C, full_matrices=True)
        rank = int(np.sum(s > rank_tol * scale))
        Z = Vt[rank:].T
    else:
        rank = 0
        Z = np.eye(basis.size)
    if Z.shape[1] == 0:
        raise ConstraintRankFailure(
            f"no basis combination satisfies the {C.shape[0]} compatibility constraints (basis size {basis.size})"
        )
    Q, Mass = assemble_forms(basis, n_gamma)
    try:
        Qr = Z.T @ Q @ Z
        Mr = Z.T @ Mass @ Z
        mu, S = np.linalg.eigh(0.5 * (Mr + Mr.T))
        keep = mu > mass_tol * max(mu.max(), 1e-300)
        if not np.any(keep):
            raise ConstraintRankFailure("reduced mass matrix vanishes")
        T = S[:, keep] / np.sqrt(mu[keep])
        Qt = T.T @ Qr @ T
        lam, Y = np.linalg.eigh(0.5 * (Qt + Qt.T))
    except np.linalg.LinAlgError as exc:
        raise EigSolveFailure(str(exc)) from exc
    if not np.all(np.isfinite(lam)):
        raise EigSolveFailure("non-finite eigenvalues")
    coeffs = Z @ (T @ Y[:, 0])
    j = int(np.argmax(np.abs(coeffs)))
    if coeffs[j] < 0:
        coeffs = -coeffs
    phi = basis.field(coeffs)
    q_cert, m_cert, ok = float("nan"), float("nan"), True
    if verify:
        nu, nv = basis_spec.quadrature()
        grid2 = (2 * nu, 2 * nv)
        q_cert = stability_form(M, phi, grid=grid2, n_gamma=2 * n_gamma, check=True, min_tol=min_tol)
        m_cert = 0.0
        for i, (th, patch) in enumerate(zip(M.densities, M.sheets)):
            s = sample_patch(patch, grid2)
            m_cert += th * float(np.sum(s.dA * phi.value(i, s.u, s.v) ** 2))
        ok = (q_cert < 0) if lam[0] < -min_tol else True
    tt, _ = M.curve.samples(n_gamma)
    traces = np.stack([phi.value(i, *M.edge_params(i, tt)) for i in range(M.q)], -1)
    return StabilityReport(
        name=M.name,
        degree=basis_spec.degree,
        lambda_min=float(lam[0]),
        eigenvalues=[float(x) for x in lam[:n_eig]],
        Q_certificate=q_cert,
        certificate_mass=m_cert,
        certificate_ok=bool(ok),
        basis_size=basis.size,
        constraint_count=int(C.shape[0]),
        constraint_rank=rank,
        reduced_dim=int(T.shape[1]),
        quadrature=list(basis_spec.quadrature()),
        n_gamma=int(n_gamma),
        coefficients=coeffs,
        certificate=phi,
        trace_t=tt,
        traces=traces,
    )
