"""Scalar fields on a junction surface, their traces and the compatible condition."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NonFiniteIntegrand
from .geometry import evaluate_frame, param_partials
from .junction import DEFAULT_GAMMA_SAMPLES, MultiJunctionSurface, distance_to_gamma, write_table_csv

EPS_COMP = 1e-8


def smoothstep(t):
    """Cutoff profile: 1 for ``t <= 1``, 0 for ``t >= 2``, cubic in between."""
    s = np.clip(np.asarray(t, dtype=float) - 1.0, 0.0, 1.0)
    return 1.0 - 3.0 * s**2 + 2.0 * s**3


def smoothstep_prime(t):
    t = np.asarray(t, dtype=float)
    s = t - 1.0
    return np.where((s > 0) & (s < 1), -6.0 * s + 6.0 * s**2, 0.0)


class JunctionScalarField:
    """One scalar function ``phi_i(u, v)`` per sheet.

    ``partials[i]``, when given, returns analytic ``(d_u phi_i, d_v phi_i)``;
    otherwise derivatives are taken by finite differences on the sheet.
    """

    def __init__(self, funcs: Sequence[Callable], partials: Optional[Sequence] = None,
                 smoothness="C^inf", name="phi"):
        self.funcs = tuple(funcs)
        self.partials = tuple(partials) if partials is not None else (None,) * len(self.funcs)
        self.smoothness = smoothness
        self.name = name

    @property
    def q(self):
        return len(self.funcs)

    def value(self, i, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return np.asarray(self.funcs[i](u, v), dtype=float) + np.zeros(u.shape)

    def gradient_partials(self, patch, i, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        if self.partials[i] is not None:
            fu, fv = self.partials[i](u, v)
            return np.asarray(fu, float) + np.zeros(u.shape), np.asarray(fv, float) + np.zeros(u.shape)
        return param_partials(patch, self.funcs[i], u, v)

    def _combine(self, other, a, b):
        funcs = [
            (lambda u, v, f=f, g=g: a * f(u, v) + b * g(u, v)) for f, g in zip(self.funcs, other.funcs)
        ]
        if all(p is not None for p in self.partials + other.partials):
            parts = []
            for p, r in zip(self.partials, other.partials):
                def d(u, v, p=p, r=r):
                    pu, pv = p(u, v)
                    ru, rv = r(u, v)
                    return a * pu + b * ru, a * pv + b * rv
                parts.append(d)
        else:
            parts = None
        return JunctionScalarField(funcs, parts, self.smoothness, self.name)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, a):
        a = float(a)
        funcs = [(lambda u, v, f=f: a * f(u, v)) for f in self.funcs]
        parts = None
        if all(p is not None for p in self.partials):
            parts = [(lambda u, v, p=p: tuple(a * x for x in p(u, v))) for p in self.partials]
        return JunctionScalarField(funcs, parts, self.smoothness, self.name)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    @classmethod
    def constant(cls, values):
        funcs = [(lambda u, v, c=float(c): c + 0.0 * np.asarray(u, float)) for c in values]
        zero = [(lambda u, v: (0.0 * np.asarray(u, float), 0.0 * np.asarray(u, float))) for _ in values]
        return cls(funcs, zero, name="const")

    @classmethod
    def zero(cls, q):
        return cls.constant([0.0] * q)


def boundary_trace(M: MultiJunctionSurface, phi: JunctionScalarField, i: int, t):
    """``phi_i`` evaluated at the junction edge point identified with ``t``."""
    u, v = M.edge_params(i, np.asarray(t, dtype=float))
    val = phi.value(i, u, v)
    if not np.all(np.isfinite(val)):
        raise NonFiniteIntegrand(f"trace of {phi.name} on sheet {i} is not finite")
    return val


def trace_table(M, phi, t):
    return np.stack([boundary_trace(M, phi, i, t) for i in range(M.q)], -1)


def normals_on_gamma(M: MultiJunctionSurface, t):
    """Unit normals of all sheets at the junction, shape ``(n, q, 3)``."""
    out = []
    for i, patch in enumerate(M.sheets):
        u, v = M.edge_params(i, t)
        out.append(evaluate_frame(patch, u, v)[3])
    return np.stack(out, axis=-2)


def normal_plane_basis(M: MultiJunctionSurface, t):
    """Orthonormal pair spanning the normal plane of the curve, shape ``(n, 3, 2)``."""
    eta = M.curve.tangent(t)
    helper = np.where(np.abs(eta[..., 2:3]) < 0.9, np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
    e1 = helper - np.einsum("...i,...i", helper, eta)[..., None] * eta
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(eta, e1)
    return np.stack([e1, e2], -1)


@dataclass
class CompatibilityResult:
    t: np.ndarray
    W: np.ndarray
    traces: np.ndarray
    residual: float
    pointwise_residual: np.ndarray
    rank: np.ndarray
    rank_deficient: bool
    compatible: bool

    def to_dict(self):
        return {
            "residual": float(self.residual),
            "compatible": bool(self.compatible),
            "rank_deficient": bool(self.rank_deficient),
            "min_rank": int(self.rank.min()) if len(self.rank) else 0,
            "n_samples": int(len(self.t)),
        }

    def write_csv(self, path):
        cols = {"t": self.t}
        for k, ax in enumerate("xyz"):
            cols[f"W_{ax}"] = self.W[:, k]
        for i in range(self.traces.shape[1]):
            cols[f"trace{i}"] = self.traces[:, i]
        cols["residual"] = self.pointwise_residual
        write_table_csv(cols, path)


def compatibility_solve(M: MultiJunctionSurface, phi: JunctionScalarField, samples=DEFAULT_GAMMA_SAMPLES,
                        normal_plane=False, eps_comp=EPS_COMP, rank_tol=1e-10):
    """Least-squares ``W(t)`` with ``W . nu_i = phi_i`` at each sample.

    Returns the minimum-norm minimiser (pseudoinverse) and the largest
    pointwise misfit. The rank flag is raised when the normals span fewer than
    ``min(2, q)`` directions: every sheet normal is orthogonal to the curve, so
    two is the generic maximum.
    """
    t = np.asarray(samples, dtype=float) if np.ndim(samples) else M.curve.samples(int(samples))[0]
    f = trace_table(M, phi, t)  # (n, q)
    N = normals_on_gamma(M, t)  # (n, q, 3)
    if normal_plane:
        P = normal_plane_basis(M, t)  # (n, 3, 2)
        A = N @ P
    else:
        A = N
    pinv = np.linalg.pinv(A, rcond=rank_tol)
    c = np.einsum("nij,nj->ni", pinv, f)
    W = np.einsum("nij,nj->ni", P, c) if normal_plane else c
    mis = np.max(np.abs(np.einsum("nij,nj->ni", A, c) - f), axis=-1) if len(t) else np.zeros(0)
    sv = np.linalg.svd(A, compute_uv=False)
    rank = np.sum(sv > rank_tol * np.maximum(sv[..., :1], 1e-300), axis=-1)
    res = float(np.max(mis)) if len(mis) else 0.0
    return CompatibilityResult(
        t=t, W=W, traces=f, residual=res, pointwise_residual=mis, rank=rank,
        rank_deficient=bool(np.any(rank < min(2, M.q))), compatible=res <= eps_comp,
    )


def sheet_vector_fields(M: MultiJunctionSurface, V):
    """Normalise a vector field description to per-sheet callables ``(u, v) -> (..., 3)``.

    ``V`` may be a callable on ambient positions, a sequence of per-sheet
    callables, or any object exposing ``per_sheet``.
    """
    if hasattr(V, "per_sheet"):
        return list(V.per_sheet)
    if callable(V):
        return [(lambda u, v, X=patch.immersion: np.asarray(V(X(u, v)), float)) for patch in M.sheets]
    return list(V)


def field_from_vector(M: MultiJunctionSurface, V, name="V.nu") -> JunctionScalarField:
    """``phi_i = V . nu_i`` on every sheet."""
    funcs = []
    for patch, Vi in zip(M.sheets, sheet_vector_fields(M, V)):
        def f(u, v, patch=patch, Vi=Vi):
            u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
            nu = evaluate_frame(patch, u, v)[3]
            return np.einsum("...i,...i", np.asarray(Vi(u, v), float) + np.zeros(nu.shape), nu)
        funcs.append(f)
    return JunctionScalarField(funcs, name=name)


def cutoff_rho(M: MultiJunctionSurface, i: int, u, v, r: float):
    """``rho_r = eta(d_Gamma / r)`` at parameter points of sheet ``i``."""
    if not r > 0:
        raise ValueError("cutoff radius must be positive")
    return smoothstep(distance_to_gamma(M, i, u, v) / r)


def cutoff_field(M: MultiJunctionSurface, r: float) -> JunctionScalarField:
    """The cutoff ``rho_r`` as a junction field, with chain-rule derivatives."""
    funcs, parts = [], []
    for i, patch in enumerate(M.sheets):
        funcs.append(lambda u, v, i=i: cutoff_rho(M, i, u, v, r))

        def d(u, v, i=i, patch=patch):
            dist = lambda uu, vv: distance_to_gamma(M, i, uu, vv)
            du, dv = param_partials(patch, dist, u, v)
            k = smoothstep_prime(distance_to_gamma(M, i, u, v) / r) / r
            return k * du, k * dv
        parts.append(d)
    return JunctionScalarField(funcs, parts, smoothness="C^1", name=f"rho_{r:g}")
