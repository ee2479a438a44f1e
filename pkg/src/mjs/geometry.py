"""Pointwise differential geometry of a single parametric sheet.

All routines are vectorised: ``u`` and ``v`` may be scalars or broadcastable
arrays, and vector-valued results carry a trailing axis of length 3.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DegenerateImmersion, NonFiniteIntegrand, OutsideDomain, StepTooLarge

EPS_IMM = 1e-12
DEFAULT_GRID = (32, 32)
EDGES = ("u0", "u1", "v0", "v1")

# (offsets, weights) of the finite-difference stencils used throughout.
_D1 = {
    "central": (np.array([-2, -1, 1, 2]), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0),
    "forward": (np.array([0, 1, 2]), np.array([-3.0, 4.0, -1.0]) / 2.0),
    "backward": (np.array([0, -1, -2]), np.array([3.0, -4.0, 1.0]) / 2.0),
}
_D2 = {
    "central": (np.array([-2, -1, 0, 1, 2]), np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0),
    "forward": (np.array([0, 1, 2, 3]), np.array([2.0, -5.0, 4.0, -1.0])),
    "backward": (np.array([0, -1, -2, -3]), np.array([2.0, -5.0, 4.0, -1.0])),
}


class ParamPoint(NamedTuple):
    u: float
    v: float


@dataclass(frozen=True)
class Jet:
    """Immersion value and coordinate derivatives up to order two."""

    X: np.ndarray
    Xu: np.ndarray
    Xv: np.ndarray
    Xuu: np.ndarray
    Xuv: np.ndarray
    Xvv: np.ndarray

    def as_tuple(self):
        return (self.X, self.Xu, self.Xv, self.Xuu, self.Xuv, self.Xvv)


@dataclass(frozen=True, eq=False)
class ParametricPatch:
    """One immersed sheet over a parameter rectangle.

    Parameters
    ----------
    domain : ((u0, u1), (v0, v1))
        Parameter rectangle.
    immersion : callable
        ``immersion(u, v) -> (..., 3)``.
    jet : callable, optional
        Analytic ``jet(u, v) -> Jet``. When absent, central finite differences
        with step ``fd_step`` (default ``1e-5`` times the domain diameter) are
        used instead.
    junction_edge : {'u0', 'u1', 'v0', 'v1'} or None
        Domain edge mapped onto the junction curve.
    orientation_sign : {+1, -1}
        Multiplies ``X_u x X_v / |X_u x X_v|`` to give the unit normal.
    periodic_u : bool
        The ``u`` direction is periodic, so ``u0``/``u1`` are not edges.
    collapsed_edge : str, optional
        Edge that degenerates to a point (centre of a polar disc).
    flat : bool
        Declared totally geodesic (``|A| = 0``).
    distance : callable, optional
        Closed-form intrinsic distance to the junction edge, ``(u, v) -> d``.
    """

    domain: tuple
    immersion: Callable
    jet: Optional[Callable] = None
    junction_edge: Optional[str] = "v0"
    orientation_sign: int = 1
    periodic_u: bool = False
    collapsed_edge: Optional[str] = None
    flat: bool = False
    distance: Optional[Callable] = None
    fd_step: Optional[float] = None
    name: str = "sheet"

    def __post_init__(self):
        (u0, u1), (v0, v1) = self.domain
        if not (u1 > u0 and v1 > v0):
            raise ValueError(f"empty parameter rectangle {self.domain}")
        if self.orientation_sign not in (1, -1):
            raise ValueError("orientation_sign must be +1 or -1")
        if self.junction_edge is not None and self.junction_edge not in EDGES:
            raise ValueError(f"unknown edge {self.junction_edge!r}")

    @property
    def diameter(self) -> float:
        (u0, u1), (v0, v1) = self.domain
        return float(np.hypot(u1 - u0, v1 - v0))

    @property
    def step(self) -> float:
        return self.fd_step if self.fd_step is not None else 1e-5 * self.diameter

    def free_edges(self) -> tuple:
        """Edges that are genuine outer boundary (neither junction, periodic nor collapsed)."""
        out = []
        for e in EDGES:
            if e == self.junction_edge or e == self.collapsed_edge:
                continue
            if self.periodic_u and e[0] == "u":
                continue
            out.append(e)
        return tuple(out)

    @property
    def compact(self) -> bool:
        return not self.free_edges()

    def edge_coordinate(self, edge: str) -> float:
        (u0, u1), (v0, v1) = self.domain
        return {"u0": u0, "u1": u1, "v0": v0, "v1": v1}[edge]

    def inward_sign(self, edge: str) -> int:
        return 1 if edge.endswith("0") else -1

    def check_domain(self, u, v, tol=1e-9):
        (u0, u1), (v0, v1) = self.domain
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        su = tol * max(1.0, u1 - u0)
        sv = tol * max(1.0, v1 - v0)
        bad_v = (v < v0 - sv) | (v > v1 + sv)
        bad_u = np.zeros_like(bad_v) if self.periodic_u else (u < u0 - su) | (u > u1 + su)
        if np.any(bad_u | bad_v):
            raise OutsideDomain(f"parameter point outside {self.domain} on {self.name}")

    def evaluate_jet(self, u, v) -> Jet:
        if self.jet is not None:
            return self.jet(np.asarray(u, float), np.asarray(v, float))
        return fd_jet(self, u, v)

    def with_orientation(self, sign: int) -> "ParametricPatch":
        return replace(self, orientation_sign=int(sign))


@dataclass(frozen=True)
class ShapeData:
    position: np.ndarray
    Xu: np.ndarray
    Xv: np.ndarray
    metric: np.ndarray
    metric_inv: np.ndarray
    area_element: np.ndarray
    normal: np.ndarray
    second_form: np.ndarray
    normA2: np.ndarray
    H: np.ndarray
    K: np.ndarray

    @property
    def normA(self):
        return np.sqrt(self.normA2)


def _broadcast(u, v):
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    return u, v


def _stencil_kind(x, lo, hi, reach, periodic):
    """Per-point choice of central/forward/backward stencil."""
    if periodic:
        return np.full(x.shape, "central", dtype=object)
    kind = np.full(x.shape, "central", dtype=object)
    kind[x - reach < lo] = "forward"
    kind[x + reach > hi] = "backward"
    return kind


def _directional(f, u, v, h, axis, table, periodic, lo, hi):
    """Apply a 1-D stencil table along ``axis`` (0 = u, 1 = v) with edge-aware switching."""
    x = u if axis == 0 else v
    reach = 2 * h if table is _D1 else 3 * h
    kinds = _stencil_kind(x, lo, hi, reach, periodic)
    out = None
    for name, (offs, wts) in table.items():
        mask = kinds == name
        if not np.any(mask):
            continue
        acc = 0.0
        for o, w in zip(offs, wts):
            if axis == 0:
                acc = acc + w * f(u + o * h, v)
            else:
                acc = acc + w * f(u, v + o * h)
        order = 1 if table is _D1 else 2
        acc = acc / h**order
        if out is None:
            out = np.zeros(np.shape(acc), dtype=float)
        m = mask.reshape(mask.shape + (1,) * (np.ndim(acc) - mask.ndim))
        out = np.where(m, acc, out)
    return out


def param_partials(patch: ParametricPatch, f: Callable, u, v, h=None):
    """First parameter derivatives of ``f(u, v)`` (scalar or vector valued).

    Fourth-order central differences in the interior, second-order one-sided
    stencils within ``2h`` of a non-periodic edge.
    """
    u, v = _broadcast(u, v)
    h = patch.step if h is None else h
    (u0, u1), (v0, v1) = patch.domain
    fu = _directional(f, u, v, h, 0, _D1, patch.periodic_u, u0, u1)
    fv = _directional(f, u, v, h, 1, _D1, False, v0, v1)
    return fu, fv


def _fd_jet_raw(patch, u, v, h):
    (u0, u1), (v0, v1) = patch.domain
    X = patch.immersion
    Xu = _directional(X, u, v, h, 0, _D1, patch.periodic_u, u0, u1)
    Xv = _directional(X, u, v, h, 1, _D1, False, v0, v1)
    Xuu = _directional(X, u, v, h, 0, _D2, patch.periodic_u, u0, u1)
    Xvv = _directional(X, u, v, h, 1, _D2, False, v0, v1)

    def Xv_of(uu, vv):
        return _directional(X, uu, vv, h, 1, _D1, False, v0, v1)

    Xuv = _directional(Xv_of, u, v, h, 0, _D1, patch.periodic_u, u0, u1)
    return Jet(np.asarray(X(u, v), float), Xu, Xv, Xuu, Xuv, Xvv)


def fd_jet(patch: ParametricPatch, u, v, h=None, tol=None) -> Jet:
    """Finite-difference derivative jet of the immersion up to order two.

    Parameters
    ----------
    h : float, optional
        Step; defaults to ``patch.step``.
    tol : float, optional
        When given, the jet is also computed with step ``2h`` and a Richardson
        estimate of the truncation error is formed; :class:`StepTooLarge` is
        raised if it exceeds ``tol``.
    """
    u, v = _broadcast(u, v)
    h = patch.step if h is None else float(h)
    jet = _fd_jet_raw(patch, u, v, h)
    if tol is not None:
        coarse = _fd_jet_raw(patch, u, v, 2 * h)
        # interior stencils are fourth order, edge stencils second order
        err = max(
            float(np.max(np.abs(a - b))) / 3.0
            for a, b in zip(jet.as_tuple()[1:], coarse.as_tuple()[1:])
        )
        if err > tol:
            raise StepTooLarge(f"Richardson error estimate {err:.3e} exceeds {tol:.3e} (h={h})")
    return jet


def evaluate_frame(patch: ParametricPatch, u, v, eps_imm=EPS_IMM):
    """Position, coordinate tangents and oriented unit normal."""
    u, v = _broadcast(u, v)
    patch.check_domain(u, v)
    jet = patch.evaluate_jet(u, v)
    n = np.cross(jet.Xu, jet.Xv)
    norm = np.linalg.norm(n, axis=-1)
    if np.any(norm < eps_imm):
        raise DegenerateImmersion(f"|X_u x X_v| < {eps_imm:g} on {patch.name}")
    nu = patch.orientation_sign * n / norm[..., None]
    return jet.X, jet.Xu, jet.Xv, nu


def _shape_from_jet(patch, jet, eps_imm=EPS_IMM) -> ShapeData:
    Xu, Xv = jet.Xu, jet.Xv
    n = np.cross(Xu, Xv)
    norm = np.linalg.norm(n, axis=-1)
    if np.any(norm < eps_imm):
        raise DegenerateImmersion(f"|X_u x X_v| < {eps_imm:g} on {patch.name}")
    nu = patch.orientation_sign * n / norm[..., None]
    E = np.einsum("...i,...i", Xu, Xu)
    F = np.einsum("...i,...i", Xu, Xv)
    G = np.einsum("...i,...i", Xv, Xv)
    det = E * G - F * F
    g = np.stack([np.stack([E, F], -1), np.stack([F, G], -1)], -2)
    ginv = np.stack([np.stack([G, -F], -1), np.stack([-F, E], -1)], -2) / det[..., None, None]
    L = np.einsum("...i,...i", jet.Xuu, nu)
    M = np.einsum("...i,...i", jet.Xuv, nu)
    N = np.einsum("...i,...i", jet.Xvv, nu)
    A = np.stack([np.stack([L, M], -1), np.stack([M, N], -1)], -2)
    S = ginv @ A  # shape operator
    normA2 = np.einsum("...ij,...ji", S, S)
    trace = S[..., 0, 0] + S[..., 1, 1]
    K = (L * N - M * M) / det
    return ShapeData(
        position=jet.X,
        Xu=Xu,
        Xv=Xv,
        metric=g,
        metric_inv=ginv,
        area_element=np.sqrt(det),
        normal=nu,
        second_form=A,
        normA2=np.maximum(normA2, 0.0),
        H=trace[..., None] * nu,
        K=K,
    )


def shape_quantities(patch: ParametricPatch, u, v, eps_imm=EPS_IMM) -> ShapeData:
    """Fundamental forms and curvature scalars at parameter points.

    ``A_ab = X_ab . nu``, ``|A|^2 = g^ac g^bd A_ab A_cd``, mean curvature vector
    ``H = (g^ab A_ab) nu`` and Gauss curvature ``K = det A / det g``.
    """
    u, v = _broadcast(u, v)
    patch.check_domain(u, v)
    return _shape_from_jet(patch, patch.evaluate_jet(u, v), eps_imm)


def gradient_from_partials(shape: ShapeData, fu, fv):
    """Tangent gradient ``g^ab d_a f X_b`` and its squared norm."""
    gi = shape.metric_inv
    cu = gi[..., 0, 0] * fu + gi[..., 0, 1] * fv
    cv = gi[..., 1, 0] * fu + gi[..., 1, 1] * fv
    grad = cu[..., None] * shape.Xu + cv[..., None] * shape.Xv
    sq = fu * cu + fv * cv
    return grad, sq


def surface_gradient(patch: ParametricPatch, field: Callable, u, v, partials=None):
    """Surface gradient of a scalar field given as ``field(u, v)``.

    ``partials`` may supply analytic ``(f_u, f_v)``; otherwise they are
    obtained by :func:`param_partials`.
    """
    u, v = _broadcast(u, v)
    shape = shape_quantities(patch, u, v)
    if partials is None:
        fu, fv = param_partials(patch, field, u, v)
    else:
        fu, fv = partials
    grad, _ = gradient_from_partials(shape, np.asarray(fu, float), np.asarray(fv, float))
    return grad


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def gauss_legendre(n: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(int(n))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


@dataclass(frozen=True)
class PatchSample:
    """Quadrature nodes on a patch together with the shape data there."""

    u: np.ndarray
    v: np.ndarray
    weights: np.ndarray  # parameter-space weights
    shape: ShapeData

    @property
    def dA(self):
        return self.weights * self.shape.area_element


def tensor_grid(patch: ParametricPatch, n=DEFAULT_GRID):
    nu, nv = (n, n) if np.isscalar(n) else n
    (u0, u1), (v0, v1) = patch.domain
    xu, wu = gauss_legendre(nu, u0, u1)
    xv, wv = gauss_legendre(nv, v0, v1)
    U, V = np.meshgrid(xu, xv, indexing="ij")
    W = np.outer(wu, wv)
    return U, V, W


@lru_cache(maxsize=128)
def _sample_cached(patch, nu, nv):
    U, V, W = tensor_grid(patch, (nu, nv))
    return PatchSample(U, V, W, shape_quantities(patch, U, V))


def sample_patch(patch: ParametricPatch, n=DEFAULT_GRID) -> PatchSample:
    nu, nv = (n, n) if np.isscalar(n) else n
    return _sample_cached(patch, int(nu), int(nv))


def integrate_patch(patch: ParametricPatch, integrand: Callable, grid=DEFAULT_GRID) -> float:
    """Tensor Gauss-Legendre integral ``sum w_ij f(p_ij) sqrt(det g(p_ij))``.

    ``integrand`` is called once with the full node arrays ``(U, V)``.
    """
    s = sample_patch(patch, grid)
    vals = np.asarray(integrand(s.u, s.v), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteIntegrand(f"integrand not finite on {patch.name}")
    return float(np.sum(s.dA * vals))
