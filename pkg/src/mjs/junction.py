"""Assembly of several sheets glued along a junction curve.

Conventions
-----------
The junction curve is parametrised by arclength ``t``. Sheet ``i`` meets it
along one edge of its parameter rectangle; an affine identification maps ``t``
to the coordinate running along that edge. The outer conormal ``tau_i`` is the
unit tangent of sheet ``i`` orthogonal to the curve and pointing away from the
sheet interior.
"""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .geometry import (
    DEFAULT_GRID,
    ParametricPatch,
    evaluate_frame,
    gauss_legendre,
    sample_patch,
)

DEFAULT_GAMMA_SAMPLES = 256


# --------------------------------------------------------------------------
# the junction curve
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JunctionCurve:
    """Arclength-parametrised curve ``gamma`` on ``t_range``.

    ``jet(t)`` may return ``(gamma, gamma', gamma'')``; otherwise fourth-order
    central differences are used.
    """

    gamma: Callable
    t_range: tuple
    topology: str = "closed"
    jet: Optional[Callable] = None
    name: str = "gamma"

    def __post_init__(self):
        if self.topology not in ("closed", "line"):
            raise ValueError(f"unknown topology {self.topology!r}")

    @property
    def length(self) -> float:
        return float(self.t_range[1] - self.t_range[0])

    def derivatives(self, t):
        t = np.asarray(t, dtype=float)
        if self.jet is not None:
            return self.jet(t)
        h = 1e-4 * max(self.length, 1.0)
        g = self.gamma
        if self.topology == "closed":
            d1 = (g(t - 2 * h) - 8 * g(t - h) + 8 * g(t + h) - g(t + 2 * h)) / (12 * h)
            d2 = (-g(t - 2 * h) + 16 * g(t - h) - 30 * g(t) + 16 * g(t + h) - g(t + 2 * h)) / (12 * h * h)
            return g(t), d1, d2
        # open curve: the map is assumed to extend smoothly past its ends
        d1 = (g(t - 2 * h) - 8 * g(t - h) + 8 * g(t + h) - g(t + 2 * h)) / (12 * h)
        d2 = (-g(t - 2 * h) + 16 * g(t - h) - 30 * g(t) + 16 * g(t + h) - g(t + 2 * h)) / (12 * h * h)
        return g(t), d1, d2

    def point(self, t):
        return np.asarray(self.gamma(np.asarray(t, dtype=float)), dtype=float)

    def tangent(self, t):
        _, d1, _ = self.derivatives(t)
        return d1 / np.linalg.norm(d1, axis=-1, keepdims=True)

    def curvature(self, t):
        """Curvature vector; equals ``gamma''`` for unit speed."""
        _, d1, d2 = self.derivatives(t)
        speed2 = np.einsum("...i,...i", d1, d1)[..., None]
        eta = d1 / np.sqrt(speed2)
        perp = d2 - np.einsum("...i,...i", d2, eta)[..., None] * eta
        return perp / speed2

    def samples(self, n=DEFAULT_GAMMA_SAMPLES):
        """Quadrature samples ``(t, w)``: uniform trapezoid if closed, Gauss-Legendre if a line."""
        t0, t1 = self.t_range
        if self.topology == "closed":
            t = t0 + self.length * np.arange(n) / n
            return t, np.full(n, self.length / n)
        return gauss_legendre(int(n), float(t0), float(t1))

    def integrate(self, values, weights):
        return float(np.sum(np.asarray(values) * weights))

    @classmethod
    def circle(cls, radius=1.0, height=0.0):
        """Horizontal circle of given radius centred on the z-axis."""
        R = float(radius)

        def gamma(t):
            t = np.asarray(t, dtype=float)
            a = t / R
            return np.stack([R * np.cos(a), R * np.sin(a), np.full_like(a, height)], -1)

        def jet(t):
            t = np.asarray(t, dtype=float)
            a = t / R
            c, s, z = np.cos(a), np.sin(a), np.zeros_like(a)
            return (
                np.stack([R * c, R * s, z + height], -1),
                np.stack([-s, c, z], -1),
                np.stack([-c / R, -s / R, z], -1),
            )

        return cls(gamma, (0.0, 2 * np.pi * R), "closed", jet, name=f"circle(R={R:g})")

    @classmethod
    def z_axis(cls, half_height):
        H = float(half_height)

        def gamma(t):
            t = np.asarray(t, dtype=float)
            z = np.zeros_like(t)
            return np.stack([z, z, t], -1)

        def jet(t):
            t = np.asarray(t, dtype=float)
            z = np.zeros_like(t)
            o = np.ones_like(t)
            return np.stack([z, z, t], -1), np.stack([z, z, o], -1), np.stack([z, z, z], -1)

        return cls(gamma, (-H, H), "line", jet, name="z-axis")


# --------------------------------------------------------------------------
# identification of sheet edges with the curve
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Identification:
    """Affine map ``s = offset + scale * t`` onto the edge coordinate of one sheet."""

    edge: str
    offset: float = 0.0
    scale: float = 1.0

    def to_uv(self, patch: ParametricPatch, t):
        t = np.asarray(t, dtype=float)
        s = self.offset + self.scale * t
        fixed = np.full_like(s, patch.edge_coordinate(self.edge))
        if self.edge[0] == "u":
            return fixed, s
        return s, fixed

    def along(self, u, v):
        """Edge-parallel coordinate of a parameter point."""
        return np.asarray(v if self.edge[0] == "u" else u, dtype=float)

    def to_t(self, u, v):
        return (self.along(u, v) - self.offset) / self.scale


@dataclass(frozen=True, eq=False)
class MultiJunctionSurface:
    """``q`` weighted sheets sharing the junction curve.

    ``coherence`` records the orientation convention: ``+1`` when
    ``nu_i = eta x tau_i`` on every sheet, ``-1`` when ``nu_i = tau_i x eta``,
    ``0`` when unspecified.
    """

    sheets: tuple
    densities: tuple
    curve: JunctionCurve
    identifications: tuple
    name: str = "M"
    coherence: int = 0
    metadata: dict = field(default_factory=dict)
    edge_tol: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "sheets", tuple(self.sheets))
        object.__setattr__(self, "densities", tuple(float(x) for x in self.densities))
        object.__setattr__(self, "identifications", tuple(self.identifications))
        q = len(self.sheets)
        if q < 1 or len(self.densities) != q or len(self.identifications) != q:
            raise ValueError("sheets, densities and identifications must have equal nonzero length")
        if any(not th > 0 for th in self.densities):
            raise ValueError(f"densities must be positive, got {self.densities}")
        for patch, ident in zip(self.sheets, self.identifications):
            if ident.edge != patch.junction_edge:
                raise ValueError(f"{patch.name}: identification edge {ident.edge} != junction edge")
        self._check_edges()

    def _check_edges(self, n=17):
        t0, t1 = self.curve.t_range
        t = np.linspace(t0, t1, n)
        g = self.curve.point(t)
        for i, patch in enumerate(self.sheets):
            u, v = self.edge_params(i, t)
            err = np.max(np.linalg.norm(np.asarray(patch.immersion(u, v)) - g, axis=-1))
            if err > self.edge_tol * max(1.0, self.curve.length):
                raise ValueError(f"junction edge of {patch.name} misses the curve by {err:.3e}")

    @property
    def q(self) -> int:
        return len(self.sheets)

    def edge_params(self, i, t):
        return self.identifications[i].to_uv(self.sheets[i], t)

    def foot_t(self, i, u, v):
        return self.identifications[i].to_t(u, v)

    def with_sheets(self, sheets, coherence=None):
        return replace(
            self,
            sheets=tuple(sheets),
            coherence=self.coherence if coherence is None else coherence,
        )

    def with_densities(self, densities):
        return replace(self, densities=tuple(densities))


# --------------------------------------------------------------------------
# conormals and orientation
# --------------------------------------------------------------------------


def _inward(patch, jet, edge):
    d = jet.Xu if edge[0] == "u" else jet.Xv
    return patch.inward_sign(edge) * d


def edge_frame(M: MultiJunctionSurface, i: int, t):
    """Frame of sheet ``i`` along the curve: ``(position, nu, tau, eta)``."""
    patch = M.sheets[i]
    t = np.asarray(t, dtype=float)
    u, v = M.edge_params(i, t)
    X, _, _, nu = evaluate_frame(patch, u, v)
    jet = patch.evaluate_jet(u, v)
    eta = M.curve.tangent(t)
    c = np.cross(nu, eta)
    c /= np.linalg.norm(c, axis=-1, keepdims=True)
    s = np.sign(np.einsum("...i,...i", c, _inward(patch, jet, patch.junction_edge)))
    s = np.where(s == 0, 1.0, s)
    tau = -s[..., None] * c
    return X, nu, tau, eta


def conormal(M: MultiJunctionSurface, i: int, t):
    """Unit outer conormal of sheet ``i`` at curve parameters ``t``."""
    return edge_frame(M, i, t)[2]


def sheet_normal_on_gamma(M: MultiJunctionSurface, i: int, t):
    return edge_frame(M, i, t)[1]


def orient_coherently(M: MultiJunctionSurface, sign: int = 1) -> MultiJunctionSurface:
    """Flip sheet orientations so that ``nu_i = sign * eta x tau_i`` on every sheet."""
    t0 = np.array([M.curve.t_range[0] + 0.25 * M.curve.length])
    sheets = []
    for i, patch in enumerate(M.sheets):
        _, nu, tau, eta = edge_frame(M, i, t0)
        target = sign * np.cross(eta, tau)
        agree = float(np.einsum("...i,...i", nu, target)[0])
        sheets.append(patch if agree > 0 else patch.with_orientation(-patch.orientation_sign))
    return M.with_sheets(sheets, coherence=sign)


def gamma_curvature(M, t):
    """Curvature vector ``H_Gamma`` of the junction curve."""
    curve = M.curve if isinstance(M, MultiJunctionSurface) else M
    return curve.curvature(t)


# --------------------------------------------------------------------------
# diagnostics
# --------------------------------------------------------------------------


@dataclass
class DiagnosticsReport:
    name: str
    max_H: list
    max_conormal_sum: float
    max_weighted_Htau_sum: float
    pairwise_angle_mean: list
    pairwise_angle_deviation: float
    n_gamma: int
    grid: list
    clamp_counts: dict = field(default_factory=dict)

    def is_minimal(self, tol=1e-8) -> bool:
        return max(self.max_H) <= tol and self.max_conormal_sum <= tol

    def to_dict(self):
        return asdict(self)


class EquilibriumCheck(NamedTuple):
    is_equilibrium: bool
    angles: np.ndarray
    max_deviation: float


def _pairwise_angles(taus):
    # taus: (q, n, 3)
    dots = np.einsum("ink,jnk->nij", taus, taus)
    crs = np.linalg.norm(np.cross(taus[:, None], taus[None, :]), axis=-1)  # (q, q, n)
    return np.arctan2(np.moveaxis(crs, -1, 0), dots)


def equilibrium_angles_check(M: MultiJunctionSurface, samples=DEFAULT_GAMMA_SAMPLES, tol=1e-6):
    """Pairwise conormal angles along the curve and their spread about the mean."""
    t, _ = M.curve.samples(samples)
    taus = np.stack([conormal(M, i, t) for i in range(M.q)])
    ang = _pairwise_angles(taus)
    dev = float(np.max(np.abs(ang - ang.mean(axis=0)))) if len(t) else 0.0
    return EquilibriumCheck(dev <= tol, ang, dev)


def minimality_residual(M: MultiJunctionSurface, grid=DEFAULT_GRID, samples=DEFAULT_GAMMA_SAMPLES):
    """Interior mean curvature and weighted conormal balance along the curve."""
    max_H = []
    for patch in M.sheets:
        s = sample_patch(patch, grid)
        max_H.append(float(np.max(np.linalg.norm(s.shape.H, axis=-1))))
    t, _ = M.curve.samples(samples)
    taus = np.stack([conormal(M, i, t) for i in range(M.q)])
    th = np.asarray(M.densities)[:, None, None]
    bal = np.linalg.norm(np.sum(th * taus, axis=0), axis=-1)
    Hg = M.curve.curvature(t)
    htau = np.sum(th[..., 0] * np.einsum("nk,ink->in", Hg, taus), axis=0)
    ang = _pairwise_angles(taus)
    mean = ang.mean(axis=0)
    return DiagnosticsReport(
        name=M.name,
        max_H=max_H,
        max_conormal_sum=float(np.max(bal)),
        max_weighted_Htau_sum=float(np.max(np.abs(htau))),
        pairwise_angle_mean=mean.tolist(),
        pairwise_angle_deviation=float(np.max(np.abs(ang - mean))),
        n_gamma=int(len(t)),
        grid=list(grid) if not np.isscalar(grid) else [grid, grid],
    )


@lru_cache(maxsize=64)
def _cached_minimality(M, grid, samples):
    return minimality_residual(M, grid, samples)


def check_minimal(M, grid=DEFAULT_GRID, samples=DEFAULT_GAMMA_SAMPLES):
    g = tuple(grid) if not np.isscalar(grid) else (grid, grid)
    return _cached_minimality(M, g, int(samples))


# --------------------------------------------------------------------------
# distance to the junction
# --------------------------------------------------------------------------


def _segment_lengths(patch, P, Q, nq=4):
    """Riemannian length of straight parameter segments ``P -> Q`` (Gauss-Legendre)."""
    x, w = gauss_legendre(nq, 0.0, 1.0)
    d = Q - P
    total = np.zeros(len(P))
    for xi, wi in zip(x, w):
        pt = P + xi * d
        jet = patch.evaluate_jet(pt[:, 0], pt[:, 1])
        tan = jet.Xu * d[:, :1] + jet.Xv * d[:, 1:2]
        total += wi * np.linalg.norm(tan, axis=-1)
    return total


_MOVES = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2)]


@lru_cache(maxsize=32)
def _grid_distance(patch: ParametricPatch, nu: int, nv: int):
    (u0, u1), (v0, v1) = patch.domain
    per = patch.periodic_u
    us = np.linspace(u0, u1, nu + 1)[:-1] if per else np.linspace(u0, u1, nu + 1)
    vs = np.linspace(v0, v1, nv + 1)
    NU, NV = len(us), len(vs)
    idx = np.arange(NU * NV).reshape(NU, NV)
    du = (u1 - u0) / nu
    rows, cols, P, Q = [], [], [], []
    I, J = np.meshgrid(np.arange(NU), np.arange(NV), indexing="ij")
    for a, b in _MOVES:
        I2, J2 = I + a, J + b
        ok = (J2 >= 0) & (J2 < NV)
        if per:
            I2w = I2 % NU
        else:
            ok &= (I2 >= 0) & (I2 < NU)
            I2w = np.clip(I2, 0, NU - 1)
        i1, j1, i2, j2 = I[ok], J[ok], I2[ok], J2[ok]
        rows.append(idx[i1, j1])
        cols.append(idx[I2w[ok], j2])
        P.append(np.stack([u0 + i1 * du, vs[j1]], -1))
        Q.append(np.stack([u0 + i2 * du, vs[j2]], -1))
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    P, Q = np.concatenate(P), np.concatenate(Q)
    w = _segment_lengths(patch, P, Q)
    w = np.maximum(w, 1e-300)
    n = NU * NV
    graph = coo_matrix((np.r_[w, w], (np.r_[rows, cols], np.r_[cols, rows])), shape=(n, n)).tocsr()
    e = patch.junction_edge
    src = {"u0": idx[0, :], "u1": idx[-1, :], "v0": idx[:, 0], "v1": idx[:, -1]}[e]
    dist = dijkstra(graph, directed=False, indices=src, min_only=True)
    return us, vs, dist.reshape(NU, NV), du


def grid_distance_to_gamma(patch: ParametricPatch, u, v, grid=(64, 64)):
    """Shortest-path distance to the junction edge over a parameter-grid graph.

    Neighbours include the eight adjacent nodes and the knight moves; edge
    weights are Gauss-Legendre lengths of straight parameter segments, so the
    result is an upper bound that decreases under refinement.
    """
    nu, nv = (grid, grid) if np.isscalar(grid) else grid
    us, vs, D, du = _grid_distance(patch, int(nu), int(nv))
    (u0, u1), (v0, v1) = patch.domain
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    shape = u.shape
    u, v = u.ravel(), v.ravel()
    dv = vs[1] - vs[0]
    iu = np.clip(np.floor((u - u0) / du).astype(int), 0, len(us) - (1 if patch.periodic_u else 2))
    jv = np.clip(np.floor((v - v0) / dv).astype(int), 0, len(vs) - 2)
    best = np.full(u.shape, np.inf)
    pts = np.stack([u, v], -1)
    for a in (0, 1):
        for b in (0, 1):
            ci = iu + a
            cu = u0 + ci * du
            ci_w = ci % len(us) if patch.periodic_u else np.minimum(ci, len(us) - 1)
            corner = np.stack([cu, vs[jv + b]], -1)
            seg = _segment_lengths(patch, corner, pts)
            best = np.minimum(best, D[ci_w, jv + b] + seg)
    # straight transverse segment down to the junction edge
    e = patch.junction_edge
    foot = pts.copy()
    foot[:, 0 if e[0] == "u" else 1] = patch.edge_coordinate(e)
    best = np.minimum(best, _segment_lengths(patch, foot, pts))
    return best.reshape(shape)


def distance_to_gamma(M: MultiJunctionSurface, i: int, u, v, method="auto", grid=(64, 64)):
    """Intrinsic distance ``d_Gamma`` from a point of sheet ``i`` to the junction.

    ``method='auto'`` uses the sheet's closed form when declared and the grid
    shortest path otherwise.
    """
    patch = M.sheets[i] if isinstance(M, MultiJunctionSurface) else M
    if method == "closed" or (method == "auto" and patch.distance is not None):
        if patch.distance is None:
            raise ValueError(f"{patch.name} has no closed-form distance")
        return np.asarray(patch.distance(np.asarray(u, float), np.asarray(v, float)), dtype=float)
    return grid_distance_to_gamma(patch, u, v, grid)


# --------------------------------------------------------------------------
# export
# --------------------------------------------------------------------------


def gamma_table(M: MultiJunctionSurface, samples=DEFAULT_GAMMA_SAMPLES):
    t, _ = M.curve.samples(samples)
    cols = {"t": t}
    X = M.curve.point(t)
    H = M.curve.curvature(t)
    for k, ax in enumerate("xyz"):
        cols[ax] = X[:, k]
    for k, ax in enumerate("xyz"):
        cols[f"H_{ax}"] = H[:, k]
    for i in range(M.q):
        tau = conormal(M, i, t)
        for k, ax in enumerate("xyz"):
            cols[f"tau{i}_{ax}"] = tau[:, k]
    return cols


def write_table_csv(cols: dict, path):
    keys = list(cols)
    n = len(cols[keys[0]])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(keys)
        for r in range(n):
            w.writerow([repr(float(cols[k][r])) for k in keys])


def export_gamma_csv(M: MultiJunctionSurface, path, samples=DEFAULT_GAMMA_SAMPLES):
    write_table_csv(gamma_table(M, samples), path)
