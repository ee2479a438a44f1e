"""Constructors for concrete junction configurations.

Includes flat junctions, catenoid pieces, the Y-shaped catenoid and sheets
produced by Björling's formula, among them the Y-shaped bent helicoid.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidAngles, NotOrthonormal, SolveFailure
from .geometry import Jet, ParametricPatch
from .junction import Identification, JunctionCurve, MultiJunctionSurface, orient_coherently

TWO_PI = 2 * np.pi
MAX_MODES = 64


def _stack(*comps):
    return np.stack(np.broadcast_arrays(*comps), -1)


# --------------------------------------------------------------------------
# elementary sheets
# --------------------------------------------------------------------------


def make_plane(domain=((0.0, 1.0), (0.0, 1.0)), orientation_sign=1, junction_edge="v0", name="plane"):
    """The coordinate plane ``(u, v, 0)``."""

    def X(u, v):
        return _stack(u, v, np.zeros_like(np.asarray(u, float)))

    def jet(u, v):
        u, v = np.broadcast_arrays(u, v)
        z, o = np.zeros_like(u), np.ones_like(u)
        return Jet(_stack(u, v, z), _stack(o, z, z), _stack(z, o, z), _stack(z, z, z), _stack(z, z, z), _stack(z, z, z))

    def dist(u, v):
        (u0, u1), (v0, v1) = domain
        return {"u0": u - u0, "u1": u1 - u, "v0": v - v0, "v1": v1 - v}[junction_edge]

    return ParametricPatch(
        domain=domain, immersion=X, jet=jet, junction_edge=junction_edge,
        orientation_sign=orientation_sign, flat=True, distance=dist, name=name,
    )


def make_polar_disc(radius=1.0, angle=TWO_PI, height=0.0, inner=0.0, junction_edge="v1", name="disc"):
    """Flat polar sheet ``(r cos u, r sin u, height)`` with ``r`` in ``[inner, radius]``.

    ``inner = 0`` collapses the ``v0`` edge to the centre.
    """
    R, R0 = float(radius), float(inner)
    full = np.isclose(angle, TWO_PI)

    def X(u, r):
        u, r = np.broadcast_arrays(np.asarray(u, float), np.asarray(r, float))
        return _stack(r * np.cos(u), r * np.sin(u), np.full_like(r, height))

    def jet(u, r):
        u, r = np.broadcast_arrays(np.asarray(u, float), np.asarray(r, float))
        c, s, z = np.cos(u), np.sin(u), np.zeros_like(u)
        return Jet(
            _stack(r * c, r * s, z + height),
            _stack(-r * s, r * c, z),
            _stack(c, s, z),
            _stack(-r * c, -r * s, z),
            _stack(-s, c, z),
            _stack(z, z, z),
        )

    edge_r = R if junction_edge == "v1" else R0

    return ParametricPatch(
        domain=((0.0, float(angle)), (R0, R)),
        immersion=X,
        jet=jet,
        junction_edge=junction_edge,
        periodic_u=bool(full),
        collapsed_edge="v0" if R0 == 0.0 else None,
        flat=True,
        distance=lambda u, r: np.abs(edge_r - np.asarray(r, float)) + 0.0 * np.asarray(u, float),
        name=name,
    )


def make_catenoid_band(c=1.0, v_range=(0.0, 1.0), u_range=(0.0, TWO_PI), z_offset=0.0,
                       z_sign=1, junction_edge="v0", orientation_sign=1, name="catenoid"):
    """Catenoid ``(c cosh v cos u, c cosh v sin u, z_sign (c v + z_offset))`` with analytic jets."""
    if not c > 0:
        raise ValueError("neck scale c must be positive")
    c, b, sg = float(c), float(z_offset), float(z_sign)

    def X(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        ch = c * np.cosh(v)
        return _stack(ch * np.cos(u), ch * np.sin(u), sg * (c * v + b))

    def jet(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        cu, su = np.cos(u), np.sin(u)
        ch, sh = c * np.cosh(v), c * np.sinh(v)
        z = np.zeros_like(u)
        return Jet(
            _stack(ch * cu, ch * su, sg * (c * v + b)),
            _stack(-ch * su, ch * cu, z),
            _stack(sh * cu, sh * su, z + sg * c),
            _stack(-ch * cu, -ch * su, z),
            _stack(-sh * su, sh * cu, z),
            _stack(ch * cu, ch * su, z),
        )

    edge_v = v_range[0] if junction_edge == "v0" else v_range[1]

    def dist(u, v):
        return c * np.abs(np.sinh(np.asarray(v, float)) - np.sinh(edge_v)) + 0.0 * np.asarray(u, float)

    full = np.isclose(u_range[1] - u_range[0], TWO_PI)
    return ParametricPatch(
        domain=(tuple(map(float, u_range)), tuple(map(float, v_range))),
        immersion=X,
        jet=jet,
        junction_edge=junction_edge,
        orientation_sign=orientation_sign,
        periodic_u=bool(full),
        distance=dist if junction_edge in ("v0", "v1") else None,
        name=name,
    )


# --------------------------------------------------------------------------
# flat junctions
# --------------------------------------------------------------------------


def make_flat_y(q=3, angles=None, radius=1.0, height=1.0, densities=None, name="flat_y"):
    """``q`` vertical half-strips meeting along the z-axis segment ``|z| <= height``.

    Sheet ``i`` is ``s (cos a_i, sin a_i, 0) + z e_z`` with ``s`` in
    ``[0, radius]``; the junction edge is ``s = 0``.
    """
    if q < 2:
        raise ValueError("flat_y needs at least two sheets")
    if angles is None:
        angles = [TWO_PI * i / q for i in range(q)]
    angles = [float(a) for a in angles]
    if len(angles) != q:
        raise ValueError("need one angle per sheet")
    red = np.mod(angles, TWO_PI)
    for i in range(q):
        for j in range(i + 1, q):
            gap = abs(red[i] - red[j])
            if min(gap, TWO_PI - gap) < 1e-12:
                raise InvalidAngles(f"angles {angles[i]} and {angles[j]} coincide")
    densities = [1.0] * q if densities is None else list(densities)
    H = float(height)
    sheets = []
    for i, a in enumerate(angles):
        d = np.array([np.cos(a), np.sin(a), 0.0])

        def X(s, z, d=d):
            s, z = np.broadcast_arrays(np.asarray(s, float), np.asarray(z, float))
            return s[..., None] * d + z[..., None] * np.array([0.0, 0.0, 1.0])

        def jet(s, z, d=d):
            s, z = np.broadcast_arrays(np.asarray(s, float), np.asarray(z, float))
            zero = np.zeros(s.shape + (3,))
            return Jet(
                s[..., None] * d + z[..., None] * np.array([0.0, 0.0, 1.0]),
                zero + d,
                zero + np.array([0.0, 0.0, 1.0]),
                zero, zero, zero,
            )

        sheets.append(ParametricPatch(
            domain=((0.0, float(radius)), (-H, H)),
            immersion=X, jet=jet, junction_edge="u0", flat=True,
            distance=lambda s, z: np.asarray(s, float) + 0.0 * np.asarray(z, float),
            name=f"{name}[{i}]",
        ))
    M = MultiJunctionSurface(
        sheets, densities, JunctionCurve.z_axis(H), [Identification("u0")] * q,
        name=name, metadata={"kind": "flat_y", "angles": angles, "radius": radius, "height": H},
    )
    return orient_coherently(M, +1)


def make_plane_sector(radius=1.0, angle=TWO_PI, name="plane_sector"):
    """A single flat polar sector whose junction is its outer arc (``q = 1``)."""
    disc = make_polar_disc(radius, angle, name=name)
    curve = JunctionCurve.circle(radius)
    if not np.isclose(angle, TWO_PI):
        R = float(radius)
        circ = JunctionCurve.circle(radius)
        curve = JunctionCurve(circ.gamma, (0.0, R * float(angle)), "line", circ.jet, name="arc")
    M = MultiJunctionSurface([disc], [1.0], curve, [Identification("v1", 0.0, 1.0 / radius)],
                             name=name, metadata={"kind": "plane_sector"})
    return orient_coherently(M, +1)


# --------------------------------------------------------------------------
# the Y-shaped catenoid
# --------------------------------------------------------------------------


def y_catenoid_parameters(rho0=1.0):
    """Neck scale ``c``, height shift ``b`` and junction parameter ``s0``.

    Solves ``sinh(s0) = cot(60 deg)`` so the meridian leaves the circle at
    slope ``dz/dr = sqrt(3)``, then ``c cosh(s0) = rho0`` and ``c s0 + b = 0``.
    """
    if not rho0 > 0:
        raise ValueError("rho0 must be positive")
    target = 1.0 / np.sqrt(3.0)
    try:
        s0 = brentq(lambda s: np.sinh(s) - target, 0.0, 2.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    except (ValueError, RuntimeError) as exc:  # pragma: no cover - guarded, cannot happen
        raise SolveFailure(str(exc)) from exc
    c = rho0 / np.cosh(s0)
    return c, -c * s0, s0


def make_y_catenoid(rho0=1.0, V=2.0, kind="disc", outer=2.0, name="y_catenoid"):
    """Flat sheet plus two mirror-image catenoid pieces meeting the circle ``r = rho0`` at 120 deg.

    ``kind='disc'`` is the symmetric configuration: the flat disc ``r <= rho0``
    and two catenoids leaving the circle upward and downward, each over a
    parameter band of height ``V``. ``kind='annulus'`` is the other Y-shape:
    a flat annulus ``rho0 <= r <= rho0 + outer`` with both catenoids turning
    inward through their necks.
    """
    if not (rho0 > 0 and V > 0):
        raise ValueError("rho0 and V must be positive")
    c, b, s0 = y_catenoid_parameters(rho0)
    circle = JunctionCurve.circle(rho0)
    to_u = Identification("v0", 0.0, 1.0 / rho0)
    if kind == "disc":
        flat = make_polar_disc(rho0, name=f"{name}.disc")
        flat_id = Identification("v1", 0.0, 1.0 / rho0)
        vr = (s0, s0 + V)
        off = b
    elif kind == "annulus":
        flat = make_polar_disc(rho0 + outer, inner=rho0, junction_edge="v0", name=f"{name}.annulus")
        flat_id = to_u
        vr = (-s0, -s0 + V)
        off = -b
    else:
        raise ValueError(f"unknown y_catenoid kind {kind!r}")
    up = make_catenoid_band(c, vr, z_offset=off, z_sign=1, name=f"{name}.up")
    down = make_catenoid_band(c, vr, z_offset=off, z_sign=-1, name=f"{name}.down")
    M = MultiJunctionSurface(
        [flat, up, down], [1.0, 1.0, 1.0], circle, [flat_id, to_u, to_u], name=name,
        metadata={"kind": "y_catenoid", "variant": kind, "rho0": rho0, "V": V, "c": c, "b": b, "s0": s0},
    )
    return orient_coherently(M, +1)


def make_catenoid_half(c=1.0, V=1.0, name="catenoid_half"):
    """Upper half ``v in [0, V]`` of a catenoid, glued to its waist circle (``q = 1``)."""
    band = make_catenoid_band(c, (0.0, V), name=name)
    M = MultiJunctionSurface([band], [1.0], JunctionCurve.circle(c), [Identification("v0", 0.0, 1.0 / c)],
                             name=name, metadata={"kind": "catenoid_half", "c": c, "V": V})
    return orient_coherently(M, +1)


# --------------------------------------------------------------------------
# Fourier curves and Björling's formula
# --------------------------------------------------------------------------


def _key(k):
    return round(float(k), 12)


class FourierCurve:
    """Trigonometric polynomial ``c(t) = sum_k a_k exp(i k t)`` with real frequencies.

    Coefficients are stored two-sided with ``a_{-k} = conj(a_k)`` so the curve
    is real on the real axis. Values may be scalars or 3-vectors. Evaluating at
    complex ``w`` gives the holomorphic extension used by Björling's formula.
    """

    def __init__(self, coeffs: dict, dim=3):
        self.dim = dim
        self.coeffs = {}
        for k, a in coeffs.items():
            a = np.asarray(a, dtype=complex).reshape(dim)
            if np.any(a != 0):
                self.coeffs[_key(k)] = self.coeffs.get(_key(k), 0) + a
        self._freeze()

    def _freeze(self):
        ks = sorted(self.coeffs)
        self._k = np.array(ks, dtype=float)
        self._a = np.array([self.coeffs[k] for k in ks], dtype=complex).reshape(len(ks), self.dim)

    @classmethod
    def from_real(cls, terms, dim=3):
        """Build from ``{k: C_k}`` meaning ``sum_k Re(C_k exp(i k t))`` with ``k >= 0``."""
        out = {}
        for k, C in terms.items():
            C = np.asarray(C, dtype=complex).reshape(dim)
            if k == 0:
                out[0.0] = out.get(0.0, 0) + C.real
            else:
                out[_key(k)] = out.get(_key(k), 0) + C / 2
                out[_key(-k)] = out.get(_key(-k), 0) + np.conj(C) / 2
        return cls(out, dim)

    @classmethod
    def from_samples(cls, values, max_modes=MAX_MODES):
        """Project equally spaced samples over one period onto at most ``max_modes`` modes."""
        values = np.asarray(values, dtype=float)
        n = values.shape[0]
        dim = 1 if values.ndim == 1 else values.shape[1]
        F = np.fft.rfft(values.reshape(n, dim), axis=0) / n
        kmax = min(max_modes, F.shape[0] - 1)
        if n % 2 == 0 and kmax == F.shape[0] - 1:
            kmax -= 1
        coeffs = {0.0: F[0].real}
        for k in range(1, kmax + 1):
            coeffs[float(k)] = F[k]
            coeffs[float(-k)] = np.conj(F[k])
        return cls(coeffs, dim)

    @property
    def frequencies(self):
        return self._k.copy()

    @property
    def integer_frequencies(self) -> bool:
        return bool(np.allclose(self._k, np.round(self._k)))

    def __call__(self, w, derivative=0):
        w = np.asarray(w)
        if len(self._k) == 0:
            return np.zeros(w.shape + (self.dim,), dtype=complex)
        ik = 1j * self._k
        e = np.exp(w[..., None] * ik) * ik**derivative
        out = e @ self._a
        return out

    def real(self, t, derivative=0):
        return np.real(self(np.asarray(t, dtype=float), derivative))

    def derivative(self):
        return FourierCurve({k: 1j * k * a for k, a in self.coeffs.items()}, self.dim)

    def antiderivative_value(self, w):
        """``int_0^w c(z) dz`` evaluated exactly, modewise."""
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape + (self.dim,), dtype=complex)
        for k, a in zip(self._k, self._a):
            if k == 0:
                out = out + w[..., None] * a
            else:
                out = out + ((np.exp(1j * k * w) - 1.0) / (1j * k))[..., None] * a
        return out

    def _binary(self, other, op):
        out = {}
        for k1, a1 in self.coeffs.items():
            for k2, a2 in other.coeffs.items():
                k = _key(k1 + k2)
                out[k] = out.get(k, 0) + op(a1, a2)
        return out

    def __mul__(self, other):
        if np.isscalar(other):
            return FourierCurve({k: other * a for k, a in self.coeffs.items()}, self.dim)
        if self.dim == 1:
            return FourierCurve(self._binary(other, lambda a, b: a * b), other.dim)
        if other.dim == 1:
            return FourierCurve(self._binary(other, lambda a, b: a * b), self.dim)
        raise ValueError("use dot() or cross() for vector products")

    __rmul__ = __mul__

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, a in other.coeffs.items():
            out[k] = out.get(k, 0) + a
        return FourierCurve(out, self.dim)

    def cross(self, other):
        return FourierCurve(self._binary(other, np.cross), 3)

    def dot(self, other):
        return FourierCurve(self._binary(other, lambda a, b: np.sum(a * b)), 1)


def circle_curve(radius=1.0):
    return FourierCurve.from_real({1: radius * np.array([1.0, -1j, 0.0])})


def bent_helicoid_normal(kappa=1.0, phase=0.0, wobble=0.0, modes=24):
    """``cos(a) e_r(t) + sin(a) e_z`` along the unit circle, ``a = kappa t + phase + wobble sin t``.

    Without wobble the field is an exact trigonometric polynomial; otherwise it
    is projected onto ``modes`` Fourier modes. The spectrum decays like Bessel
    functions of ``wobble``, while continuation to height ``v`` amplifies mode
    ``k`` by ``exp(k v)``, so a modest mode count is the accurate choice.
    """
    if wobble:
        t = np.linspace(0.0, TWO_PI, 4 * MAX_MODES, endpoint=False)
        a = kappa * t + phase + wobble * np.sin(t)
        vals = np.stack([np.cos(a) * np.cos(t), np.cos(a) * np.sin(t), np.sin(a)], -1)
        return FourierCurve.from_samples(vals, max_modes=modes)
    e_r = FourierCurve.from_real({1: np.array([1.0, -1j, 0.0])})
    cos_part = FourierCurve.from_real({kappa: np.exp(1j * phase)}, dim=1)
    sin_part = FourierCurve.from_real({kappa: -1j * np.exp(1j * phase)}, dim=1)
    e_z = FourierCurve({0.0: np.array([0.0, 0.0, 1.0])})
    return cos_part * e_r + sin_part * e_z


def check_orthonormal(curve: FourierCurve, normal: FourierCurve, samples=256, tol=1e-8):
    t = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    g1 = curve.real(t, 1)
    nu = normal.real(t)
    r_dot = float(np.max(np.abs(np.einsum("ni,ni->n", nu, g1))))
    r_unit = float(np.max(np.abs(np.linalg.norm(nu, axis=-1) - 1.0)))
    if r_dot > tol or r_unit > tol:
        raise NotOrthonormal(f"normal field residuals: |nu.gamma'| = {r_dot:.2e}, ||nu|-1| = {r_unit:.2e}")
    return r_dot, r_unit


def bjorling_extend(curve: FourierCurve, normal_field: FourierCurve, v_range=(0.0, 0.3),
                    u_range=(0.0, TWO_PI), junction_edge="v0", name="bjorling", tol=1e-8):
    """Minimal sheet through ``curve`` with prescribed unit normal along it.

    ``X(u, v) = Re[gamma(w) - i Psi(w)]`` with ``w = u + i v`` and
    ``Psi(w) = int_0^w nu x gamma'``, every mode continued exactly.
    """
    check_orthonormal(curve, normal_field, tol=tol)
    integrand = normal_field.cross(curve.derivative())
    # Phi = gamma - i Psi and its derivatives share one table of exponentials
    ks = np.array(sorted(set(curve.coeffs) | set(integrand.coeffs)))
    zero = np.zeros(3, dtype=complex)
    G = np.array([curve.coeffs.get(k, zero) for k in ks])
    F = np.array([integrand.coeffs.get(k, zero) for k in ks])
    ik = 1j * ks
    nz = ks != 0
    anti = np.zeros_like(F)
    anti[nz] = F[nz] / ik[nz, None]
    F0 = F[~nz].sum(axis=0)
    const = -anti.sum(axis=0)
    C0 = G - 1j * anti
    C12 = np.concatenate([ik[:, None] * G - 1j * F, ik[:, None] ** 2 * G - 1j * ik[:, None] * F], axis=1)

    def Phi0(w, e):
        return e @ C0 - 1j * (const + w[..., None] * F0)

    def X(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        w = u + 1j * v
        return np.real(Phi0(w, np.exp(w[..., None] * ik)))

    def jet(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        w = u + 1j * v
        e = np.exp(w[..., None] * ik)
        P0 = Phi0(w, e)
        P12 = e @ C12
        P1, P2 = P12[..., :3], P12[..., 3:]
        return Jet(np.real(P0), np.real(P1), -np.imag(P1), np.real(P2), -np.imag(P2), -np.real(P2))

    periodic = np.isclose(u_range[1] - u_range[0], TWO_PI) and curve.integer_frequencies \
        and normal_field.integer_frequencies
    return ParametricPatch(
        domain=(tuple(map(float, u_range)), tuple(map(float, v_range))),
        immersion=X, jet=jet, junction_edge=junction_edge, periodic_u=bool(periodic), name=name,
    )


def balance_densities(phases):
    """Positive weights ``theta`` with ``sum theta_i (cos phi_i, sin phi_i) = 0`` for three phases."""
    a, b, c = phases
    th = np.array([np.sin(c - b), np.sin(a - c), np.sin(b - a)])
    if np.all(th < 0):
        th = -th
    if not np.all(th > 0):
        raise InvalidAngles(f"phases {phases} admit no positive balancing densities")
    return th / th.max()


def make_y_bent_helicoid(n=2, v_range=(0.0, 0.3), phases=None, densities=None, wobble=0.0,
                         name="y_bent_helicoid"):
    """Three Björling sheets over the unit circle with normals making constant mutual angles.

    Sheet ``i`` uses the normal field ``cos(n t / 2 + phi_i) e_r + sin(n t / 2 + phi_i) e_z``;
    ``n`` must be even so each field is single-valued around the circle. The
    default phases ``2 pi i / 3`` give mutual 120 deg angles and unit
    densities; other phases get the balancing densities. A nonzero ``wobble``
    adds ``wobble sin t`` to every normal angle, keeping the mutual angles.
    """
    if int(n) != n or n % 2:
        raise ValueError("rotation parameter n must be an even integer for 2pi-periodic normals")
    kappa = n / 2.0
    phases = [TWO_PI * i / 3 for i in range(3)] if phases is None else [float(x) for x in phases]
    if densities is None:
        densities = balance_densities(phases)
    gamma = circle_curve(1.0)
    sheets = [
        bjorling_extend(gamma, bent_helicoid_normal(kappa, ph, wobble), v_range, name=f"{name}[{i}]")
        for i, ph in enumerate(phases)
    ]
    M = MultiJunctionSurface(
        sheets, list(densities), JunctionCurve.circle(1.0), [Identification("v0")] * 3, name=name,
        metadata={"kind": "bjorling", "n": int(n), "v_range": list(v_range), "phases": phases, "wobble": wobble},
    )
    return orient_coherently(M, +1)


# --------------------------------------------------------------------------
# ruled junctions (non-minimal, for angle diagnostics)
# --------------------------------------------------------------------------


def make_ruled_junction(angle_funcs, radius=1.0, width=0.5, name="ruled"):
    """Sheets ``gamma(t) + s (cos a_i(t) e_r + sin a_i(t) e_z)`` swept along a circle.

    ``angle_funcs`` are callables ``t -> a_i(t)``; jets are finite differences.
    """
    R = float(radius)
    curve = JunctionCurve.circle(R)
    sheets = []
    for i, fa in enumerate(angle_funcs):
        def X(u, s, fa=fa):
            u, s = np.broadcast_arrays(np.asarray(u, float), np.asarray(s, float))
            a = fa(u * R)
            er = _stack(np.cos(u), np.sin(u), np.zeros_like(u))
            ez = np.array([0.0, 0.0, 1.0])
            d = np.cos(a)[..., None] * er + np.sin(a)[..., None] * ez
            return R * er + s[..., None] * d

        sheets.append(ParametricPatch(domain=((0.0, TWO_PI), (0.0, width)), immersion=X,
                                      junction_edge="v0", periodic_u=True, fd_step=1e-4, name=f"{name}[{i}]"))
    return MultiJunctionSurface(sheets, [1.0] * len(sheets), curve, [Identification("v0", 0.0, 1.0 / R)] * len(sheets),
                                name=name, metadata={"kind": "ruled"})


# --------------------------------------------------------------------------
# declarative construction
# --------------------------------------------------------------------------

KINDS = ("plane_sector", "catenoid_band", "flat_y", "y_catenoid", "bjorling")


@dataclass(frozen=True)
class CatalogSpec:
    """Declarative description of a catalog configuration."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown catalog kind {self.kind!r}; expected one of {KINDS}")
        for key in ("densities",):
            if key in self.params and any(not x > 0 for x in self.params[key]):
                raise ValueError("densities must be positive")
        for key in ("radius", "height", "rho0", "V", "c"):
            if key in self.params and not self.params[key] > 0:
                raise ValueError(f"{key} must be positive")

    def build(self) -> MultiJunctionSurface:
        p = dict(self.params)
        if self.kind == "flat_y":
            return make_flat_y(**p)
        if self.kind == "y_catenoid":
            return make_y_catenoid(**p)
        if self.kind == "bjorling":
            if "v_max" in p:
                p["v_range"] = (0.0, p.pop("v_max"))
            return make_y_bent_helicoid(**p)
        if self.kind == "catenoid_band":
            return make_catenoid_half(**p)
        return make_plane_sector(**p)
