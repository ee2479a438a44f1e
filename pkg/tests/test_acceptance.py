"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line."""
import json
import time

import numpy as np
import pytest

from mjs import cli
from mjs.catalog import (
    bent_helicoid_normal,
    bjorling_extend,
    circle_curve,
    make_catenoid_band,
    make_catenoid_half,
    make_flat_y,
    make_y_bent_helicoid,
    make_y_catenoid,
)
from mjs.fields import JunctionScalarField, compatibility_solve, field_from_vector
from mjs.geometry import integrate_patch, sample_patch
from mjs.junction import equilibrium_angles_check, minimality_residual
from mjs.lp import LpParams, build_ssy_test_function, lp_sides, white_inequality_check
from mjs.stability import BasisSpec, VariationField, minimize_rayleigh, second_variation_fd_oracle, stability_form

SQ3 = np.sqrt(3.0)


def test_c01_minimality(acceptance):
    t0 = time.perf_counter()
    F = make_flat_y(q=3)
    rf = minimality_residual(F)
    Y = make_y_catenoid(1.0)
    ry = minimality_residual(Y, samples=256)
    elapsed = time.perf_counter() - t0
    c, b = Y.metadata["c"], Y.metadata["b"]
    params_ok = np.isclose(c, SQ3 / 2, rtol=1e-14) and np.isclose(b, -(SQ3 / 2) * np.arcsinh(1 / SQ3), rtol=1e-14)
    ok = (rf.max_conormal_sum <= 1e-12 and max(rf.max_H) <= 1e-10 and ry.max_conormal_sum <= 1e-8
          and params_ok and elapsed < 5.0)
    acceptance(1, ok, f"flat_y |sum tau| = {rf.max_conormal_sum:.1e}, max|H| = {max(rf.max_H):.1e}; "
                      f"y_catenoid |sum tau| = {ry.max_conormal_sum:.1e}; {elapsed:.2f} s")
    assert ok


def test_c02_catenoid_closed_forms(acceptance):
    band = make_catenoid_band(1.0, (0.0, 1.0))
    s = sample_patch(band, (32, 32))
    e1 = float(np.max(np.abs(s.shape.normA2 - 2 / np.cosh(s.v) ** 4)))
    e2 = float(np.max(np.abs(s.shape.normA2 + 2 * s.shape.K)))
    area = integrate_patch(band, lambda u, v: np.ones_like(u), (32, 32))
    e3 = abs(area - np.pi * (1 + np.sinh(2) / 2))
    ok = e1 <= 1e-8 and e2 <= 1e-8 and e3 <= 1e-8
    acceptance(2, ok, f"|A|^2 err {e1:.1e}, |A|^2+2K err {e2:.1e}, area err {e3:.1e}")
    assert ok


def test_c03_variation_oracle(acceptance):
    M = make_y_catenoid()
    fields = {
        "e_z": lambda x: np.broadcast_to([0.0, 0.0, 1.0], x.shape),
        "position": lambda x: x,
        "e_x": lambda x: np.broadcast_to([1.0, 0.0, 0.0], x.shape),
        "quadratic": lambda x: np.stack([x[..., 0] * x[..., 2], x[..., 1] ** 2, 1 + x[..., 0] * x[..., 1]], -1),
    }
    t0 = time.perf_counter()
    worst, parts = 0.0, []
    for name, f in fields.items():
        V = VariationField.ambient(M, f)
        Q = stability_form(M, field_from_vector(M, V))
        fd, _ = second_variation_fd_oracle(M, V)
        worst = max(worst, abs(fd - Q) / max(1e-3 * abs(Q), 1e-6))
        parts.append(f"{name} Q={Q:.5g} fd={fd:.5g}")
    elapsed = time.perf_counter() - t0
    ok = worst <= 1.0 and elapsed < 30.0
    acceptance(3, ok, f"{'; '.join(parts)}; worst |fd-Q|/tol = {worst:.2e}; {elapsed:.1f} s")
    assert ok


def test_c04_instability_certificate(acceptance):
    M = make_y_catenoid()
    reps = {d: minimize_rayleigh(M, BasisSpec(d), constraint_samples=64) for d in (8, 10, 12)}
    lam = {d: r.lambda_min for d, r in reps.items()}
    spread = abs(lam[10] - lam[12]) / abs(lam[12])
    certs = all(r.Q_certificate < 0 and r.certificate_ok for r in reps.values())
    ok = all(v < 0 for v in lam.values()) and spread <= 0.10 and certs
    acceptance(4, ok, "lambda_min " + ", ".join(f"d={d}: {v:.7f}" for d, v in lam.items())
               + f"; spread(10,12) = {spread:.1e}; Q(phi*) at 2x quadrature = {reps[12].Q_certificate:.5f}")
    assert ok


def test_c05_flat_stability(acceptance):
    M = make_flat_y()
    lam = {d: minimize_rayleigh(M, BasisSpec(d)).lambda_min for d in (2, 4, 6, 8)}
    ok = all(v >= -1e-8 for v in lam.values())
    acceptance(5, ok, "lambda_min " + ", ".join(f"d={d}: {v:.5f}" for d, v in lam.items()))
    assert ok


def test_c06_compatibility_algebra(acceptance):
    rng = np.random.default_rng(6)
    M = make_y_catenoid()
    worst = 0.0
    for _ in range(100):
        A, B, c = rng.normal(size=(3, 3)), rng.normal(size=(3, 3)), rng.normal(size=3)
        V = lambda x, A=A, B=B, c=c: np.sin(x @ A.T + c) + np.cos(x @ B.T) * x[..., :1]
        worst = max(worst, compatibility_solve(M, field_from_vector(M, V), 64).residual)
    F = make_flat_y()
    agree, n = 0, 0
    for k in range(200):
        f = rng.normal(size=3)
        if k % 2:
            f[2] = -f[0] - f[1]  # triples on the compatible plane
        comp = compatibility_solve(F, JunctionScalarField.constant(f), 4).compatible
        agree += comp == (abs(f.sum()) <= 1e-8)
        n += 1
    ok = worst <= 1e-10 and agree == n
    acceptance(6, ok, f"round-trip residual max {worst:.1e} over 100 fields; "
                      f"compatible <=> |sum| <= 1e-8 on {agree}/{n} triples")
    assert ok


def test_c07_lp_machinery(acceptance):
    B = make_y_bent_helicoid(wobble=0.4)
    III = []
    for rot in (False, True):
        P = LpParams(p=1.1, r=4.0, W0={"angle": 0.4}, rotate_90=rot)
        III.append(lp_sides(B, build_ssy_test_function(B, P), P).III)
    anti = abs(III[0] + III[1])
    Y = make_y_catenoid()
    ps, II, reps = [1.05, 1.1, 1.2], [], []
    for p in ps:
        P = LpParams(p=p, r=4.0)
        rep = lp_sides(Y, build_ssy_test_function(Y, P), P)
        reps.append(rep)
        II.append(rep.II)
    slope = np.polyfit(np.log(np.array(ps) - 1), np.log(II), 1)[0]
    finite = all(r.finite for r in reps)
    clamps = sum(r.clamp_counts["tau_log_A"] + r.clamp_counts["interior"] for r in reps)
    ok = anti <= 1e-8 and abs(III[0]) > 1e-3 and abs(slope - 1) <= 0.2 and finite and clamps == 0
    acceptance(7, ok, f"III = {III[0]:.6f} vs rotated {III[1]:.6f} (sum {anti:.1e}); "
                      f"II = {', '.join(f'{x:.4f}' for x in II)}, slope {slope:.3f}; finite={finite}, clamps={clamps}")
    assert ok


def test_c08_boundary_curvature_inequality(acceptance):
    halves = []
    for V in (1.0, 2.0, 4.0):
        w = white_inequality_check(make_catenoid_half(1.0, V), 0)
        halves.append(abs(w.boundary_term) <= 1e-6 and abs(w.total_curvature - 2 * np.pi * np.tanh(V)) <= 1e-6)
    catalog = [make_flat_y()] + [make_y_catenoid(V=V) for V in (1.0, 2.0, 4.0)] + [make_y_bent_helicoid()]
    catalog += [make_catenoid_half(1.0, V) for V in (1.0, 2.0, 4.0)]
    checked, excluded, holds = 0, [], True
    for M in catalog:
        for i in range(M.q):
            w = white_inequality_check(M, i)
            if not w.applicable:
                excluded.append(M.sheets[i].name)
                continue
            checked += 1
            holds &= w.holds
    ok = all(halves) and holds
    acceptance(8, ok, f"catenoid halves exact for V in 1,2,4: {all(halves)}; inequality holds on {checked} "
                      f"non-compact sheets: {holds}; compact sheets outside the hypothesis: {len(excluded)}")
    assert ok


def test_c09_bjorling(acceptance):
    M = make_y_bent_helicoid()
    u = np.linspace(0, 2 * np.pi, 512)
    circ = max(float(np.max(np.abs(P.immersion(u, 0 * u) - circle_curve().real(u)))) for P in M.sheets)
    eq = equilibrium_angles_check(M)
    ang = float(np.max(np.abs(eq.angles[:, [0, 0, 1], [1, 2, 2]] - 2 * np.pi / 3)))
    maxH = 0.0
    for ph in (0.0, 2 * np.pi / 3, 4 * np.pi / 3):
        P = bjorling_extend(circle_curve(), bent_helicoid_normal(1.0, ph), (-0.3, 0.3))
        maxH = max(maxH, float(np.max(np.linalg.norm(sample_patch(P, (64, 32)).shape.H, axis=-1))))
    ok = circ <= 1e-12 and ang <= 1e-6 and maxH <= 1e-6
    acceptance(9, ok, f"circle err {circ:.1e}, angle err {ang:.1e}, max|H| on |v|<=0.3 {maxH:.1e}")
    assert ok


def test_c10_determinism(acceptance, tmp_path):
    cfg = {
        "catalog": {"kind": "y_catenoid", "params": {"rho0": 1.0, "V": 2.0}},
        "suites": ["diagnostics", "stability", "lp"],
        "stability": {"degree": 8, "expect": "unstable"},
        "output": {"dir": "run"},
    }
    blobs = []
    for k in (1, 2):
        d = tmp_path / f"r{k}"
        d.mkdir()
        (d / "cfg.json").write_text(json.dumps(cfg))
        assert cli.main(["run", str(d / "cfg.json")]) == 0
        blobs.append({p.name: p.read_bytes() for p in sorted((d / "run").glob("*.json"))})
    same = blobs[0] == blobs[1] and len(blobs[0]) == 4
    acceptance(10, same, f"{len(blobs[0])} JSON reports byte-identical across two runs: {same}")
    assert same
