"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, repeated in the terminal summary.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest
from conftest import record_criterion
from oracles import oracle_zero

from neudir import cli
from neudir.analytic import bessel_zero, disk_spectrum, square_spectrum, zero_table
from neudir.fem_scalar import mesh_matrices, scalar_spectrum
from neudir.fem_vector import div_curl_matrices, normal_trace_perp_gradient, vector_spectrum
from neudir.geometry import builtin_domain, load_polygon, square, triangulate
from neudir.verify import (
    check_inequality, convergence_study, counting_check, inequality_study, level_spectra,
    merge_spectra, min_max_crosscheck, test_space_certificate,
)

DATA = Path(__file__).parent / "data"


def _rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.abs(a - b) / np.abs(b)


def test_criterion_1_square_references(tmp_path):
    out = tmp_path / "verify.json"
    t0 = time.perf_counter()
    code = cli.run(["verify", "--domain", "builtin:square", "--levels", "5", "--kmax", "7",
                    "--no-timestamp", "--out", str(out)])
    elapsed = time.perf_counter() - t0
    data = json.loads(out.read_text())
    lam = np.array(data["dirichlet"]["values"][:4])
    mu = np.array(data["neumann"]["values"][:9])
    lam_err = _rel(lam, [2, 5, 5, 8]).max()
    mu_err = _rel(mu[1:], [1, 1, 2, 4, 4, 5, 5, 8]).max()
    ok = (code == 0 and lam_err <= 0.01 and mu_err <= 0.01 and abs(mu[0]) < 1e-8
          and elapsed < 60)
    record_criterion(1, ok, f"max rel err lambda {lam_err:.4f}, mu {mu_err:.4f}, "
                            f"|mu_1| {abs(mu[0]):.1e}, {elapsed:.1f} s")
    assert ok


def test_criterion_2_merged_spectrum_identity():
    mesh = triangulate(square(), 5)
    spec, _ = vector_spectrum(mesh, 12)
    err = _rel(spec.values, [1, 1, 2, 2, 4, 4, 5, 5, 5, 5, 8, 8]).max()
    rep = min_max_crosscheck(square(), [3, 4, 5], 12)
    ratios = rep.ratios
    ok = spec.dof <= 3000 and err <= 0.03 and all(r >= 2.0 for r in ratios)
    record_criterion(2, ok, f"{spec.dof} reduced dofs, max rel err {err:.4f}, "
                            f"deviation ratios {', '.join(f'{r:.2f}' for r in ratios)}")
    assert ok


def test_criterion_3_disk_sharpness():
    mesh = triangulate(builtin_domain("disk:256"), 4)
    neu, dir_ = level_spectra(mesh, 4, 1)
    rep = check_inequality(neu, dir_, 1)
    r = rep.records[0]
    j01, jp11 = bessel_zero("J", 0, 1) ** 2, bessel_zero("Jprime", 1, 1) ** 2
    e_lam = _rel(dir_.values[0], j01)
    e_mu = _rel(neu.values[1:3], jp11).max()
    ok = (e_lam <= 0.01 and e_mu <= 0.01 and r.mu_k2 < r.lambda_k and r.shift3_exceeds)
    record_criterion(3, ok, f"lambda_1 err {e_lam:.4f}, mu_2,3 err {e_mu:.4f}, "
                            f"mu_3 {r.mu_k2:.4f} < lambda_1 {r.lambda_k:.4f} < mu_4 {r.mu_k3:.4f}")
    assert ok


CORPUS = [("square", [4, 5]), ("hexagon", [4, 5]), ("lshape", [4, 5]), ("disk:64", [3, 4]),
          ("star12", [4, 5])]


def test_criterion_4_corpus_inequality():
    details, ok = [], True
    for name, levels in CORPUS:
        poly = load_polygon(DATA / "star12.json") if name == "star12" else builtin_domain(name)
        study = inequality_study(poly, levels, 8)
        both = all(rep.all_strict for rep in study.reports)
        ok &= study.all_strict and both
        gap = min(r.gap / r.lambda_k for r in study.finest.records)
        details.append(f"{name}@{levels[-1]} min rel gap {gap:.3f}")
    record_criterion(4, ok, "; ".join(details))
    assert ok


def test_criterion_5_exact_identities():
    worst_ident, worst_trace = 0.0, 0.0
    for name in ("square", "hexagon"):
        mesh = triangulate(builtin_domain(name), 4)
        D, C = div_curl_matrices(mesh)
        K, _ = mesh_matrices(mesh)
        phi = scalar_spectrum(mesh, "dirichlet", 5).vectors
        n = mesh.n_points
        for k in range(1, 6):
            for j in range(k):
                for comp in (0, 1):
                    u = np.zeros(2 * n)
                    u[comp * n:(comp + 1) * n] = phi[:, j]
                    a = D.energy(u) + C.energy(u)
                    g = K.energy(phi[:, j])
                    worst_ident = max(worst_ident, abs(a - g) / g)
            rep = test_space_certificate(mesh, k, counting=False)
            worst_ident = max(worst_ident, rep.identity_max_rel_error)
        for j in range(phi.shape[1]):
            worst_trace = max(worst_trace, np.abs(normal_trace_perp_gradient(mesh, phi[:, j])).max())
    ok = worst_ident <= 1e-10 and worst_trace <= 1e-12
    record_criterion(5, ok, f"identity rel err {worst_ident:.1e}, normal trace {worst_trace:.1e}")
    assert ok


def test_criterion_6_counting():
    ok, counts = True, []
    for fn in (square_spectrum, disk_spectrum):
        neu, dir_ = fn("neumann", 30), fn("dirichlet", 5)
        merged = merge_spectra(neu, dir_)
        ok &= all(counting_check(merged, dir_, k) for k in range(1, 6))
    mesh = triangulate(square(), 4)
    for k in range(1, 4):
        rep = test_space_certificate(mesh, k)
        counts.append(f"k={k}: {rep.count_below}")
        ok &= rep.count_below >= 2 * k and rep.certificate_ok
    record_criterion(6, ok, "analytic counting k<=5 on square and disk; A_h counts " + ", ".join(counts))
    assert ok


def test_criterion_7_bessel_layer():
    j01, jp11 = bessel_zero("J", 0, 1), bessel_zero("Jprime", 1, 1)
    o01, op11 = oracle_zero(0, 1), oracle_zero(1, 1, derivative=True)
    close = (abs(j01 - 2.404826) <= 1e-6 and abs(jp11 - 1.841184) <= 1e-6
             and abs(j01 - o01) <= 1e-6 and abs(jp11 - op11) <= 1e-6)
    J = {(z.order, z.index): z.value for z in zero_table("J", 11, 11)}
    Jp = {(z.order, z.index): z.value for z in zero_table("Jprime", 10, 10)}
    interlace = all(J[n, k] < J[n + 1, k] < J[n, k + 1] for n in range(11) for k in range(1, 11))
    interlace &= all(n <= Jp[n, k] < J[n, k] for n in range(1, 11) for k in range(1, 11))
    ok = close and interlace
    record_criterion(7, ok, f"j_0,1 {j01:.7f} (oracle {o01:.7f}), j'_1,1 {jp11:.7f} "
                            f"(oracle {op11:.7f}), interlacing {interlace}")
    assert ok


def test_criterion_8_convergence():
    lam = convergence_study(square(), "dirichlet", 1, [3, 4, 5])
    mu = convergence_study(square(), "neumann", 2, [3, 4, 5])
    orders = [lam.orders[-1], mu.orders[-1]]
    ok = all(abs(p - 2.0) <= 0.3 for p in orders) and lam.monotone and mu.monotone
    record_criterion(8, ok, f"order lambda_1 {orders[0]:.3f}, mu_2 {orders[1]:.3f}, "
                            f"monotone {lam.monotone and mu.monotone}")
    assert ok
