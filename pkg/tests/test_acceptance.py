"""Acceptance criteria 1-10, one test each; every test prints a PASS/FAIL line."""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from parakahler import submanifold as sm
from parakahler.algebra import sq_conj_array, sq_mul_array, sq_norm_array
from parakahler.calculus import structure_eq_residuals
from parakahler.cli import build
from parakahler.curvature import (
    cc_properties,
    q_invariance_residual,
    normal_block_residual,
    parallel_rtt_residual,
    r0_eval,
    ricci,
    scal,
    space_form_blocks,
)
from parakahler.linear import (
    cubic_form,
    decompose_S_prolongation,
    make_standard_basis,
    q_element,
    q_norm,
    random_s_prolongation,
    rotate_basis,
    s_prolongation_basis,
)
from parakahler.models import (
    Potential,
    embed_epsilon_complex_slice,
    embed_graph,
    embed_pq_slice,
    flat_space,
    projective_chart,
    sample_points,
)
from parakahler.scenario import bundled_scenarios, load_scenario

from .test_linear import slice_frame
from .test_models import GRAPH_TERMS


def report(number, title, checks):
    """Print one line for the criterion and assert every (value, tol) pair."""
    failed = {k: (v, t) for k, (v, t) in checks.items() if not v <= t}
    worst = ", ".join(f"{k}={v:.2e}<={t:.0e}" for k, (v, t) in checks.items())
    status = "PASS" if not failed else "FAIL"
    print(f"\ncriterion {number:2d} [{status}] {title}: {worst}")
    assert not failed, failed


def rel_bool(ok):
    return 0.0 if ok else 1.0


def frame(n, eps):
    space, basis = make_standard_basis(n, eps)
    T = slice_frame(n, eps)
    gT = T.T @ space.g @ T
    left = np.linalg.solve(gT, T.T @ space.g)
    return space.g, basis, T, gT, left, left @ basis.J1 @ T


def test_criterion_01_algebra():
    rng = np.random.default_rng(1)
    p, q, r = rng.uniform(-1, 1, size=(3, 10_000, 4))
    assoc = np.abs(sq_mul_array(sq_mul_array(p, q), r) - sq_mul_array(p, sq_mul_array(q, r))).max()
    norm = np.abs(sq_norm_array(sq_mul_array(p, q)) - sq_norm_array(p) * sq_norm_array(q)).max()
    conj = np.abs(sq_conj_array(sq_mul_array(p, q))
                  - sq_mul_array(sq_conj_array(q), sq_conj_array(p))).max()
    qq = sq_mul_array(q, sq_conj_array(q))
    qq[:, 0] -= sq_norm_array(q)
    unit = np.eye(4)
    table = max(
        np.abs(sq_mul_array(unit[1], unit[1]) + unit[0]).max(),
        np.abs(sq_mul_array(unit[2], unit[2]) - unit[0]).max(),
        np.abs(sq_mul_array(unit[3], unit[3]) - unit[0]).max(),
        np.abs(sq_mul_array(unit[1], unit[2]) - unit[3]).max(),
    )
    qn = 0.0
    coeffs = rng.uniform(-1, 1, size=(10_000, 3))
    for eps in (-1, 1):
        _, basis = make_standard_basis(1, eps)
        for c in (coeffs[:5000] if eps == -1 else coeffs[5000:]):
            L = q_element(c, basis)
            qn = max(qn, np.abs(L @ L + q_norm(c, eps) * np.eye(4)).max())
    adapted = 0.0
    for eps in (-1, 1):
        for n in (1, 2, 3):
            space, basis = make_standard_basis(n, eps)
            for theta in np.linspace(-2.0, 2.0, 21):
                adapted = max(adapted, max(rotate_basis(basis, theta).residuals(space.g).values()))
    report(1, "split-quaternion algebra, q_norm, adapted bases", {
        "table": (table, 1e-12), "assoc": (assoc, 1e-12), "norm": (norm, 1e-12),
        "conj": (conj, 1e-12), "q_conj_q": (np.abs(qq).max(), 1e-12), "q_norm": (qn, 1e-12),
        "adapted": (adapted, 1e-10),
    })


def test_criterion_02_model_curvature():
    rng = np.random.default_rng(2)
    sym = qinv = sc = hol = 0.0
    for n in (1, 2):
        for eps in (-1, 1):
            space, basis = make_standard_basis(n, eps)
            g = space.g
            R = r0_eval(basis, g, 1.0)
            sym = max(sym, max(R.symmetry_residuals().values()))
            sc = max(sc, abs(scal(R) - 4 * n * (n + 2)))
            for _ in range(10):
                X, Y = rng.normal(size=(2, 4 * n))
                for a in range(3):
                    qinv = max(qinv, q_invariance_residual(R, basis, g, 1.0, X, Y, a))
            if eps == -1:
                for _ in range(10):
                    X = rng.normal(size=4 * n)
                    X.reshape(n, 4)[:, 2:] *= 0.3
                    X /= np.sqrt(X @ g @ X)
                    JX = basis.J1 @ X
                    hol = max(hol, abs((R(X, JX) @ JX) @ g @ X - 1.0))
    report(2, "R0 symmetries, Q-invariance, scal, holomorphic value", {
        "symmetries": (sym, 1e-10), "q_invariance": (qinv, 1e-10), "scal": (sc, 1e-10),
        "holomorphic": (hol, 1e-10),
    })


def test_criterion_03_space_form_blocks():
    rng = np.random.default_rng(3)
    closed = ric = e23 = e28 = anti = 0.0
    for n in (1, 2):
        for eps in (-1, 1):
            g, basis, T, gT, left, Jc = frame(n, eps)
            nu = 1.0
            blk = space_form_blocks(basis, g, nu, T)
            ric = max(ric, np.abs(ricci(blk.r_tt_tensor()) - 0.5 * nu * (n + 1) * gT).max())
            Sb = s_prolongation_basis(gT, Jc)
            for _ in range(100):
                C = random_s_prolongation(gT, Jc, rng, Sb)
                x, y, z = rng.normal(size=(3, 2 * n))
                X, Y, Z = T @ x, T @ y, T @ z
                r = blk.residuals(X, Y)
                closed = max(closed, r["tt_closed"], r["nn_closed"])
                e23 = max(e23, normal_block_residual(blk, X, Y))
                CX = T @ np.einsum("i,ijk->jk", x, C) @ left
                e28 = max(e28, parallel_rtt_residual(blk, CX, X, Y, Z))
                anti = max(anti, parallel_rtt_residual(blk, CX, X, Y, Z, form="anticommutator"))
    print(f"\n  (symmetrized R^TT identity, not an identity: max residual {anti:.2e})")
    report(3, "space-form blocks, Ric(R^TT), Ricci-from-Gauss, parallel R^TT identity", {
        "closed_forms": (closed, 1e-10), "ricci_tt": (ric, 1e-10), "normal_block": (e23, 1e-9),
        "parallel_rtt": (e28, 1e-9),
    })


def test_criterion_04_projective_gate():
    rel = ein = se = 0.0
    npts = []
    for n in (1, 2):
        for eps in (-1, 1):
            chart = projective_chart(n, eps, gate_points=5)
            gate = chart.meta["gate"]
            npts.append(len(gate["rel"]))
            rel, ein = max(rel, max(gate["rel"])), max(ein, max(gate["einstein"]))
            nu = float(np.mean(gate["nu_hat"]))
            for x in sample_points(4 * n, 5, seed=40 + n):
                r = structure_eq_residuals(chart, x, nu)
                se = max(se, max(r["curvature"] + r["integrability"]))
    report(4, "projective chart gate and structure equations", {
        "rel": (rel, 1e-3), "einstein": (ein, 1e-3), "structure": (se, 1e-3),
        "points_short": (rel_bool(min(npts) >= 5), 0.0),
    })


def corpus_immersions():
    out = []
    for name in bundled_scenarios():
        sc = load_scenario(name)
        chart, imm, points = build(sc)
        if imm is not None:
            out.append((name, imm, points))
    return out


@pytest.fixture(scope="module")
def corpus():
    return corpus_immersions()


def test_criterion_05_flat_examples(corpus):
    worst = {"slice": 0.0, "pq_h": 0.0}
    verdict_fail = 0.0
    for eps in (-1, 1):
        for k in (1, 2):
            imm = embed_epsilon_complex_slice(k, flat_space(2, eps))
            v = sm.classify(imm, imm.sample_points(3, 11))
            verdict_fail += rel_bool(v.verdicts["kahler"] and v.verdicts["totally_complex"]
                                     and v.verdicts["totally_geodesic"])
            worst["slice"] = max(worst["slice"], v.aggregated["totally_complex"],
                                 v.aggregated["totally_geodesic"], v.aggregated["kahler"])
            pq = embed_pq_slice(1, flat_space(2, eps))
            v = sm.classify(pq, pq.sample_points(3, 12))
            verdict_fail += rel_bool(v.verdicts["para_quaternionic"])
            worst["pq_h"] = max(worst["pq_h"], v.aggregated["totally_geodesic"])
    excl = 0
    extra = [(f"pq_proj{e}", embed_pq_slice(1, projective_chart(2, e)), None) for e in (-1, 1)]
    for name, imm, points in corpus + extra:
        points = imm.sample_points(2, 13) if points is None else points
        excl += int(sm.classify(imm, points).exclusivity_violation)
    report(5, "flat slices, pq slices, exclusivity", {
        "slice_residuals": (worst["slice"], 1e-6), "pq_h": (worst["pq_h"], 1e-6),
        "verdicts": (verdict_fail, 0.0), "exclusivity_violations": (float(excl), 0.0),
    })


def test_criterion_06_projective_examples():
    k123 = ric = dom = 0.0
    for eps in (-1, 1):
        imm = embed_epsilon_complex_slice(2, projective_chart(2, eps))
        points = imm.sample_points(3, 14)
        v = sm.classify(imm, points)
        k123 = max(k123, v.aggregated["kahler"], v.aggregated["k2"],
                   v.aggregated["totally_complex"])
        ric = max(ric, max(sm.ricci_check(imm, points)["space_form"]))
        dom = max(dom, max(sm.domega_check(imm, points)))
    report(6, "projective slices: k1/k2/k3, Einstein Ricci, domega = nu F", {
        "k1_k2_k3": (k123, 1e-3), "ricci": (ric, 1e-3), "domega": (dom, 1e-3),
    })


def test_criterion_07_graph_family():
    h_min, fi, minimal, aj, gauss, cor, cc = np.inf, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    for eps in (-1, 1):
        imm = embed_graph(Potential(GRAPH_TERMS, 2, eps), flat_space(2, eps))
        for u in imm.sample_points(2, 15):
            pd = sm.point_data(imm, u)
            h_min = min(h_min, pd.residuals["totally_geodesic"])
            fi = max(fi, max(sm.fundamental_identity_residual(imm, u, pd=pd).values()))
            st = sm.shape_tensor_checks(imm, u, pd=pd)
            minimal, aj = max(minimal, st["minimal"]), max(aj, st["AJ"])
            gauss = max(gauss, sm.gcr_residuals(imm, u)["gauss"])
            cor = max(cor, max(sm.ricci_check(imm, [u])["gauss_trace"]))
            cc = max(cc, max(cc_properties(pd.C, pd.g_frame, pd.Jc).values()))
    report(7, "non-totally-geodesic graphs", {
        "h_small": (rel_bool(h_min > 0.1), 0.0), "fundamental": (fi, 1e-5), "minimal": (minimal, 1e-5),
        "AJ+JA": (aj, 1e-5), "gauss": (gauss, 1e-3), "gauss_trace": (cor, 1e-3),
        "cc_properties": (cc, 1e-9),
    })


def test_criterion_08_cubic_forms():
    rng = np.random.default_rng(8)
    trip = trans = 0.0
    thetas = np.linspace(-1.0, 1.0, 11)
    count = 0
    for eps in (-1, 1):
        for n in (1, 2):
            _, _, _, gT, _, Jc = frame(n, eps)
            Sb = s_prolongation_basis(gT, Jc)
            for i in range(250):
                C = random_s_prolongation(gT, Jc, rng, Sb)
                dec = decompose_S_prolongation(C, gT, Jc, eps)
                back = dec.plus + dec.minus
                C_back = np.einsum("ijk,kl->ilj", back.real, np.linalg.inv(gT))
                trip = max(trip, np.abs(back.imag).max(), np.abs(C_back - C).max(),
                           np.abs(back.real - cubic_form(C, gT)).max())
                if i < 20:
                    trans = max(trans, max(sm.cubic_transform_check(C, gT, Jc, eps, thetas).values()))
                count += 1
    assert count == 1000
    report(8, "cubic-form decomposition and transformation laws", {
        "round_trip": (trip, 1e-10), "transform": (trans, 1e-10),
    })


def test_criterion_09_nijenhuis(corpus):
    extra = []
    for eps in (-1, 1):
        t = embed_pq_slice(1, flat_space(1, eps, twist=0.4, tilt=0.6))
        extra.append((f"tilted{eps}", t, t.sample_points(2, 16)))
    worst = psi_on_hermitian = 0.0
    nontrivial = 0.0
    for name, imm, points in corpus + extra:
        v = sm.classify(imm, points)
        for u in points:
            r = sm.nijenhuis_psi_residual(imm, u)
            worst = max(worst, r["residual"])
            nontrivial = max(nontrivial, r["norm_N"])
        if v.verdicts.get("integrable"):
            psi_on_hermitian = max(psi_on_hermitian, v.aggregated["psi"])
    report(9, "Nijenhuis tensor vs psi reconstruction", {
        "nijenhuis_psi": (worst, 1e-3), "psi_on_hermitian": (psi_on_hermitian, 1e-3),
        "no_nontrivial_instance": (rel_bool(nontrivial > 0.1), 0.0),
    })


def test_criterion_10_cli_determinism(tmp_path):
    names = bundled_scenarios()
    runs = []
    walls = []
    for rep in range(2):
        start = time.perf_counter()
        texts = {}
        for name in names:
            out = tmp_path / f"{name}.{rep}.json"
            proc = subprocess.run(
                [sys.executable, "-m", "parakahler", "verify", "--scenario", name,
                 "--report", str(out)],
                capture_output=True, text=True, timeout=300,
            )
            assert proc.returncode == 0, (name, proc.stdout, proc.stderr)
            data = json.loads(out.read_text())
            data.pop("timestamp")
            texts[name] = json.dumps(data, sort_keys=True)
        walls.append(time.perf_counter() - start)
        runs.append(texts)
    mismatched = [n for n in names if runs[0][n] != runs[1][n]]
    report(10, f"CLI determinism over {len(names)} golden scenarios", {
        "mismatched_reports": (float(len(mismatched)), 0.0),
        "corpus_seconds": (max(walls), 60.0),
    })
