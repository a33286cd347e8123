import numpy as np
import pytest

from parakahler import submanifold as sm
from parakahler.calculus import wedge21
from parakahler.linear import make_standard_basis
from parakahler.models import (
    Potential,
    embed_epsilon_complex_slice,
    embed_graph,
    embed_pq_slice,
    flat_space,
    projective_chart,
    sample_points,
)

from .test_models import GRAPH_TERMS

EPS = [-1, 1]


@pytest.fixture(scope="module", params=EPS, ids=["complex", "para"])
def proj(request):
    return projective_chart(2, request.param)


@pytest.fixture(scope="module", params=EPS, ids=["complex", "para"])
def graph(request):
    e = request.param
    return embed_graph(Potential(GRAPH_TERMS, 2, e), flat_space(2, e))


@pytest.fixture(scope="module", params=EPS, ids=["complex", "para"])
def tilted(request):
    return embed_pq_slice(1, flat_space(1, request.param, twist=0.4, tilt=0.6))


def pts(imm, count=2, seed=0):
    return imm.sample_points(count, seed)


def test_flat_slice_classification(eps):
    imm = embed_epsilon_complex_slice(2, flat_space(2, eps))
    v = sm.classify(imm, pts(imm))
    assert v.verdicts["kahler"] and v.verdicts["totally_complex"] and v.verdicts["totally_geodesic"]
    assert v.verdicts["para_quaternionic"] is False
    assert v.verdicts["integrable"] and v.verdicts["k2"]
    assert not v.exclusivity_violation and not v.degenerate_stratum
    for k in ("totally_complex", "totally_geodesic", "kahler", "almost_kahler", "psi"):
        assert v.aggregated[k] <= 1e-6
    assert v.nu_hat == 0.0


def test_flat_pq_slice(eps):
    imm = embed_pq_slice(1, flat_space(2, eps))
    v = sm.classify(imm, pts(imm))
    assert v.verdicts["para_quaternionic"] and v.verdicts["totally_geodesic"]
    assert v.verdicts["totally_complex"] is False
    # both predicates may hold on a flat ambient; exclusivity only binds when nu != 0
    assert v.verdicts["kahler"] and not v.exclusivity_violation


def test_projective_pq_slice(proj):
    imm = embed_pq_slice(1, proj)
    v = sm.classify(imm, pts(imm))
    assert v.verdicts["para_quaternionic"] and v.verdicts["totally_geodesic"]
    assert v.verdicts["kahler"] is False
    assert not v.exclusivity_violation
    assert v.aggregated["totally_geodesic"] <= 1e-4
    pd = sm.point_data(imm, pts(imm, 1)[0])
    assert pd.normal_kind == "complement" and pd.C is None
    with pytest.raises(ValueError):
        sm.shape_tensor_checks(imm, pd.u, pd=pd)


def test_projective_slice_k1_k2_k3(proj):
    imm = embed_epsilon_complex_slice(2, proj)
    v = sm.classify(imm, pts(imm))
    assert v.verdicts["kahler"] and v.verdicts["k2"] and v.verdicts["totally_complex"]
    assert v.verdicts["para_quaternionic"] is False
    assert max(v.aggregated[k] for k in ("kahler", "k2", "totally_complex")) <= 1e-3
    assert v.nu_hat == pytest.approx(4.0, rel=1e-6)


def test_degenerate_stratum_suppresses_verdicts(monkeypatch):
    imm = embed_epsilon_complex_slice(1, flat_space(1, -1))
    real = sm.predicate_residuals

    def fake(*args, **kwargs):
        r = real(*args, **kwargs)
        r["tbar_degenerate"] = True
        return r

    monkeypatch.setattr(sm, "predicate_residuals", fake)
    v = sm.classify(imm, pts(imm, 1))
    assert v.degenerate_stratum
    assert all(val is None for val in v.verdicts.values())
    assert v.residuals["kahler"]


def test_classify_needs_points():
    imm = embed_epsilon_complex_slice(1, flat_space(1, -1))
    with pytest.raises(ValueError):
        sm.classify(imm, np.zeros((0, 2)))


def test_graph_second_fundamental_form(graph):
    u = pts(graph, 1, seed=7)[0]
    pd = sm.point_data(graph, u)
    assert pd.residuals["totally_geodesic"] > 0.1
    assert max(sm.fundamental_identity_residual(graph, u, pd=pd).values()) < 1e-5
    checks = sm.shape_tensor_checks(graph, u, pd=pd)
    assert max(checks.values()) < 1e-5
    assert sm.weingarten_residual(graph, u, pd=pd) < 1e-5
    assert pd.residuals["normality"] < 1e-8 and pd.residuals["h_symmetry"] < 1e-8


def test_graph_classification(graph):
    v = sm.classify(graph, pts(graph, 2, seed=7))
    assert v.verdicts["kahler"] and v.verdicts["totally_complex"]
    assert v.verdicts["totally_geodesic"] is False


def test_graph_gauss_codazzi_ricci(graph):
    u = pts(graph, 1, seed=8)[0]
    assert max(sm.gcr_residuals(graph, u).values()) < 1e-3
    assert max(sm.ricci_check(graph, [u])["gauss_trace"]) < 1e-3
    pd = sm.point_data(graph, u)
    from parakahler.curvature import cc_properties

    assert max(cc_properties(pd.C, pd.g_frame, pd.Jc).values()) < 1e-9


def test_graph_cubic_forms(graph):
    u = pts(graph, 1, seed=9)[0]
    pd = sm.point_data(graph, u)
    dec = sm.cubic_forms(graph, u, pd=pd)
    assert np.abs(dec.plus).max() > 1e-2
    res = sm.cubic_transform_check(pd.C, pd.g_frame, pd.Jc, pd.epsilon, np.linspace(-1, 1, 5))
    assert max(res.values()) < 1e-10


def test_projective_slice_identities(proj):
    imm = embed_epsilon_complex_slice(2, proj)
    u = pts(imm, 1, seed=3)[0]
    pd = sm.point_data(imm, u)
    assert pd.residuals["totally_geodesic"] < 1e-6
    assert max(sm.gcr_residuals(imm, u).values()) < 1e-3
    rc = sm.ricci_check(imm, [u])
    assert max(rc["gauss_trace"] + rc["space_form"]) < 1e-3
    assert max(sm.domega_check(imm, [u])) < 1e-3
    assert sm.parallelism_residual(imm, u) < 1e-6
    assert sm.cc_parallel_residual(imm, u) < 1e-6
    dec = sm.cubic_forms(imm, u, pd=pd)
    assert np.abs(dec.plus).max() < 1e-6


def test_nijenhuis_psi_on_non_integrable_instance(tilted):
    for u in pts(tilted, 2, seed=5):
        r = sm.nijenhuis_psi_residual(tilted, u)
        assert r["norm_N"] > 0.1 and r["norm_psi"] > 0.1
        assert r["residual"] < 1e-3
    v = sm.classify(tilted, pts(tilted, 2, seed=5))
    assert v.verdicts["integrable"] is False


def test_kahler_form_differential_identity(tilted):
    for u in pts(tilted, 2, seed=6):
        r = sm.kahler_form_differential_residual(tilted, u)
        assert r["dF"] > 0.1 and r["residual"] < 1e-6
        closed = sm.almost_kahler_wedge_residual(tilted, u, form="closed")
        assert closed == pytest.approx(r["dF"], abs=1e-6)


def test_wedge_condition_vanishes_on_kahler_slice(eps):
    imm = embed_epsilon_complex_slice(2, projective_chart(2, eps))
    u = pts(imm, 1)[0]
    assert sm.almost_kahler_wedge_residual(imm, u, form="closed") < 1e-6
    assert sm.kahler_form_differential_residual(imm, u)["dF"] < 1e-6


def test_printed_wedge_condition_is_psi_zero(eps, rng):
    space, basis = make_standard_basis(1, eps)
    g = space.g
    J1, J2, J3 = basis.Js
    F2, F3 = J2.T @ g, J3.T @ g
    w2 = rng.normal(size=4)
    w3 = eps * w2 @ J1  # psi = w3 o J - w2 = 0
    assert sm.wedge_residual_from_forms(F2, F3, w2, w3, eps, "printed") < 1e-14
    assert sm.wedge_residual_from_forms(F2, F3, w2, w3, eps, "closed") > 0.1
    cols = []
    for i in range(8):
        v = np.eye(8)[i]
        cols.append((wedge21(F2, v[4:]) - eps * wedge21(F3, v[:4])).ravel())
    sing = np.linalg.svd(np.array(cols).T, compute_uv=False)
    assert int(np.sum(sing < 1e-10)) == 4  # exactly the psi = 0 subspace
    with pytest.raises(ValueError):
        sm.wedge_residual_from_forms(F2, F3, w2, w3, eps, "other")
