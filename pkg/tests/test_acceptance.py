"""The nine acceptance criteria, at their stated tolerances.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

import itertools

import numpy as np
import pytest

import oracles
from releq.curves import hausdorff, match_branches
from releq.polynomial import Polynomial
from releq.reduction import ReducedSystem, re_set_general
from releq.rotors import (
    FREE, RotorBodySystem, growth_rate, integrate_reduced, scenario_report, to_universal,
)
from releq.stability import StabilityClass, classify, classify_branch, linearize_at, transitions
from releq.universal import (
    DELTA0, DELTA1, DELTA2, GENERIC, QuadraticModel, classify_stratum, count_re_on_sphere,
    crossing_points, enumerate_branches, j_critical_points, min_branch_distance, pitchfork_points,
    saddle_centre_points,
)
from releq.versality import determinacy_check, family_derivatives_g, quadratic_h, tangent_space_span, versality_check

M = QuadraticModel(3.0, 2.0, 1.0)
LY, EL, UN = StabilityClass.LYAPUNOV.value, StabilityClass.ELLIPTIC.value, StabilityClass.UNSTABLE.value


def generic_alphas(rng, n, lo=0.1, hi=1.5):
    out = []
    while len(out) < n:
        a = rng.uniform(-hi, hi, size=3)
        if np.all(np.abs(a) > lo):
            out.append(a)
    return out


def _near(points, target, tol):
    return min(np.linalg.norm(np.asarray(p) - target) for p in points) < tol


# 1 ---------------------------------------------------------------------------

@pytest.mark.acceptance(1, "pitchfork locations")
@pytest.mark.parametrize("alpha,expected", [
    ((0, 0, 2), [(0, 0, 1), (0, 0, 0.5)]),
    ((0, 2, 0), [(0, -1, 0), (0, 1, 0)]),
])
def test_c1_pitchfork_locations(alpha, expected):
    expected = [np.array(e, float) for e in expected]
    formula = [p.mu for p in pitchfork_points(M, alpha)]
    marked = [m.mu for b in enumerate_branches(M, alpha, 2.0) for m in b.markers if m.kind == "pitchfork"]
    detected = [m.mu for b in re_set_general(ReducedSystem.from_family(M, alpha), 2.0)
                for m in b.markers if m.kind == "bifurcation"]
    for source in (formula, marked, detected):
        for e in expected:
            assert _near(source, e, 1e-8)
    assert len(formula) == 2
    if alpha == (0, 2, 0):
        ys = sorted(p[1] for p in formula)
        assert ys[0] < 0 < ys[1]


# 2 ---------------------------------------------------------------------------

def _component_representatives():
    reps = []
    for signs in itertools.product((1, -1), repeat=3):
        reps.append((GENERIC, np.array(signs) * np.array([1.0, 2.0, 3.0])))
    for zero in range(3):
        for signs in itertools.product((1, -1), repeat=2):
            a = np.array([1.0, 2.0, 3.0])
            a[zero] = 0
            a[[k for k in range(3) if k != zero]] *= signs
            reps.append((DELTA2, a))
    for axis in range(3):
        for s in (1, -1):
            a = np.zeros(3)
            a[axis] = 2.0 * s
            reps.append((DELTA1, a))
    reps.append((DELTA0, np.zeros(3)))
    return reps


@pytest.mark.acceptance(2, "branch topology by stratum")
@pytest.mark.parametrize("tag,alpha", _component_representatives(),
                         ids=lambda v: v if isinstance(v, str) else ",".join(f"{x:g}" for x in v))
def test_c2_topology(tag, alpha):
    assert classify_stratum(alpha).tag == tag
    br = enumerate_branches(M, alpha, 5.0)
    cps = crossing_points(br)
    if tag == GENERIC:
        assert len(br) == 3
        assert sum(b.contains_origin for b in br) == 1
        assert all(min_branch_distance(x, y) > 1e-3 for x, y in itertools.combinations(br, 2))
        assert cps == []
    elif tag == DELTA2:
        assert len(cps) == 1
    elif tag == DELTA1:
        assert len(cps) == 2
        r = sorted(np.linalg.norm(p) for p in cps)
        if alpha[1] != 0:
            # middle axis: norms |beta|/(2(b-c)) and |beta|/(2(a-b)) tie when a-b = b-c
            assert r[1] - r[0] < 1e-12
            r = sorted(np.linalg.norm(p) for p in crossing_points(
                enumerate_branches(QuadraticModel(4.0, 2.0, 1.0), alpha, 5.0)))
        assert r[1] - r[0] > 1e-6
    else:
        assert len(br) == 3
        for b in br:
            assert b.contains_origin
            # straight line through 0
            d = b.mu / np.maximum(np.linalg.norm(b.mu, axis=1, keepdims=True), 1e-300)
            nz = np.linalg.norm(b.mu, axis=1) > 0
            assert np.allclose(np.abs(d[nz] @ np.eye(3)[b.axis]), 1.0)


@pytest.mark.acceptance(2, "branch topology by stratum")
@pytest.mark.parametrize("tag,alpha", [(GENERIC, (1, 2, 3)), (DELTA2, (0, 1, 2)), (DELTA1, (2, 0, 0)),
                                       (DELTA0, (0, 0, 0))])
def test_c2_topology_by_continuation(tag, alpha):
    cb = re_set_general(ReducedSystem.from_family(M, alpha), 5.0)
    bif = []
    for b in cb:
        for m in b.markers:
            if m.kind == "bifurcation" and not any(np.linalg.norm(m.mu - q) < 1e-6 for q in bif):
                bif.append(m.mu)
    if tag == GENERIC:
        assert len(cb) == 3 and sum(b.contains_origin for b in cb) == 1 and not bif
    elif tag == DELTA2:
        assert len(bif) == 1
    elif tag == DELTA1:
        assert len(bif) == 2 and abs(np.linalg.norm(bif[0]) - np.linalg.norm(bif[1])) > 1e-6
    else:
        assert len(cb) == 3 and all(b.contains_origin for b in cb)


# 3 ---------------------------------------------------------------------------

@pytest.mark.acceptance(3, "sphere-count staircase")
@pytest.mark.parametrize("alpha", [(1, 1, 1), (1, 2, 3)])
def test_c3_staircase(alpha):
    sc = sorted(s.j for s in saddle_centre_points(M, alpha))
    frozen = sorted(j for _, j in oracles.FROZEN_SC[tuple(float(a) for a in alpha)])
    assert np.allclose(sc, frozen, rtol=1e-12)
    lo, hi = sc
    for j in np.geomspace(1e-6, lo * (1 - 1e-6), 15):
        assert count_re_on_sphere(M, alpha, j) == 2
    if hi > lo * (1 + 1e-12):
        for j in np.linspace(lo, hi, 12)[1:-1]:
            assert count_re_on_sphere(M, alpha, j) == 4
    else:
        assert alpha == (1, 1, 1)  # x <-> z symmetry makes both values coincide
    for j in np.geomspace(hi * (1 + 1e-6), 1e3, 15):
        assert count_re_on_sphere(M, alpha, j) == 6
    # jump locations within 1e-8
    for j, below, above in ((lo, 2, 4 if hi > lo * (1 + 1e-12) else 6), (hi, 4 if hi > lo * (1 + 1e-12) else 2, 6)):
        assert count_re_on_sphere(M, alpha, j - 1e-8) == below
        assert count_re_on_sphere(M, alpha, j + 1e-8) == above
    # the counts agree with an independent Lagrange-multiplier search
    for j in (0.5 * lo, 0.5 * (lo + hi), 2 * hi):
        assert count_re_on_sphere(M, alpha, j) == len(oracles.lagrange_points(M.coeffs, alpha, j))


# 4 ---------------------------------------------------------------------------

@pytest.mark.acceptance(4, "multiplicity bound")
def test_c4_j_critical_points(rng):
    for alpha in generic_alphas(rng, 20):
        R = 1.5 * max(np.linalg.norm(s.mu) for s in saddle_centre_points(M, alpha)) + 0.5
        cps = j_critical_points(M, alpha, R)
        assert len(cps) == 3 <= 4
        assert all(c.nondegenerate for c in cps)
        # independent count: turning points of sampled j along each branch
        turns = 0
        for b in enumerate_branches(M, alpha, R):
            s = np.sign(np.diff(b.j))
            turns += int(np.count_nonzero(s[1:] != s[:-1]))
        assert turns == 3


# 5 ---------------------------------------------------------------------------

@pytest.mark.acceptance(5, "stability pattern")
@pytest.mark.parametrize("abc", [(3, 2, 1), (5, 1.5, -1), (0.7, 0.4, 0.1)])
def test_c5_free_rigid_body(abc):
    m = QuadraticModel(*abc)
    a, b, c = abc
    sys = ReducedSystem.from_family(m, [0, 0, 0])
    for r in (0.1, 1.0, 3.0):
        res = classify(sys, [0, r, 0])
        assert res.cls == StabilityClass.UNSTABLE
        want = 2 * r * np.sqrt((b - c) * (a - b))
        ev = np.sort(res.spectrum.real)
        assert np.allclose(ev, [-want, want], rtol=1e-6)
        for mu in ([r, 0, 0], [0, 0, r], [-r, 0, 0], [0, 0, -r]):
            assert classify(sys, mu).cls == StabilityClass.LYAPUNOV


@pytest.mark.acceptance(5, "stability pattern")
def test_c5_zero_momentum_split(rng):
    shape = Polynomial(5, {(0, 0, 0, 2, 0): 0.5, (0, 0, 0, 0, 2): 0.5})
    for alpha in [np.array([1.0, 2.0, 3.0])] + generic_alphas(rng, 4):
        sys = ReducedSystem.from_family(M, alpha, shape=shape)
        br = [b for b in enumerate_branches(M, alpha, 1.0) if b.contains_origin][0]
        classify_branch(sys, br)
        tr = transitions(br.stability)
        assert len(tr) == 1
        k0 = int(np.flatnonzero(np.all(br.mu == 0, axis=1))[0])
        assert k0 in tr[0]
        assert {br.stability[i] for i in tr[0]} == {LY, EL}


# 6 ---------------------------------------------------------------------------

ROTOR = RotorBodySystem(np.diag([4.0, 5.0, 6.0]), 0.5 * np.eye(3), FREE, sigma=[0.3, 0.2, 0.1])


@pytest.mark.acceptance(6, "dynamics oracle")
def test_c6_re_points_are_fixed_points():
    mp = to_universal(ROTOR)
    pts = np.array([mp.to_body(mu) for b in enumerate_branches(mp.model, mp.alpha, 1.0) for mu in b.mu])
    assert len(pts) > 200
    trajs = integrate_reduced(ROTOR, pts, 100.0, record_every=1000)
    drift = max(np.max(np.linalg.norm(t.mu - t.mu[0], axis=1)) for t in trajs)
    assert drift < 1e-8


@pytest.mark.acceptance(6, "dynamics oracle")
def test_c6_conservation():
    fam = ReducedSystem.from_family(M, [0.2, -0.1, 0.3])
    starts = np.array([[0.3, 0.8, 0.5], [1.0, -0.2, 0.4], [0.05, 0.1, -0.9]])
    for t in integrate_reduced(fam, starts, 100.0, record_every=100):
        assert t.j_drift < 1e-10 and t.h_drift < 1e-8
    for t in integrate_reduced(ROTOR, starts, 100.0, record_every=100):
        assert t.j_drift < 1e-10 and t.h_drift < 1e-8


@pytest.mark.acceptance(6, "dynamics oracle")
def test_c6_growth_rate():
    sys = ReducedSystem.from_family(M, [0, 0, 0])
    lam = np.max(linearize_at(sys, [0, 1, 0]).spectrum.real)
    tr = integrate_reduced(sys, np.array([0, 1, 0]) + 1e-6 * np.array([1, 0, 0]), 8.0)
    assert growth_rate(tr, [0, 1, 0]) == pytest.approx(lam, rel=0.05)


# 7 ---------------------------------------------------------------------------

@pytest.mark.acceptance(7, "oracle equivalence")
def test_c7_continuation_vs_closed_form(rng):
    R = 2.0
    for alpha in generic_alphas(rng, 5, lo=0.2, hi=1.2):
        cb = re_set_general(ReducedSystem.from_family(M, alpha), R)
        eb = enumerate_branches(M, alpha, R)
        assert len(cb) == len(eb) == 3
        pairs = match_branches(eb, cb)
        assert len({id(b) for _, b in pairs}) == 3
        hd = max(hausdorff(a.mu, a.tangent, b.mu, b.tangent) for a, b in pairs)
        assert hd < 1e-6


# 8 ---------------------------------------------------------------------------

@pytest.mark.acceptance(8, "versality/determinacy")
def test_c8_versality_determinacy():
    h = quadratic_h(3, 2, 1)
    T = tangent_space_span(h, 1, extended=True)
    assert T.codim == 3
    comp = T.complement_basis()
    assert [int(np.flatnonzero(c)[0]) for c in comp] == [0, 1, 2]  # constant entries of row 1
    assert versality_check(h, family_derivatives_g(1), 1)[0]
    assert determinacy_check(h, 1) and determinacy_check(h, 2)
    bad = quadratic_h(3, 3, 1)
    assert tangent_space_span(bad, 1, extended=True).codim != 3
    assert not versality_check(bad, family_derivatives_g(1), 1)[0]
    assert not determinacy_check(bad, 1) and not determinacy_check(bad, 2)


# 9 ---------------------------------------------------------------------------

def _rotor(d, axis, s=0.3, ir=0.1):
    sig = np.zeros(3)
    sig[axis] = s
    return RotorBodySystem(1.0 / np.array(d, float) + ir, np.full(3, ir), FREE, sigma=sig)


@pytest.mark.acceptance(9, "rotor scenarios")
@pytest.mark.parametrize("d", [(6, 4, 2), (6, 5, 2)])
def test_c9_rotor_scenarios(d):
    spaced = d[0] - d[1] == d[1] - d[2]
    # lowest inertia axis (largest inverse inertia) = model a axis
    rep = scenario_report(_rotor(d, 0), 10.0, n_sweep=10)
    assert rep.stratum == DELTA1
    first = rep.first()
    assert first.kind == "pitchfork" and first.energy_rank == "lower"
    assert (first.before, first.after) == (LY, UN)
    # greatest inertia axis
    first = scenario_report(_rotor(d, 2), 10.0, n_sweep=10).first()
    assert first.energy_rank == "higher" and (first.before, first.after) == (LY, UN)
    # middle axis: both RE pitchfork; simultaneous iff a - b = b - c
    rep = scenario_report(_rotor(d, 1), 10.0, n_sweep=10)
    pf = [e for e in rep.events if e.kind == "pitchfork"]
    assert sorted(e.energy_rank for e in pf) == ["higher", "lower"]
    assert all((e.before, e.after) == (LY, UN) for e in pf)
    assert rep.simultaneous == spaced
    if spaced:
        assert abs(pf[0].j - pf[1].j) <= 1e-10
