import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from fpet.averages import (
    MomentQuery,
    convergence_diagnostic,
    furstenberg_moment,
    multiple_average,
    partially_characteristic_check,
    symbolic_limit,
    vdc_bound_check,
    weyl_limit,
)
from fpet.fpoly import FPolyFamily, random_good_family
from fpet.interval import TemperedSequence, tempered_family
from fpet.torus import TorusSystem, TrigPoly, act, project_factor, xi_factor

F = Fraction


def test_weyl_limit_examples():
    assert weyl_limit([F(0), F(0)]) == 1
    assert weyl_limit([0, 0, 1]) == 0
    assert weyl_limit([]) == 1


def test_weyl_limit_matches_numeric_average():
    from fpet.quadrature import osc_phase_average

    value, _, _ = osc_phase_average({F(1, 2): 1.0}, 0.0, 1e6, 1e-6)
    assert abs(value - weyl_limit([1, 0])) < 1e-2


def test_multiple_average_all_ones(plane_system, linear_pair_family):
    ones = [TrigPoly.one(2), TrigPoly.one(2)]
    res = multiple_average(plane_system, linear_pair_family, ones, (3.0, 50.0), 1e-9)
    assert res.value.terms == {(0, 0): 1.0 + 0j}
    assert res.est_error[(0, 0)] == 0.0


def test_multiple_average_k1_closed_form(circle_system):
    fam = FPolyFamily.make([[[1]]])
    f = TrigPoly.character(1, (1,))
    for T in (10.0, 500.0, 12345.0):
        res = multiple_average(circle_system, fam, [f], (0.0, T), 1e-10)
        oracle = (np.exp(2j * np.pi * T) - 1) / (2j * np.pi * T)
        assert abs(res.value.coeff((1,)) - oracle) < 1e-9


def test_multiple_average_resonant_exact(plane_system, linear_pair_family):
    fs = [TrigPoly.character(2, (1, 0)), TrigPoly.character(2, (0, -1))]
    res = multiple_average(plane_system, linear_pair_family, fs, (0.0, 37.0), 1e-9)
    assert res.value.coeff((1, -1)) == 1.0 + 0j  # phase cancels identically
    assert res.est_error[(1, -1)] == 0.0


def test_multiple_average_support_law(plane_system, linear_pair_family, rng):
    for _ in range(5):
        fs = []
        for _ in range(2):
            terms = {
                (rng.randint(-2, 2), rng.randint(-2, 2)): complex(rng.uniform(-1, 1))
                for _ in range(3)
            }
            fs.append(TrigPoly(2, terms))
        res = multiple_average(plane_system, linear_pair_family, fs, (1.0, 40.0), 1e-6)
        minkowski = {
            tuple(a + b for a, b in zip(c1, c2))
            for c1 in fs[0].support()
            for c2 in fs[1].support()
        }
        assert set(res.value.support()) <= minkowski


def test_multiple_average_threads_bitwise_equal(plane_system, linear_pair_family):
    fs = [
        TrigPoly(2, {(1, 0): 1.0, (2, 0): 0.5}),
        TrigPoly(2, {(0, 1): 1.0, (0, -2): 0.25j}),
    ]
    serial = multiple_average(plane_system, linear_pair_family, fs, (0.0, 300.0), 1e-8, threads=1)
    threaded = multiple_average(plane_system, linear_pair_family, fs, (0.0, 300.0), 1e-8, threads=4)
    assert serial.value == threaded.value
    assert serial.est_error == threaded.est_error


def test_symbolic_limit_examples(circle_system, plane_system, linear_pair_family):
    fam = FPolyFamily.make([[[1]]])
    nonresonant = symbolic_limit(circle_system, fam, [TrigPoly.character(1, (1,))])
    assert nonresonant.terms == {}
    ones = symbolic_limit(plane_system, linear_pair_family, [TrigPoly.one(2), TrigPoly.one(2)])
    assert ones.terms == {(0, 0): 1.0 + 0j}
    fs = [TrigPoly.character(2, (1, 0)), TrigPoly.character(2, (0, -1))]
    resonant = symbolic_limit(plane_system, linear_pair_family, fs)
    assert resonant.terms == {(1, -1): 1.0 + 0j}


def test_symbolic_limit_matches_projection_k1(circle_system):
    # the k = 1 limit is the conditional expectation onto the invariant factor
    from fpet.torus import isotropy_lattice

    fam = FPolyFamily.make([[[1]]])
    f = TrigPoly(1, {(0,): 0.5, (1,): 1.0, (-2,): 2.0})
    limit = symbolic_limit(circle_system, fam, [f])
    invariant = isotropy_lattice(circle_system, [[1]])
    assert limit == project_factor(f, invariant)


def test_furstenberg_probability(plane_system, linear_pair_family):
    ones = tuple(TrigPoly.one(2) for _ in range(3))
    assert furstenberg_moment(plane_system, MomentQuery(ones, linear_pair_family)) == 1.0 + 0j


def test_furstenberg_resonant_triple(plane_system, linear_pair_family):
    q = MomentQuery(
        (
            TrigPoly.character(2, (-1, 1)),
            TrigPoly.character(2, (1, 0)),
            TrigPoly.character(2, (0, -1)),
        ),
        linear_pair_family,
    )
    assert furstenberg_moment(plane_system, q) == 1.0 + 0j


def test_furstenberg_marginals(plane_system, linear_pair_family, rng):
    # with all but one observable constant, the moment is the Haar integral
    for slot in range(3):
        f = TrigPoly(2, {(0, 0): 0.7, (1, 2): 0.3j, (-1, 0): 0.1})
        fs = [TrigPoly.one(2)] * 3
        fs[slot] = f
        moment = furstenberg_moment(plane_system, MomentQuery(tuple(fs), linear_pair_family))
        assert abs(moment - f.haar()) < 1e-15


def test_furstenberg_shift_invariance_exact(plane_system, linear_pair_family, rng):
    fs = (
        TrigPoly(2, {(-1, 1): 1.0, (0, 0): 0.25}),
        TrigPoly(2, {(1, 0): 1.0, (2, 1): 0.5j}),
        TrigPoly(2, {(0, -1): 1.0, (-2, -1): -0.5}),
    )
    base = furstenberg_moment(plane_system, MomentQuery(fs, linear_pair_family))
    for j in range(1, linear_pair_family.height + 1):
        for t in (F(-1), F(1), F(-1, 3), F(1, 3), F(7)):
            q = MomentQuery(fs, linear_pair_family, shift=(j, t))
            assert furstenberg_moment(plane_system, q) == base


def test_moment_query_validation(linear_pair_family):
    with pytest.raises(ValueError):
        MomentQuery((TrigPoly.one(2),), linear_pair_family)
    with pytest.raises(ValueError):
        MomentQuery(
            tuple(TrigPoly.one(2) for _ in range(3)), linear_pair_family, shift=(3, F(1))
        )
    with pytest.raises(ValueError):
        MomentQuery(
            tuple(TrigPoly.one(2) for _ in range(3)), linear_pair_family, shift=(1, 0.5)
        )


def test_convergence_constant_observables(plane_system, linear_pair_family):
    ones = [TrigPoly.one(2), TrigPoly.one(2)]
    report = convergence_diagnostic(
        plane_system, linear_pair_family, ones, tempered_family("pinned"), 6, tol=1e-12
    )
    assert report.passed
    assert all(row.distance == 0.0 for row in report.rows)


def test_convergence_k1_decay(circle_system):
    fam = FPolyFamily.make([[[F(1, 3)]]])
    f = TrigPoly.character(1, (1,))
    report = convergence_diagnostic(
        circle_system, fam, [f], tempered_family("pinned"), 14, tol=1e-2
    )
    assert report.passed
    dists = [row.distance for row in report.rows]
    assert all(d2 <= d1 for d1, d2 in zip(dists[3:], dists[4:]))
    cauchy = [row.cauchy_diff for row in report.rows[1:]]
    assert all(c2 <= c1 for c1, c2 in zip(cauchy[2:], cauchy[3:]))


def test_convergence_sliding_same_limit(circle_system):
    fam = FPolyFamily.make([[[F(1, 3)]]])
    f = TrigPoly.character(1, (1,))
    finals = []
    for name in ("pinned", "sliding-k1", "sliding-k5"):
        report = convergence_diagnostic(
            circle_system, fam, [f], tempered_family(name), 13, tol=2e-2
        )
        assert report.passed
        finals.append(report.rows[-1].distance)
    assert max(finals) < 2e-2


def test_vdc_constant_is_tight(plane_system, linear_pair_family):
    ones = [TrigPoly.one(2), TrigPoly.one(2)]
    report = vdc_bound_check(plane_system, linear_pair_family, ones, 100.0, 10.0)
    assert report.passed
    assert report.lhs == pytest.approx(1.0, abs=1e-9)
    assert report.rhs_core == pytest.approx(1.0, abs=1e-6)
    assert report.margin == pytest.approx(0.0, abs=1e-6)


def test_vdc_resonant_both_sides_one(plane_system, linear_pair_family):
    fs = [TrigPoly.character(2, (1, 0)), TrigPoly.character(2, (0, -1))]
    report = vdc_bound_check(plane_system, linear_pair_family, fs, 1000.0, 50.0)
    assert report.passed
    assert report.lhs == pytest.approx(1.0, abs=1e-8)
    assert report.rhs_core == pytest.approx(1.0, abs=1e-5)


def test_vdc_random_small_instances(plane_system, linear_pair_family):
    rng = random.Random(5)
    for _ in range(5):
        chi1 = (rng.randint(1, 3), 0)
        chi2 = (0, rng.randint(-3, -1))
        fs = [TrigPoly.character(2, chi1), TrigPoly.character(2, chi2)]
        report = vdc_bound_check(plane_system, linear_pair_family, fs, 1e4, 1e2)
        assert report.passed


def test_characteristic_k1_always_agrees(circle_system):
    fam = FPolyFamily.make([[[F(2, 3)]]])
    f = TrigPoly(1, {(0,): 1.0, (1,): 0.5, (-1,): 0.5})
    report = partially_characteristic_check(circle_system, fam, [f])
    assert report.verdict == "AGREE"
    assert report.distance == 0.0
    assert report.witnesses == ()


def test_characteristic_projected_observable_trivially_agrees(plane_system, linear_pair_family):
    xi = xi_factor(plane_system, linear_pair_family)
    f2 = project_factor(TrigPoly(2, {(0, 1): 1.0, (1, 1): 2.0}), xi)
    fs = [TrigPoly.character(2, (1, 0)), f2]
    report = partially_characteristic_check(plane_system, linear_pair_family, fs)
    assert report.verdict == "AGREE"


def test_characteristic_resonant_pair(plane_system, linear_pair_family):
    fs = [TrigPoly.character(2, (1, 0)), TrigPoly.character(2, (0, -1))]
    report = partially_characteristic_check(plane_system, linear_pair_family, fs)
    assert report.verdict == "AGREE"
    assert report.distance == 0.0


def test_shift_consistency_linear(plane_system, linear_pair_family):
    # a common rational shift w commutes with averaging:
    # A_I(f_1 o tau^w, f_2 o tau^w) = A_I(f_1, f_2) o tau^w
    fs = [TrigPoly(2, {(1, 0): 1.0}), TrigPoly(2, {(0, 1): 0.5, (0, -1): 0.25})]
    w = [F(1, 3), F(2, 5)]
    shifted_obs = [act(plane_system, w, f) for f in fs]
    lhs = multiple_average(plane_system, linear_pair_family, shifted_obs, (0.0, 200.0), 1e-9)
    base = multiple_average(plane_system, linear_pair_family, fs, (0.0, 200.0), 1e-9)
    rhs = act(plane_system, w, base.value)
    for chi in set(lhs.value.support()) | set(rhs.support()):
        assert abs(lhs.value.coeff(chi) - rhs.coeff(chi)) < 1e-12


def test_oracle_consistency_distance_decreases(plane_system):
    fam = FPolyFamily.make([[[F(1, 3), 0]], [[0, F(1, 3)]]])
    fs = [TrigPoly.character(2, (1, 0)), TrigPoly.character(2, (0, 1))]
    limit = symbolic_limit(plane_system, fam, fs)
    dists = []
    for T in (1e2, 1e3, 1e4, 1e5):
        res = multiple_average(plane_system, fam, fs, (0.0, T), 1e-8)
        dists.append((res.value - limit).norm2())
    assert all(b < a for a, b in zip(dists, dists[1:]))
    assert dists[-1] < 1e-2
