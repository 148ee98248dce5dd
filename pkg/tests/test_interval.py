import math
from fractions import Fraction

import numpy as np
import pytest

from fpet.interval import (
    TemperedSequence,
    is_tempered_prefix,
    standard_tempered_families,
    tempered_family,
    time_change_weights,
    time_changed_average,
    time_changed_average_via_weights,
)
from fpet.quadrature import ExpPhaseCurve

F = Fraction

ALPHAS = [1 / 5, 1 / 3, 2 / 5, 1 / 2, 3 / 5, 2.0, 3.0, 7 / 2]


def kernel_mass_oracle(weights):
    """Independent route: numerical quadrature of the closed-form kernel.

    The substitution t = u^alpha makes the integrand smooth even when the
    support starts at 0, keeping the oracle independent of the package's own
    antiderivative."""
    from scipy.integrate import quad

    if weights.kernel is None:
        return 0.0
    A, B = weights.support
    alpha = weights.alpha
    lo, hi = A ** (1 / alpha), B ** (1 / alpha)

    def g(u):
        t = u**alpha
        return weights.kernel(t) * alpha * u ** (alpha - 1.0)

    value, _ = quad(g, lo, hi, limit=400)
    return value


def test_pinned_is_tempered():
    seq = tempered_family("pinned")
    assert seq.K == 0
    assert is_tempered_prefix(seq, 20)


def test_sliding_is_tempered_with_equality():
    seq = TemperedSequence("unit", 1, lambda n: (float(n), 2.0 * n))
    assert is_tempered_prefix(seq, 50)


def test_quadratic_drift_is_not_tempered():
    seq = TemperedSequence("drift", 10, lambda n: (float(n * n), float(n * n + n)))
    assert not is_tempered_prefix(seq, 100)


def test_stalled_lengths_fail_growth_check():
    seq = TemperedSequence("stall", 0, lambda n: (0.0, float(min(n, 10))))
    assert is_tempered_prefix(seq, 10)
    assert not is_tempered_prefix(seq, 40)


def test_malformed_interval_raises():
    seq = TemperedSequence("bad", 0, lambda n: (5.0, 5.0))
    with pytest.raises(ValueError):
        is_tempered_prefix(seq, 3)


def test_standard_families():
    families = {s.name: s for s in standard_tempered_families()}
    assert set(families) == {"pinned", "sliding-k1", "sliding-k5", "irregular"}
    assert is_tempered_prefix(families["pinned"], 16)
    assert is_tempered_prefix(families["sliding-k5"], 16)
    assert not is_tempered_prefix(families["sliding-k5"], 16, K=4)
    assert is_tempered_prefix(families["irregular"], 200)
    with pytest.raises(ValueError):
        tempered_family("nope")


def test_weights_alpha_one_trivial():
    w = time_change_weights(1.0, (3.0, 17.0))
    assert w.w0 == 1.0 and w.kernel is None
    assert w.kernel_mass() == 0.0


@pytest.mark.parametrize("alpha", ALPHAS)
def test_mass_one_closed_form_vs_quadrature(alpha):
    w = time_change_weights(alpha, (1.0, 3.0) if alpha < 1 else (0.0, 4.0))
    closed = w.kernel_mass()
    oracle = kernel_mass_oracle(w)
    assert abs(closed - oracle) < 1e-9
    assert abs(w.w0 + closed - 1.0) < 1e-9


def test_mass_one_sweep(rng):
    for alpha in ALPHAS:
        for _ in range(12):
            a = rng.uniform(0.1, 50.0)
            b = a * rng.uniform(1.1, 1e4)
            w = time_change_weights(alpha, (a, b))
            assert abs(w.w0 + w.kernel_mass() - 1.0) < 1e-8


def test_weights_domain_errors():
    with pytest.raises(ValueError):
        time_change_weights(0.0, (1.0, 2.0))
    with pytest.raises(ValueError):
        time_change_weights(-2.0, (1.0, 2.0))
    with pytest.raises(ValueError):
        time_change_weights(0.5, (0.0, 2.0))
    with pytest.raises(ValueError):
        time_change_weights(2.0, (3.0, 2.0))


def test_time_changed_average_constant():
    const = lambda s: np.full_like(np.asarray(s, dtype=float), 2.5, dtype=complex)
    value = time_changed_average(const, 0.5, (1.0, 100.0), tol=1e-10)
    assert abs(value - 2.5) < 1e-10


def test_time_changed_average_sqrt_closed_form():
    # v(t) = e^(2 pi i t): avg of v(s^(1/2)) over (n, 2n) has the closed form
    # obtained from the antiderivative of 2 u e^(2 pi i u)
    def oracle(a, b):
        def anti(u):
            tp = 2j * np.pi
            return 2 * (u * np.exp(tp * u) / tp - np.exp(tp * u) / tp**2)

        return (anti(np.sqrt(b)) - anti(np.sqrt(a))) / (b - a)

    curve = ExpPhaseCurve({F(1): 1.0})
    prev = None
    for n in (10.0, 100.0, 1000.0, 10000.0):
        value = time_changed_average(curve, 0.5, (n, 2 * n), tol=1e-10)
        assert abs(value - oracle(n, 2 * n)) < 1e-8
        prev = abs(value)
    assert prev < 1e-2  # tends to zero


def test_dual_route_consistency_oscillatory():
    curve = ExpPhaseCurve({F(1): 0.4, F(1, 2): -0.7})
    for alpha, interval in [(1 / 3, (2.0, 400.0)), (1 / 2, (2.0, 400.0)), (2.0, (2.0, 24.0))]:
        tol = 1e-7
        direct = time_changed_average(curve, alpha, interval, tol=tol)
        via = time_changed_average_via_weights(curve, alpha, interval, tol=tol)
        assert abs(direct - via) <= 2 * tol


def test_dual_route_consistency_smooth(rng):
    for _ in range(3):
        w1, w2 = rng.uniform(-0.3, 0.3), rng.uniform(-0.2, 0.2)
        curve = ExpPhaseCurve({F(1): w1 or 0.1, F(1, 2): w2 or 0.1})
        tol = 1e-7
        direct = time_changed_average(curve, 3.0, (0.5, 12.0), tol=tol)
        via = time_changed_average_via_weights(curve, 3.0, (0.5, 12.0), tol=tol)
        assert abs(direct - via) <= 2 * tol


def test_reversibility():
    # changing time by alpha then 1/alpha is the identity on averages
    curve = ExpPhaseCurve({F(1): 0.25})
    alpha = 2.0

    class Inner:
        def __call__(self, t):
            return curve(np.asarray(t, dtype=float) ** (1.0 / alpha))

        def local_freq(self, t):
            t = np.asarray(t, dtype=float)
            with np.errstate(all="ignore"):
                return curve.local_freq(t ** (1.0 / alpha)) / alpha * t ** (1.0 / alpha - 1.0)

    tol = 1e-8
    twice = time_changed_average(Inner(), alpha, (1.0, 500.0), tol=tol)
    plain, _, _ = __import__("fpet.quadrature", fromlist=["adaptive_average"]).adaptive_average(
        curve, 1.0, 500.0, tol
    )
    assert abs(twice - plain) < 5e-7


def test_limit_equality_fractional_phase():
    # averages of e^(2 pi i theta(t)) tend to 0; the time-changed averages
    # over tempered intervals approach the same limit
    curve = ExpPhaseCurve({F(1): 1.0})
    for alpha, interval in [(1 / 3, (2.0**30, 2.0**31)), (2.0, (2.0**8, 2.0**9))]:
        value = time_changed_average(curve, alpha, interval, tol=1e-6)
        assert abs(value) < 1e-2
