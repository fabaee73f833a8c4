import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kicked_qb.signedlog import SignedLog, leave_one_out, signed_sum, to_signed_log


def test_roundtrip_and_zero():
    for x in (3.5, -0.25, 1e-300, -7e200):
        # exp(log|x|) loses about |log x| ulps
        assert float(SignedLog.from_float(x)) == pytest.approx(x, rel=1e-13)
    zero = SignedLog.from_float(0.0)
    assert zero.sign == 0 and zero.log_magnitude == -math.inf and float(zero) == 0.0


def test_product_beyond_double_range():
    # 1000 factors of e^{10}: far beyond float range, exact in log space
    p = SignedLog.product(np.full(1000, 10.0), np.r_[-1.0, np.ones(999)])
    assert p.log_magnitude == pytest.approx(1e4) and p.sign == -1
    q = p / SignedLog(9990.0, -1)
    assert float(q) == pytest.approx(math.exp(10.0))


def test_product_with_zero_factor():
    assert SignedLog.product([1.0, -math.inf], [1.0, 0.0]).sign == 0


def test_division_by_zero_raises():
    with pytest.raises(ZeroDivisionError):
        SignedLog(0.0, 1) / SignedLog(-math.inf, 0)


def test_to_signed_log():
    logs, signs = to_signed_log([2.0, -3.0, 0.0])
    np.testing.assert_allclose(logs[:2], np.log([2.0, 3.0]))
    assert logs[2] == -math.inf
    np.testing.assert_array_equal(signs, [1, -1, 0])


def _loo_direct(x):
    return np.array([np.prod(np.delete(x, i)) for i in range(len(x))])


@pytest.mark.parametrize("x", [
    [2.0, -0.5, 3.0, 0.25],
    [0.0, 2.0, -3.0],
    [1.5, 0.0, 0.0, 2.0],
    [-1.0],
])
def test_leave_one_out_examples(x):
    logs, signs = to_signed_log(x)
    out_log, out_sign = leave_one_out(logs, signs)
    with np.errstate(over="ignore"):
        np.testing.assert_allclose(out_sign * np.exp(out_log), _loo_direct(np.array(x)), atol=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-5, 5).filter(lambda v: v == 0 or abs(v) > 1e-3), min_size=1, max_size=12))
def test_leave_one_out_property(x):
    x = np.array(x)
    logs, signs = to_signed_log(x)
    out_log, out_sign = leave_one_out(logs, signs)
    ref = _loo_direct(x)
    np.testing.assert_allclose(out_sign * np.exp(out_log), ref, rtol=1e-12, atol=1e-300)


def test_signed_sum_cancellation_and_overflow():
    s = signed_sum([800.0, 800.0 + math.log(3.0)], [-1.0, 1.0])
    assert s.sign == 1 and s.log_magnitude == pytest.approx(800.0 + math.log(2.0))
    assert signed_sum([1.0, 1.0], [1.0, -1.0]).sign == 0
    assert signed_sum([1.0], [0.0]).sign == 0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-50, 50).filter(lambda v: abs(v) > 1e-6), min_size=1, max_size=10))
def test_signed_sum_matches_float_sum(x):
    x = np.array(x)
    logs, signs = to_signed_log(x)
    s = signed_sum(logs, signs)
    assert float(s) == pytest.approx(x.sum(), rel=1e-9, abs=1e-9 * np.abs(x).sum())
