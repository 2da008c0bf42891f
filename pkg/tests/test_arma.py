import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rcdarma.arma import (
    ArmaModel, FilterMemory, RationalTransferFunction, cascade, filter_step, impulse_response,
    inverse, partial_fractions, poly_roots, run_filter, transfer_function, validate, whitened_signal_tf,
)
from rcdarma.errors import AssumptionViolation, NumericDomainError

from conftest import dc_pair, random_arma


def test_white_model_passes_input_through():
    x = np.array([1.0, -2.0, 0.5, 3.0])
    np.testing.assert_allclose(run_filter(ArmaModel([], [], 1.0), x), x)


def test_ar1_impulse_response_is_geometric():
    h = impulse_response(ArmaModel([0.5], [], 2.0), 6).samples
    np.testing.assert_allclose(h, 2.0 * 0.5 ** np.arange(6))


def test_ma1_impulse_response():
    h = impulse_response(ArmaModel([], [0.3], 1.0), 4).samples
    np.testing.assert_allclose(h, [1.0, 0.3, 0.0, 0.0])


def test_filter_memory_has_fixed_size():
    model = ArmaModel([0.2, 0.1], [0.4], 1.0)
    mem = FilterMemory.for_model(model)
    for x in np.linspace(-1, 1, 50):
        filter_step(model, mem, x)
    assert len(mem) == 3


def test_filter_rejects_nan():
    with pytest.raises(NumericDomainError):
        filter_step(ArmaModel([0.5]), FilterMemory(1, 0), float("nan"))


@pytest.mark.parametrize("gain", [0.0, float("inf")])
def test_gain_must_be_finite_nonzero(gain):
    with pytest.raises(NumericDomainError):
        ArmaModel([], [], gain)


def test_json_round_trip():
    m = ArmaModel([0.5, -0.1], [0.3], 2.5)
    assert ArmaModel.from_json(m.to_json()) == m


def test_filter_matches_scipy_lfilter(rng):
    from scipy.signal import lfilter

    for _ in range(20):
        m = random_arma(rng)
        x = rng.standard_normal(200)
        ref = lfilter(m.gain * np.r_[1.0, m.ma_coeffs], np.r_[1.0, -np.asarray(m.ar_coeffs)], x)
        np.testing.assert_allclose(run_filter(m, x), ref, rtol=1e-10, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False), min_size=1, max_size=6))
def test_poly_roots_reconstruct_polynomial(roots):
    coeffs = np.poly(roots)
    found = poly_roots(coeffs)
    np.testing.assert_allclose(np.poly(found), coeffs, atol=1e-7 * max(1.0, np.abs(coeffs).max()))


def test_poly_roots_real_quadratic():
    np.testing.assert_allclose(sorted(poly_roots([1.0, -3.0, 2.0]).real), [1.0, 2.0])


def test_transfer_function_matches_frequency_response(rng):
    for _ in range(10):
        m = random_arma(rng)
        tf = transfer_function(m)
        z = cmath.exp(0.7j)
        w = 1 / z
        num = m.gain * (1 + sum(c * w ** (j + 1) for j, c in enumerate(m.ma_coeffs)))
        den = 1 - sum(c * w ** (j + 1) for j, c in enumerate(m.ar_coeffs))
        assert abs(tf(z) - num / den) < 1e-9 * max(1, abs(num / den))


def test_numerator_denominator_ascending_powers():
    tf = transfer_function(ArmaModel([0.5], [0.25], 2.0))
    np.testing.assert_allclose(tf.numerator(), [2.0, 0.5])
    np.testing.assert_allclose(tf.denominator(), [1.0, -0.5])


def test_partial_fractions_impulse_matches_filter(rng):
    for _ in range(20):
        m = random_arma(rng, min_p=1, max_q=2)
        if m.q >= m.p:
            continue
        tf = partial_fractions(transfer_function(m))
        np.testing.assert_allclose(tf.impulse(40).real, impulse_response(m, 40).samples, atol=1e-9)


def test_partial_fractions_with_pole_at_origin():
    tf = partial_fractions(RationalTransferFunction(1.0, (), (0.0, 0.5)))
    expected = run_filter(ArmaModel([0.5, 0.0], [], 1.0), np.r_[1.0, np.zeros(9)])
    np.testing.assert_allclose(tf.impulse(10).real, expected, atol=1e-12)


def test_dc_in_integrated_noise_cancels_shared_root():
    signal, noise = dc_pair(0.4, 1.0, 5.0)
    tf = whitened_signal_tf(signal, noise)
    assert len(tf.cancelled) == 1
    np.testing.assert_allclose(tf.poles, [-0.4])
    np.testing.assert_allclose(tf.residues, [0.2])


def test_unit_pole_flagged():
    tf = whitened_signal_tf(*dc_pair(1.0))
    assert abs(tf.rho - 1.0) < 1e-12


def test_cancellation_inside_one_model_rejected():
    with pytest.raises(AssumptionViolation) as err:
        whitened_signal_tf(ArmaModel([0.5], [-0.5], 1.0), ArmaModel([], [], 1.0), agent=4)
    assert err.value.kind == "cancellation" and err.value.agent == 4
    assert "0.5" in str(err.value)


def test_repeated_pole_rejected():
    with pytest.raises(AssumptionViolation) as err:
        whitened_signal_tf(ArmaModel([1.0, -0.25], [], 1.0), ArmaModel([], [], 1.0))
    assert err.value.kind == "repeated_pole"


def test_not_strictly_proper_rejected():
    with pytest.raises(AssumptionViolation) as err:
        whitened_signal_tf(ArmaModel([0.5], [0.2], 1.0), ArmaModel([], [], 1.0))
    assert err.value.kind == "not_strictly_proper"


def test_non_unique_dominant_pole_rejected():
    # poles at +0.5 and -0.5
    with pytest.raises(AssumptionViolation) as err:
        whitened_signal_tf(ArmaModel([0.0, 0.25], [], 1.0), ArmaModel([], [], 1.0))
    assert err.value.kind == "non_unique_dominant_pole"


def test_unstable_rejected():
    with pytest.raises(AssumptionViolation) as err:
        whitened_signal_tf(ArmaModel([1.5], [], 1.0), ArmaModel([], [], 1.0))
    assert err.value.kind == "unstable"


def test_cascade_without_cancel_rejects_shared_root():
    f = transfer_function(ArmaModel([0.5], [], 1.0))
    g = inverse(transfer_function(ArmaModel([0.5], [0.1], 1.0)))
    with pytest.raises(AssumptionViolation):
        cascade(f, g)


def test_validate_accepts_simple_model():
    validate(partial_fractions(transfer_function(ArmaModel([0.3], [], 1.0))))


@pytest.mark.parametrize("mult", [2, 3])
def test_repeated_poles_detected_up_to_order_three(mult):
    ar = -np.poly([0.7] * mult)[1:]
    with pytest.raises(AssumptionViolation) as err:
        whitened_signal_tf(ArmaModel(ar, [], 1.0), ArmaModel([], [], 1.0))
    assert err.value.kind == "repeated_pole"
