import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitary_decomp.channels import (
    RHO0_DEFAULT,
    GADParams,
    KrausChannel,
    cptp_check,
    ensemble_decompose,
    gad_kraus,
    kraus_evolve_oracle,
    lambda_from_beta,
    make_ensemble,
    plus_one_ensemble,
    preset_channel,
    preset_lambda,
)
from unitary_decomp.linalg import DimensionError, ParameterError, max_abs

GAMMA = 1.52e9
IDENTITY = KrausChannel((np.eye(2, dtype=complex),), "identity")


def brute_evolve(rho, ops):
    out = np.zeros((2, 2), dtype=complex)
    for m in ops:
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    for l in range(2):
                        out[i, j] += m[i, k] * rho[k, l] * np.conj(m[j, l])
    return out


def test_t0_is_identity_map():
    ch = gad_kraus(GADParams(GAMMA, 0.7, 0.0))
    np.testing.assert_allclose(ch.operators[0], math.sqrt(0.7) * np.eye(2))
    np.testing.assert_allclose(ch.operators[2], math.sqrt(0.3) * np.eye(2))
    assert max_abs(ch.operators[1]) == 0 and max_abs(ch.operators[3]) == 0
    np.testing.assert_allclose(kraus_evolve_oracle(RHO0_DEFAULT, ch), RHO0_DEFAULT, atol=1e-15)


def test_zero_temperature_has_two_operators():
    ch = gad_kraus(GADParams(GAMMA, 1.0, 1e-9))
    assert max_abs(ch.operators[2]) == 0 and max_abs(ch.operators[3]) == 0
    assert max_abs(ch.operators[0]) > 0 and max_abs(ch.operators[1]) > 0


def test_half_life_arithmetic():
    ch = gad_kraus(GADParams(1.0, 0.5, math.log(2)))
    np.testing.assert_allclose(ch.operators[0], math.sqrt(0.5) * np.diag([1, 1 / math.sqrt(2)]), atol=1e-15)


@pytest.mark.parametrize("kw", [dict(gamma=-1, lam=1, t=0), dict(gamma=1, lam=1.2, t=0), dict(gamma=1, lam=1, t=-1)])
def test_params_out_of_range(kw):
    with pytest.raises(ParameterError):
        GADParams(**kw)


def test_lambda_from_beta():
    assert lambda_from_beta(0) == 0.5
    assert lambda_from_beta(math.inf) == 1.0
    assert lambda_from_beta(math.log(3)) == pytest.approx(0.75, abs=1e-15)
    assert lambda_from_beta(50) == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        lambda_from_beta(-0.1)


def test_presets():
    assert preset_lambda("amp-damp-zero-T") == 1.0
    assert preset_lambda("amp-damp-infinite-T") == 0.5
    assert preset_lambda("amp-damp(beta=0)") == 0.5
    assert preset_lambda("amp-damp(beta=inf)") == 1.0
    with pytest.raises(ParameterError):
        preset_lambda("depolarizing")
    with pytest.raises(ParameterError):
        preset_lambda("amp-damp(beta=x)")


def test_identity_channel_oracle():
    np.testing.assert_array_equal(kraus_evolve_oracle(RHO0_DEFAULT, IDENTITY), RHO0_DEFAULT)


def test_oracle_dimension_mismatch():
    with pytest.raises(DimensionError):
        kraus_evolve_oracle(np.eye(4) / 4, IDENTITY)


def test_zero_temperature_excited_population():
    for t in np.linspace(0, 3e-9, 13):
        ch = preset_channel("amp-damp-zero-T", t)
        ref = brute_evolve(RHO0_DEFAULT, ch.operators)
        got = kraus_evolve_oracle(RHO0_DEFAULT, ch)
        np.testing.assert_allclose(got, ref, atol=1e-15)
        assert got[1, 1].real == pytest.approx(0.75 * math.exp(-GAMMA * t), abs=1e-15)


def test_infinite_temperature_ground_population():
    for t in list(np.linspace(0, 3e-9, 13)) + [10 / GAMMA, 40 / GAMMA]:
        ch = preset_channel("amp-damp-infinite-T", t)
        ref = brute_evolve(RHO0_DEFAULT, ch.operators)
        got = kraus_evolve_oracle(RHO0_DEFAULT, ch)
        np.testing.assert_allclose(got, ref, atol=1e-15)
        assert got[0, 0].real == pytest.approx(0.5 - 0.25 * math.exp(-GAMMA * t), abs=1e-15)
    assert got[0, 0].real == pytest.approx(0.5, abs=1e-15)


def test_cptp_examples():
    assert cptp_check(IDENTITY) == 0
    ch = gad_kraus(GADParams(GAMMA, 0.5, 1e-9))
    scaled = KrausChannel(tuple(0.9 * m for m in ch.operators))
    assert cptp_check(scaled) == pytest.approx(0.19, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1e10), st.floats(0, 1), st.floats(0, 1e-8))
def test_cptp_sweep(gamma, lam, t):
    assert cptp_check(gad_kraus(GADParams(gamma, lam, t))) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(0, 5e-9))
def test_trace_and_positivity(lam, t):
    rho = kraus_evolve_oracle(RHO0_DEFAULT, gad_kraus(GADParams(GAMMA, lam, t)))
    assert abs(np.trace(rho) - 1) <= 1e-12
    assert np.linalg.eigvalsh(rho).min() >= -1e-10


def test_fixed_points():
    ground = np.diag([1, 0]).astype(complex)
    mixed = np.eye(2, dtype=complex) / 2
    for t in (0.3e-9, 2e-9):
        np.testing.assert_allclose(kraus_evolve_oracle(ground, preset_channel("amp-damp-zero-T", t)), ground, atol=1e-12)
        np.testing.assert_allclose(
            kraus_evolve_oracle(mixed, preset_channel("amp-damp-infinite-T", t)), mixed, atol=1e-12
        )


def test_ensemble_pure_state():
    ens = ensemble_decompose(np.diag([1, 0]))
    assert ens.weights == (1.0,)
    np.testing.assert_allclose(ens.states[0], [1, 0], atol=1e-15)


def test_ensemble_default_rho():
    ens = ensemble_decompose(RHO0_DEFAULT)
    # trace 1, det 1/8 -> (1 +- 1/sqrt2)/2
    expected = [(1 + 1 / math.sqrt(2)) / 2, (1 - 1 / math.sqrt(2)) / 2]
    np.testing.assert_allclose(ens.weights, expected, atol=1e-12)
    assert ens.weights[0] == pytest.approx(0.8536, abs=5e-5)
    np.testing.assert_allclose(ens.density_matrix(), RHO0_DEFAULT, atol=1e-12)


def test_plus_one_ensemble():
    ens = plus_one_ensemble()
    np.testing.assert_allclose(ens.density_matrix(), RHO0_DEFAULT, atol=1e-15)
    preset = make_ensemble(RHO0_DEFAULT, "plus-one")
    assert preset.weights == ens.weights
    np.testing.assert_array_equal(np.array(preset.states), np.array(ens.states))
    with pytest.raises(ValueError):
        make_ensemble(np.eye(2) / 2, "plus-one")


def test_ensemble_invariance_of_oracle():
    for name in ("amp-damp-zero-T", "amp-damp-infinite-T"):
        for t in (0.0, 0.5e-9, 2e-9):
            ch = preset_channel(name, t)
            direct = kraus_evolve_oracle(RHO0_DEFAULT, ch)
            for kind in ("eigen", "plus-one"):
                ens = make_ensemble(RHO0_DEFAULT, kind)
                mixed = sum(w * kraus_evolve_oracle(np.outer(v, v.conj()), ch) for w, v in ens.members)
                np.testing.assert_allclose(mixed, direct, atol=1e-12)
