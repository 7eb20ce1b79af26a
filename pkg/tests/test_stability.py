import math

import numpy as np
import pytest

from src.errors import DomainError, StabilityViolationError
from src.models import ModelParams, SchemeParams
from src.numerics.grid import build_stretched, build_uniform
from src.numerics.stability import (
    amplification,
    check_stable,
    classify,
    effective_spacing,
    empirical_mode_decay,
    phi_sweep,
    stability_function,
    stability_limit,
)


@pytest.mark.parametrize('rho', np.linspace(0.0, 0.99, 12))
def test_explicit_limit(rho):
    assert stability_limit(rho, 0.0, 0.0) == pytest.approx(1.0 / (1.0 + 2.0 * rho * rho), abs=1e-12)


def test_implicit_scheme_is_unconditional_below_inverse_sqrt_two():
    assert math.isinf(stability_limit(0.70, 1.0, 0.0))
    assert math.isfinite(stability_limit(0.71, 1.0, 0.0))
    assert stability_function(1.0 / math.sqrt(2.0), 1.0, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_double_implicit_scheme_threshold():
    threshold = 1.0 / (1.0 + math.sqrt(3.0))
    assert stability_function(threshold, 1.0, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert math.isinf(stability_limit(threshold - 1e-3, 1.0, 1.0))
    assert math.isfinite(stability_limit(threshold + 1e-3, 1.0, 1.0))


@pytest.mark.parametrize('rho', np.linspace(0.0, 0.999, 25))
def test_crank_nicolson_type_scheme_is_unconditional(rho):
    assert stability_function(rho, 0.5, -1.0) <= 0.0


def test_rho_outside_unit_interval_is_rejected():
    with pytest.raises(DomainError):
        stability_function(1.0, 0.5, 0.0)
    with pytest.raises(DomainError):
        stability_function(-0.1, 0.5, 0.0)


def test_amplification_at_highest_mode_matches_closed_form():
    rho, theta, sigma, lam = 0.3, 0.25, 0.5, 0.8
    gain = amplification(math.pi, lam, 1.0, rho, theta, sigma)
    a = 1.0 - theta + rho * sigma
    b = theta - rho * sigma
    expected = ((1.0 - 2.0 * lam * a) ** 2 + 8.0 * lam * lam * rho * rho) / (1.0 + 2.0 * lam * b) ** 2
    assert gain == pytest.approx(expected, rel=1e-12)


def _sup_gain_exceeds_one(lam, rho, theta, sigma, phi):
    return np.max(amplification(phi, lam, 1.0, rho, theta, sigma)) > 1.0


def test_closed_form_limit_agrees_with_phi_sweep():
    phi = phi_sweep()
    checked = 0
    for rho in np.linspace(0.0, 0.95, 10):
        for theta in np.linspace(0.0, 1.0, 10):
            for sigma in np.linspace(-1.0, 1.0, 10):
                if theta - rho * sigma < 0.0:
                    # le dénominateur de G peut s'annuler
                    continue
                f = stability_function(rho, theta, sigma)
                if f <= 0.0:
                    assert not _sup_gain_exceeds_one(50.0, rho, theta, sigma, phi)
                    continue
                if f <= 0.1:
                    continue
                low, high = 0.0, 2.0 / f
                for _ in range(80):
                    middle = 0.5 * (low + high)
                    if _sup_gain_exceeds_one(middle, rho, theta, sigma, phi):
                        high = middle
                    else:
                        low = middle
                assert 0.5 * (low + high) == pytest.approx(1.0 / f, rel=1e-8)
                checked += 1
    assert checked > 100


def test_classify_reports_verdict():
    stable = classify(0.2, 0.0, 0.0, k=0.5, h=1.0)
    assert stable.stable and not stable.unconditional
    assert stable.max_ratio == pytest.approx(1.0 / 1.08)
    assert stable.sup_gain < 1.0
    unstable = classify(0.2, 0.0, 0.0, k=1.0, h=1.0)
    assert not unstable.stable and unstable.sup_gain > 1.0
    unconditional = classify(0.2, 0.5, -1.0, k=100.0, h=1.0)
    assert unconditional.unconditional and unconditional.stable
    assert unconditional.to_dict()['limit'] is None


def test_drift_perturbs_gain_at_order_k():
    phi = phi_sweep(64)
    for k in (1e-2, 1e-3):
        base = amplification(phi, k, 0.5, 0.2, 0.5, -1.0)
        drifted = amplification(phi, k, 0.5, 0.2, 0.5, -1.0, mu=0.081)
        assert np.max(np.abs(drifted - base)) < 10.0 * k


def test_check_stable_uses_local_spacing_on_stretched_grid():
    params = ModelParams(x_lo=0.0, x_hi=16.0)
    uniform = build_uniform(0.0, 16.0, 10)
    stretched = build_stretched(16.0, 10, 0.5, params)
    assert effective_spacing(uniform) == uniform.h
    assert effective_spacing(stretched) < stretched.h
    explicit = SchemeParams(0.0, 0.0)
    check_stable(uniform, explicit, params, 0.25)
    with pytest.raises(StabilityViolationError):
        check_stable(stretched, explicit, params, 0.25)
    check_stable(stretched, SchemeParams(0.5, -1.0), params, 0.25)


def test_empirical_mode_decay_brackets_one():
    limit = 1.0 / stability_function(0.2, 0.0, 0.0)
    rates = []
    for lam in (0.9 * limit, 1.1 * limit):
        estimate = empirical_mode_decay(math.pi, lam, 1.0, 0.2, 0.0, 0.0, n_steps=1, n_samples=10_000, seed=5)
        gain = amplification(math.pi, lam, 1.0, 0.2, 0.0, 0.0)
        assert abs(estimate.rate - gain) < 3.0 * estimate.stderr
        rates.append(estimate.rate)
    assert rates[0] < 1.0 < rates[1]


def test_empirical_mode_decay_needs_samples():
    with pytest.raises(DomainError):
        empirical_mode_decay(math.pi, 0.5, 1.0, 0.2, 0.0, 0.0, n_steps=5, n_samples=100, seed=0)


def test_empirical_mode_decay_reports_overflow_as_infinite_rate():
    estimate = empirical_mode_decay(math.pi, 1e6, 1.0, 0.2, 0.0, 0.0, n_steps=400, n_samples=1000, seed=0)
    assert math.isinf(estimate.rate)


@pytest.mark.parametrize('theta, sigma', [(0.0, 0.0), (1.0, 0.0), (0.5, -1.0), (0.5, 0.5)])
def test_amplification_is_even_in_phi(theta, sigma):
    phis = np.linspace(0.0, math.pi, 33)
    gains = amplification(phis, 0.4, 1.0, 0.3, theta, sigma)
    np.testing.assert_allclose(amplification(-phis, 0.4, 1.0, 0.3, theta, sigma), gains, rtol=1e-14)
    assert gains[0] == pytest.approx(1.0, abs=1e-15)


def test_amplification_at_pi_grows_with_sigma_near_the_stability_limit():
    # régime 2 lambda (1 - theta + rho sigma + 2 rho^2) > 1, qui contient la borne 1/f
    sigmas = np.linspace(-1.0, 0.5, 16)
    gains = [amplification(math.pi, 2.0, 1.0, 0.3, 0.5, sigma) for sigma in sigmas]
    assert np.all(np.diff(gains) > 0.0)
