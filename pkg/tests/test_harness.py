import math

import numpy as np
import pytest
from scipy import stats

from src import config
from src.errors import DomainError
from src.models import LevelEstimate, ModelParams, SchemeParams
from src.numerics.exact import dirac_hat_projection
from src.numerics.harness import (
    coarsen_path,
    combine_levels,
    error_exact,
    error_two_grid,
    level_grid,
    level_sequence,
    mlmc_level_estimate,
    optimal_samples,
    particle_oracle,
    sample_path,
    sample_paths,
)
from src.numerics.scheme import run

SCHEMES = [SchemeParams(0.0, 0.0), SchemeParams(1.0, 0.0), SchemeParams(0.5, -1.0)]


class TerminalSquare:
    """P_l = M_T^2, indépendant du niveau : corrections nulles."""

    horizon = 1.0
    alpha = None

    def time_step(self, level):
        return 0.25 * 4.0 ** (-level)

    def cost(self, level):
        return 4.0 ** level

    def __call__(self, level, path):
        return path.terminal_value() ** 2


class SquaredPathIntegral:
    """P_l = k_l sum_n M_{t_n}^2 : E[P_l] = T (T + k_l) / 2 dépend du niveau."""

    horizon = 1.0
    alpha = None

    def time_step(self, level):
        return 0.25 * 4.0 ** (-level)

    def cost(self, level):
        return 4.0 ** level

    def __call__(self, level, path):
        values = np.cumsum(path.increments, axis=0)
        return path.k * np.sum(values ** 2, axis=0)


def test_sample_path_is_reproducible():
    first = sample_path(5.0, 0.25, seed=42, level=1, index=7)
    second = sample_path(5.0, 0.25, seed=42, level=1, index=7)
    np.testing.assert_array_equal(first.draws, second.draws)
    other = sample_path(5.0, 0.25, seed=42, level=1, index=8)
    assert not np.array_equal(first.draws, other.draws)


def test_batched_paths_match_single_paths():
    batch = sample_paths(5.0, 0.25, seed=1, indices=[3, 4, 5], level=2)
    for column, index in enumerate([3, 4, 5]):
        np.testing.assert_array_equal(batch.draws[:, column], sample_path(5.0, 0.25, 1, 2, index).draws)


def test_sample_path_requires_integral_step_count():
    with pytest.raises(DomainError):
        sample_path(1.0, 0.3, seed=0)


def test_coarse_path_sums_fine_increments():
    fine = sample_paths(5.0, 1.0 / 64.0, seed=0, indices=range(3))
    coarse = coarsen_path(fine)
    assert coarse.k == pytest.approx(1.0 / 16.0)
    assert coarse.n_steps == fine.n_steps // 4
    grouped = fine.increments.reshape(coarse.n_steps, 4, 3).sum(axis=1)
    np.testing.assert_allclose(coarse.increments, grouped, atol=1e-14)
    np.testing.assert_allclose(coarse.terminal_value(), fine.terminal_value(), atol=1e-12)


def test_coarse_path_needs_multiple_of_four_steps():
    with pytest.raises(DomainError):
        coarsen_path(sample_path(1.5, 0.25, seed=0))


def test_level_sequence_keeps_mesh_ratio():
    ratios = [k / h ** 2 for h, k in (level_sequence(l, 4.0 / 3.0, 0.25) for l in range(5))]
    np.testing.assert_allclose(ratios, ratios[0])


def test_level_grid_doubles_intervals():
    params = config.credit_model()
    assert [level_grid(params, l, 1.6).J for l in range(3)] == [10, 20, 40]
    stretched = level_grid(params, 1, 1.6, alpha=0.5)
    assert stretched.J == 20 and not stretched.is_uniform
    with pytest.raises(DomainError):
        level_grid(config.reference_model(), 0, 4.0 / 3.0, alpha=0.5)


def test_level_estimate_of_level_independent_payoff():
    base = mlmc_level_estimate(0, 600, TerminalSquare(), seed=9)
    assert base.mean == pytest.approx(1.0, abs=4.0 * base.stderr)
    correction = mlmc_level_estimate(2, 600, TerminalSquare(), seed=9)
    assert abs(correction.mean) < 1e-12
    assert correction.variance < 1e-20
    assert correction.cost == 16.0 + 4.0


def test_level_estimate_does_not_depend_on_thread_count():
    single = mlmc_level_estimate(1, 700, TerminalSquare(), seed=3, threads=1)
    pooled = mlmc_level_estimate(1, 700, TerminalSquare(), seed=3, threads=4)
    assert (single.mean, single.variance) == (pooled.mean, pooled.variance)


def test_level_corrections_telescope_to_the_finest_level():
    payoff = SquaredPathIntegral()
    finest, n = 2, 4000
    estimates = [mlmc_level_estimate(l, n, payoff, seed=21) for l in range(finest + 1)]
    total, variance = combine_levels(estimates)
    k = payoff.time_step(finest)
    direct = payoff(finest, sample_paths(payoff.horizon, k, seed=22, indices=range(n), level=finest))
    combined = math.sqrt(variance + np.var(direct, ddof=1) / n)
    assert abs(total - direct.mean()) < 3.0 * combined
    assert estimates[1].mean == pytest.approx(-0.75 * 0.25 / 2.0, abs=4.0 * estimates[1].stderr)


def test_combine_levels_and_sample_allocation():
    estimates = [LevelEstimate(0, 100, 0.5, 2.0), LevelEstimate(1, 50, 0.1, 0.5)]
    total, variance = combine_levels(estimates)
    assert total == pytest.approx(0.6)
    assert variance == pytest.approx(2.0 / 100 + 0.5 / 50)
    assert optimal_samples([1.0, 0.25], [1.0, 4.0], 0.1) == [200, 50]


def test_error_measures_are_deterministic_across_threads():
    params = config.reference_model()
    scheme = SchemeParams(0.5, -1.0)
    single = error_exact(0, 300, scheme, params, seed=4, threads=1)
    pooled = error_exact(0, 300, scheme, params, seed=4, threads=3)
    assert single.value == pooled.value and single.stderr == pooled.stderr
    assert single.value > 0.0 and math.isfinite(single.value)
    two_grid = error_two_grid(1, 20, scheme, params, seed=4)
    assert two_grid.value > 0.0 and two_grid.n_samples == 20


def test_two_grid_measure_needs_nested_grids():
    params = ModelParams(x_lo=0.0, x_hi=15.0)
    with pytest.raises(DomainError):
        error_two_grid(0, 10, SchemeParams(), params, seed=0, h0=1.0, k0=0.25)


def test_particle_histogram_is_a_density():
    params = ModelParams(rho=0.0, x_lo=-20.0, x_hi=30.0)
    path = sample_path(5.0, 1.0 / 16.0, seed=0)
    result = particle_oracle(20_000, path, params, absorbing=False, seed=1)
    assert result.absorbed_fraction == 0.0
    assert np.sum(result.density * np.diff(result.edges)) == pytest.approx(1.0, abs=1e-3)


def test_particle_absorption_matches_first_passage_probability():
    params = ModelParams(rho=0.0, x0=2.0, x_lo=0.0, x_hi=16.0)
    path = sample_path(5.0, 1.0 / 256.0, seed=0)
    result = particle_oracle(100_000, path, params, absorbing=True, seed=2)
    drift, T = params.mu, params.T
    exact = (stats.norm.cdf((-params.x0 - drift * T) / math.sqrt(T))
             + math.exp(-2.0 * drift * params.x0) * stats.norm.cdf((-params.x0 + drift * T) / math.sqrt(T)))
    assert result.absorbed_fraction == pytest.approx(exact, abs=0.02)
    assert result.stderr == pytest.approx(math.sqrt(exact * (1.0 - exact) / 1e5), rel=0.1)


@pytest.mark.slow
def test_mean_square_convergence_of_three_schemes():
    params = config.reference_model()
    levels = [1, 2, 3, 4]
    exact = {}
    for scheme in SCHEMES:
        errors = [error_exact(l, config.CONVERGENCE_SAMPLES, scheme, params, seed=0) for l in levels]
        two_grid = [error_two_grid(l, config.CONVERGENCE_SAMPLES, scheme, params, seed=0) for l in levels]
        slope = np.polyfit(levels, np.log2([e.value for e in errors]), 1)[0]
        assert slope == pytest.approx(-4.0, abs=0.5)
        # e_l^2 tend vers 9 E_l^2 ; à lambda = 9/64 l'erreur fine du schéma explicite est réduite par compensation
        upper = 32.0 if scheme.label == 'expl' else 16.0
        for e, estimate in zip(errors, two_grid):
            assert 1.0 < estimate.value / e.value < upper
        exact[scheme.label] = np.array([e.value for e in errors])
    for level_values in zip(*exact.values()):
        assert max(level_values) < 8.0 * min(level_values)
    for index in range(1, len(levels)):
        assert exact['expl'][index] < exact['CN'][index] < exact['impl'][index]


@pytest.mark.slow
def test_spde_loss_agrees_with_particle_system():
    params = config.credit_model()
    scheme = SchemeParams(0.5, -1.0)
    grid = level_grid(params, 2, config.CREDIT['h0'])
    _, k = level_sequence(2, config.CREDIT['h0'], config.CREDIT['k0'])
    v0 = dirac_hat_projection(grid, params.x0)
    spde, particles = [], []
    for index in range(20):
        path = sample_path(params.T, k, seed=11, index=index)
        final = run(v0, path, scheme, params, observe=[path.n_steps])[-1]
        spde.append(1.0 - float(final.mass()))
        particles.append(particle_oracle(100_000, path, params, absorbing=True, seed=index).absorbed_fraction)

    spde, particles = np.array(spde), np.array(particles)
    combined = math.sqrt(np.var(spde, ddof=1) / 20 + np.var(particles, ddof=1) / 20)
    assert abs(spde.mean() - particles.mean()) < 3.0 * combined
    T = params.T
    sd = math.sqrt(T)
    first_passage = (stats.norm.cdf((-params.x0 - params.mu * T) / sd)
                     + math.exp(-2.0 * params.mu * params.x0) * stats.norm.cdf((-params.x0 + params.mu * T) / sd))
    for mean, values in ((spde.mean(), spde), (particles.mean(), particles)):
        assert 0.0 < mean < 0.15
        assert abs(mean - first_passage) < 4.0 * np.std(values, ddof=1) / math.sqrt(20) + 0.005
