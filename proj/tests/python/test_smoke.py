import math

import numpy as np
import pytest

import simplexdrift as sdx


def random_simplex(rng, parts):
    return rng.dirichlet(np.ones(parts))


def test_extraction_roundtrip():
    rng = np.random.default_rng(7)
    for parts in (3, 6):
        for _ in range(25):
            start = random_simplex(rng, parts)
            end = random_simplex(rng, parts)
            theta2, direction, degenerate = sdx.extract_direction(start, end)
            assert 0.0 <= theta2 <= math.pi / 2 + 1e-12
            assert direction.shape == (parts - 2,)
            assert not degenerate
            back = sdx.reconstruct_endpoint(start, theta2, direction)
            np.testing.assert_allclose(back, end, atol=1e-10)
    same = random_simplex(rng, 3)
    theta2, _, degenerate = sdx.extract_direction(same, same)
    assert theta2 == 0.0
    assert degenerate


def test_extraction_rejects_bad_proportions():
    with pytest.raises(ValueError):
        sdx.extract_direction([0.9, 0.3, 0.5], [0.2, 0.3, 0.5])


def test_bessel_and_normalizer():
    assert math.exp(sdx.log_bessel_i(0.0, 1.0)) == pytest.approx(1.2660658777520084, abs=1e-10)
    # the circular normalizer is the p = 2 member of the general family
    rho = 3.7
    vm = -math.log(2 * math.pi) - sdx.log_bessel_i(0.0, rho)
    assert sdx.vmf_log_normalizer(2, rho) == pytest.approx(vm, abs=1e-12)


def test_simulate_shapes_and_labels():
    sim = sdx.simulate("iVM", D=2, n_train=30, n_test=5, seed=2)
    train = sim["train"]
    assert len(train) == 30
    assert train.locations.shape == (30, 3)
    assert train.angles.shape == (30,)
    assert train.directions.shape == (30, 2)
    np.testing.assert_allclose(np.linalg.norm(train.directions, axis=1), 1.0, atol=1e-12)
    assert set(sim["labels_train"]) <= {0, 1}
    assert np.asarray(sim["mixing"]).sum() == pytest.approx(1.0)
    assert sim["rho_train"].shape == (2, 30)


def test_fit_and_posterior_predictive():
    sim = sdx.simulate("iV", D=2, n_train=40, n_test=6, seed=11)
    fit = sdx.fit(
        sim["train"],
        K=1,
        gp_means=np.array([[-1.0, 0.0]]),
        iterations=80,
        burn_in=40,
        thin=5,
        chains=2,
        seed=5,
        em_restarts=1,
        em_max_iters=20,
    )
    assert fit.K == 1 and fit.D == 2 and fit.N == 40 and fit.chains == 2
    assert fit.draws(0) == 8
    assert 0.0 < fit.accept_rate(0) <= 1.0
    assert fit.step_size > 0.0
    assert np.isfinite(fit.em_objective)

    nu = fit.nu(0)
    assert nu.shape == (8, 1)
    assert np.all(np.isfinite(nu))
    angles = fit.mean_angle(1)
    assert angles.shape == (8, 1, 40)
    assert np.all((angles >= 0.0) & (angles < 2 * math.pi))
    assert fit.labels(0).shape == (8, 40)
    # single-component model assigns everything to component zero
    assert np.all(fit.labels(0) == 0)

    # the fitted surface should sit near the generating direction (pi)
    pooled = np.concatenate([fit.mean_angle(c).ravel() for c in range(2)])
    assert abs(sdx.circular_mean(list(pooled)) - math.pi) < 0.35

    pp = sdx.posterior_predictive(fit, sim["train"], sim["test"], replicates=30, seed=3)
    assert np.isfinite(pp["log_predictive"])
    assert pp["per_point_log"].shape == (6,)
    assert pp["posterior_draws"] == 16
    assert pp["predictive_draws"] == 30

    again = sdx.fit(
        sim["train"],
        K=1,
        gp_means=np.array([[-1.0, 0.0]]),
        iterations=80,
        burn_in=40,
        thin=5,
        chains=2,
        seed=5,
        em_restarts=1,
        em_max_iters=20,
    )
    np.testing.assert_array_equal(fit.nu(0), again.nu(0))
    np.testing.assert_array_equal(fit.varphi(1), again.varphi(1))


def test_fit_validates_inputs():
    sim = sdx.simulate("iV", D=2, n_train=10, n_test=2, seed=1)
    with pytest.raises(ValueError):
        sdx.fit(sim["train"], K=0)
    with pytest.raises(ValueError):
        sdx.fit(sim["train"], K=1, iterations=10, burn_in=20)


def test_circular_summaries():
    assert sdx.circular_mean([0.1, 2 * math.pi - 0.1]) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ArithmeticError):
        sdx.circular_mean([0.0, math.pi])
    low, high = sdx.circular_interval([6.2, 6.25, 0.05, 0.1], 0.9)
    assert sdx.circular_interval_contains(low, high, 0.0)
    assert not sdx.circular_interval_contains(low, high, math.pi)
    assert sdx.chi_square_quantile(0.95, 1) == pytest.approx(3.841458820694124, abs=1e-6)

    rng = np.random.default_rng(3)
    x = list(rng.normal(size=100))
    mirrored = x + x  # both split halves identical, so agreement is exact
    assert sdx.rhat([mirrored, mirrored]) == 1.0
    a = list(rng.normal(size=200))
    b = list(10.0 + rng.normal(size=200))
    assert sdx.rhat([a, b]) > 3.0
