"""Ergodic controller: weights, running coefficients, control law, loop."""

import numpy as np
import pytest

from trajmix import Gaussian, MixtureModel
from trajmix.ergodic import (
    ErgodicConfig,
    ErgodicState,
    control_step,
    ergodic_metric,
    run_from_dict,
    run_to_dict,
    simulate,
    sobolev_weights,
    update_coeffs,
)
from trajmix.fourier import FourierDomain, basis_vector, mixture_coeffs, sign_patterns


def two_gaussian_target(dom):
    return MixtureModel(
        (
            Gaussian([0.5, 0.7], [[0.05, 0.015], [0.015, 0.01]]),
            Gaussian([0.6, 0.3], [[0.013, 0.006], [0.006, 0.022]]),
        ),
        np.array([0.5, 0.5]),
    )


def fig4_config(steps=2000, u_max=0.2, dt=0.1):
    dom = FourierDomain(2.0, 2, 9)
    target = mixture_coeffs(two_gaussian_target(dom), dom)
    return ErgodicConfig(domain=dom, target_coeffs=target, u_max=u_max, dt=dt,
                         steps=steps)


class TestSobolevWeights:
    def test_zero_index_is_one(self):
        dom = FourierDomain(2.0, 2, 5)
        assert sobolev_weights(dom)[0] == 1.0

    def test_direct_value_2d(self):
        dom = FourierDomain(2.0, 2, 3)
        lam = sobolev_weights(dom)
        idx = dom.index_set()
        pos = int(np.nonzero((idx == [1, 0]).all(axis=1))[0][0])
        assert lam[pos] == pytest.approx(2 ** -1.5, rel=1e-12)
        assert lam[pos] == pytest.approx(0.35355339, rel=1e-7)

    def test_monotone_in_index_norm(self):
        dom = FourierDomain(2.0, 2, 6)
        lam = sobolev_weights(dom)
        norms = (dom.index_set() ** 2).sum(axis=1)
        order = np.argsort(norms)
        assert np.all(np.diff(lam[order]) <= 1e-15)

    def test_in_unit_interval(self):
        dom = FourierDomain(2.0, 3, 4)
        lam = sobolev_weights(dom)
        assert np.all(lam > 0) and np.all(lam <= 1)


class TestUpdateCoeffs:
    def test_first_point_is_basis_vector(self):
        dom = FourierDomain(2.0, 2, 4)
        state = ErgodicState.initial(dom, [0.2, -0.3])
        update_coeffs(state, [0.4, 0.1], dom)
        np.testing.assert_allclose(
            state.traj_coeffs, basis_vector(np.array([0.4, 0.1]), dom), rtol=1e-15
        )
        assert state.step == 1

    def test_constant_trajectory(self):
        dom = FourierDomain(2.0, 2, 4)
        x0 = np.array([0.25, 0.5])
        state = ErgodicState.initial(dom, x0)
        for _ in range(100):
            update_coeffs(state, x0, dom)
        np.testing.assert_allclose(state.traj_coeffs, basis_vector(x0, dom),
                                   rtol=1e-12)

    def test_matches_batch_average(self):
        dom = FourierDomain(2.0, 2, 5)
        rng = np.random.default_rng(0)
        pts = rng.uniform(-1, 1, size=(500, 2))
        state = ErgodicState.initial(dom, pts[0])
        for p in pts:
            update_coeffs(state, p, dom)
        batch = np.mean([basis_vector(p, dom) for p in pts], axis=0)
        np.testing.assert_allclose(state.traj_coeffs, batch, atol=1e-12)
        assert len(state.history) == 500

    def test_out_of_domain_clamped_with_warning(self):
        dom = FourierDomain(2.0, 1, 3)
        state = ErgodicState.initial(dom, [0.0])
        with pytest.warns(UserWarning):
            update_coeffs(state, [5.0], dom)
        assert state.position[0] == pytest.approx(1.0)


class TestControlStep:
    def test_first_command_with_zero_coefficients(self):
        # before any coefficient update the running array is all zeros and
        # the command pushes toward high-target regions at full speed
        cfg = fig4_config(steps=10)
        state = ErgodicState.initial(cfg.domain, [0.1, 0.1])
        assert state.step == 0
        u, eps = control_step(state, cfg)
        assert np.linalg.norm(u) == pytest.approx(cfg.u_max, abs=1e-12)
        assert eps > 0.0

    def test_zero_gap_zero_command(self):
        cfg = fig4_config(steps=10)
        state = ErgodicState.initial(cfg.domain, [0.1, 0.1])
        state.traj_coeffs = cfg.target_coeffs.copy()
        state.step = 50
        u, eps = control_step(state, cfg)
        np.testing.assert_array_equal(u, np.zeros(2))
        assert eps == 0.0

    def test_nonzero_command_has_max_speed(self):
        cfg = fig4_config(steps=10)
        rng = np.random.default_rng(1)
        for _ in range(20):
            state = ErgodicState.initial(cfg.domain, rng.uniform(-1, 1, size=2))
            state.traj_coeffs = rng.normal(size=cfg.domain.n_total) * 0.01
            state.step = 10
            u, eps = control_step(state, cfg)
            assert np.linalg.norm(u) == pytest.approx(cfg.u_max, abs=1e-12)
            assert eps >= 0.0

    def test_matches_finite_difference_descent(self):
        # the raw command equals -(t+1) times the gradient of the
        # trajectory-extension metric with respect to the next position;
        # starting from a constant trajectory (running average == basis
        # vector at the position) makes the identity exact up to h^2
        dom = FourierDomain(2.0, 2, 6)
        rng = np.random.default_rng(2)
        t = 500
        for trial in range(5):
            target = rng.normal(size=dom.n_total) * 0.05
            target[0] = 1.0 / dom.period ** 2
            cfg = ErgodicConfig(domain=dom, target_coeffs=target, u_max=1.0,
                                dt=0.1, steps=1)
            pos = rng.uniform(-0.9, 0.9, size=2)
            state = ErgodicState.initial(dom, pos)
            state.traj_coeffs = basis_vector(pos, dom)
            state.step = t
            u, _ = control_step(state, cfg)

            def extended_metric(y):
                w_next = (t * state.traj_coeffs + basis_vector(y, dom)) / (t + 1)
                return ergodic_metric(w_next, cfg.target_coeffs, cfg.weights)

            h = 1e-4
            grad = np.empty(2)
            for d in range(2):
                e = np.zeros(2)
                e[d] = h
                grad[d] = (
                    extended_metric(pos + e) - extended_metric(pos - e)
                ) / (2 * h)
            raw = -(t + 1) * grad
            np.testing.assert_allclose(
                u, raw * cfg.u_max / np.linalg.norm(raw), rtol=1e-5
            )

    def test_weight_rescaling_leaves_direction(self):
        cfg = fig4_config(steps=10)
        scaled = ErgodicConfig(
            domain=cfg.domain, target_coeffs=cfg.target_coeffs, u_max=cfg.u_max,
            dt=cfg.dt, steps=cfg.steps, weights=cfg.weights * 0.25,
        )
        state = ErgodicState.initial(cfg.domain, [0.4, -0.2])
        state.traj_coeffs = np.full(cfg.domain.n_total, 0.01)
        state.step = 7
        u1, _ = control_step(state, cfg)
        u2, _ = control_step(state, scaled)
        np.testing.assert_allclose(u1, u2, atol=1e-12)


class TestMetric:
    def test_nonnegative_and_zero_iff_match(self):
        dom = FourierDomain(2.0, 2, 4)
        lam = sobolev_weights(dom)
        rng = np.random.default_rng(3)
        w = rng.normal(size=dom.n_total)
        assert ergodic_metric(w, w, lam) == 0.0
        assert ergodic_metric(w, w + 1e-3, lam) > 0.0


class TestSimulate:
    def test_stationary_when_dt_zero(self):
        cfg = fig4_config(steps=50, dt=0.0)
        res = simulate(cfg, [0.3, 0.3])
        np.testing.assert_array_equal(res.positions, np.tile([0.3, 0.3], (50, 1)))

    def test_deterministic(self):
        cfg = fig4_config(steps=200)
        a = simulate(cfg, [0.1, 0.1])
        b = simulate(cfg, [0.1, 0.1])
        np.testing.assert_array_equal(a.positions, b.positions)
        np.testing.assert_array_equal(a.metrics, b.metrics)

    def test_velocity_bound_respected(self):
        cfg = fig4_config(steps=300)
        res = simulate(cfg, [0.1, 0.1])
        stepped = np.diff(np.vstack([[0.1, 0.1], res.positions]), axis=0)
        speeds = np.linalg.norm(stepped, axis=1) / cfg.dt
        assert np.all(speeds <= cfg.u_max + 1e-12)

    def test_metric_decreases_with_coverage(self):
        cfg = fig4_config(steps=2000)
        res = simulate(cfg, [0.1, 0.1])
        assert res.metrics[1999] <= res.metrics[199] / 5.0

    def test_recursive_matches_batch_after_run(self):
        cfg = fig4_config(steps=400)
        res = simulate(cfg, [0.1, 0.1])
        batch = np.mean(
            [basis_vector(p, cfg.domain) for p in res.state.history], axis=0
        )
        np.testing.assert_allclose(res.state.traj_coeffs, batch, atol=1e-10)

    def test_tracking_limit_near_delta_target(self):
        # almost-a-point target: the controller tracks (one mirror image of)
        # the center and stays in its neighborhood
        L = 2.0
        dom = FourierDomain(L, 2, 9)
        center = np.array([0.55, 0.35])
        sigma = L / 1000
        target = mixture_coeffs(
            MixtureModel((Gaussian(center, sigma ** 2 * np.eye(2)),),
                         np.array([1.0])),
            dom,
        )
        cfg = ErgodicConfig(domain=dom, target_coeffs=target, u_max=0.2,
                            dt=0.05, steps=2000)
        res = simulate(cfg, [-0.7, -0.8])
        mirrors = sign_patterns(2) * center
        tail = res.positions[1000:]
        dists = [
            min(np.linalg.norm(p - m) for m in mirrors) for p in tail
        ]
        assert max(dists) < 20 * sigma  # converged and stays

    def test_x0_outside_domain_rejected(self):
        cfg = fig4_config(steps=5)
        with pytest.raises(ValueError):
            simulate(cfg, [5.0, 0.0])


class TestConfigValidation:
    def test_u_max_positive(self):
        dom = FourierDomain(2.0, 1, 3)
        with pytest.raises(ValueError):
            ErgodicConfig(domain=dom, target_coeffs=np.zeros(3), u_max=0.0,
                          dt=0.1, steps=10)

    def test_weights_range_checked(self):
        dom = FourierDomain(2.0, 1, 3)
        with pytest.raises(ValueError):
            ErgodicConfig(domain=dom, target_coeffs=np.zeros(3), u_max=1.0,
                          dt=0.1, steps=10, weights=np.array([1.0, 2.0, 0.5]))

    def test_run_round_trip(self):
        dom = FourierDomain(2.0, 2, 5)
        target = two_gaussian_target(dom)
        cfg = ErgodicConfig(domain=dom,
                            target_coeffs=mixture_coeffs(target, dom),
                            u_max=0.2, dt=0.1, steps=100)
        data = run_to_dict(cfg, [0.1, 0.2], target)
        cfg2, x0 = run_from_dict(data)
        np.testing.assert_array_equal(cfg2.target_coeffs, cfg.target_coeffs)
        np.testing.assert_array_equal(x0, [0.1, 0.2])
        assert cfg2.steps == 100 and cfg2.domain == dom
