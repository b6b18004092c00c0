import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oua.dynamics import (
    SIGMA_FLOOR,
    Hyperparams,
    LearnerState,
    MetaState,
    learner_as_sde,
    meta_sigma_dynamics,
    mu_drift,
    rbar_drift,
    rpe,
    stack_state,
    stacked_layout,
    stationary_covariance,
    theta_dynamics,
)
from oua.environments import supervised_task
from oua.models import tanh_scalar_model
from oua.sde import TimeGrid, WienerSource, integrate


def constant_reward_env(r0=-1.0):
    """One-input environment whose reward never changes."""

    class Env:
        input_dim = 1

        @staticmethod
        def input_fn(t, env_state):
            return np.array([0.0])

        @staticmethod
        def reward_fn(t, x, y, env_state):
            return r0

    return Env()


def scalar_state(theta=0.0, mu=0.0, rbar=0.0):
    return LearnerState(theta=np.array([theta]), mu=np.array([mu]), rbar=rbar)


class TestHyperparams:
    def test_isotropic_broadcast(self):
        hp = Hyperparams.isotropic(lam=1.0, eta=2.0, rho=3.0, sigma=0.4, n=3)
        assert hp.n == 3
        assert np.array_equal(hp.sigma, np.full(3, 0.4))

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(lam=-1.0, eta=1.0, rho=1.0, sigma=np.ones(1)),
            dict(lam=1.0, eta=-0.1, rho=1.0, sigma=np.ones(1)),
            dict(lam=1.0, eta=1.0, rho=-2.0, sigma=np.ones(1)),
            dict(lam=1.0, eta=1.0, rho=1.0, sigma=np.array([-0.3])),
            dict(lam=1.0, eta=1.0, rho=1.0, sigma=np.array([np.nan])),
        ],
    )
    def test_rejects_negative_rates(self, kwargs):
        with pytest.raises(ValueError):
            Hyperparams(**kwargs)


class TestStates:
    def test_learner_state_shape_check(self):
        with pytest.raises(ValueError):
            LearnerState(theta=np.zeros(2), mu=np.zeros(3), rbar=0.0)

    def test_learner_state_finiteness(self):
        with pytest.raises(ValueError):
            LearnerState(theta=np.array([np.inf]), mu=np.zeros(1), rbar=0.0)

    def test_meta_state_finiteness(self):
        with pytest.raises(ValueError):
            MetaState(sigma=np.nan, mu_sigma=0.1, lam_sigma=1.0, eta_sigma=1.0, meta_diffusion=0.1)


class TestDriftPieces:
    def test_rpe(self):
        assert rpe(-2.0, -0.5) == -1.5

    def test_rbar_drift(self):
        assert rbar_drift(-2.0, -0.5, rho=2.0) == -3.0

    def test_theta_drift_pulls_toward_mean(self):
        hp = Hyperparams.isotropic(lam=2.0, eta=0.0, rho=1.0, sigma=0.3, n=1)
        drift, diffusion = theta_dynamics(scalar_state(theta=0.5, mu=1.0), hp)
        assert drift[0] == pytest.approx(1.0)
        assert diffusion[0] == 0.3

    def test_mu_drift_is_gated_by_prediction_error(self):
        hp = Hyperparams.isotropic(lam=1.0, eta=3.0, rho=1.0, sigma=0.3, n=1)
        state = scalar_state(theta=0.7, mu=0.5)
        assert mu_drift(state, hp, delta_r=-0.5)[0] == pytest.approx(-0.3)
        assert mu_drift(state, hp, delta_r=0.0)[0] == 0.0

    def test_meta_sigma_dynamics(self):
        meta = MetaState(sigma=0.2, mu_sigma=0.1, lam_sigma=2.0, eta_sigma=3.0, meta_diffusion=0.05)
        dsigma, diffusion, dmu_sigma = meta_sigma_dynamics(meta, delta_r=-1.0)
        assert dsigma == pytest.approx(-0.2)
        assert diffusion == 0.05
        assert dmu_sigma == pytest.approx(-0.3)


class TestStationaryCovariance:
    def test_matches_closed_form(self):
        hp = Hyperparams(lam=2.0, eta=0.0, rho=1.0, sigma=np.array([0.2, 0.4]))
        cov = stationary_covariance(hp)
        assert cov == pytest.approx(np.diag([0.01, 0.04]))

    def test_reference_value(self):
        hp = Hyperparams.isotropic(lam=1.0, eta=0.0, rho=1.0, sigma=0.3, n=1)
        assert stationary_covariance(hp)[0, 0] == pytest.approx(0.045)

    def test_rejects_nonpositive_lam(self):
        with pytest.raises(ValueError):
            stationary_covariance(Hyperparams.isotropic(lam=0.0, eta=0.0, rho=1.0, sigma=0.3, n=1))


class TestStackedLayout:
    def test_scalar_layout(self):
        model = tanh_scalar_model()
        env = supervised_task(model, np.array([1.0]))
        layout = stacked_layout(model, env)
        assert layout.state_dim == 4  # theta, mu, rbar, G
        assert layout.wiener_dim == 1
        assert layout.labels() == ["theta0", "mu0", "rbar", "G"]

    def test_meta_layout_appends_sigma_block(self):
        model = tanh_scalar_model()
        env = supervised_task(model, np.array([1.0]))
        meta = MetaState(sigma=0.15, mu_sigma=0.15, lam_sigma=2.0, eta_sigma=3.0, meta_diffusion=0.1)
        layout = stacked_layout(model, env, meta)
        assert layout.state_dim == 6
        assert layout.wiener_dim == 2
        assert layout.labels()[-2:] == ["sigma", "mu_sigma"]

    def test_sigma_index_requires_meta(self):
        model = tanh_scalar_model()
        env = supervised_task(model, np.array([1.0]))
        layout = stacked_layout(model, env)
        with pytest.raises(AttributeError):
            layout.sigma


def integrate_learner(env, hp, rbar0, seed=0, t_end=5.0, theta0=0.0, mu0=0.0):
    model = tanh_scalar_model()
    system = learner_as_sde(model, env, hp)
    layout = stacked_layout(model, env)
    y0 = stack_state(layout, LearnerState(theta=np.array([theta0]), mu=np.array([mu0]), rbar=rbar0))
    grid = TimeGrid(0.0, t_end, 0.05)
    traj = integrate(system, grid, WienerSource(seed, system.wiener_dim), y0)
    return layout, grid, traj


class TestLearnerProperties:
    def test_gate_zero_prediction_error_freezes_mu(self):
        """rbar starting exactly at a constant reward keeps delta at 0,
        so mu must not move at all, whatever theta does."""
        env = constant_reward_env(r0=-1.0)
        hp = Hyperparams.isotropic(lam=1.0, eta=5.0, rho=1.0, sigma=0.5, n=1)
        layout, _, traj = integrate_learner(env, hp, rbar0=-1.0, mu0=0.25)
        mu = traj.states[:, layout.mu][:, 0]
        assert np.all(mu == 0.25)
        theta = traj.states[:, layout.theta][:, 0]
        assert np.ptp(theta) > 0.0  # theta still diffuses

    def test_mean_reversion_bound(self):
        """Noise-free gap to a frozen mean decays monotonically and stays
        under the continuous-time envelope."""
        env = constant_reward_env()
        hp = Hyperparams.isotropic(lam=1.5, eta=0.0, rho=1.0, sigma=0.0, n=1)
        layout, grid, traj = integrate_learner(env, hp, rbar0=0.0, theta0=2.0, mu0=0.0)
        gap = np.abs(traj.states[:, layout.theta][:, 0])
        assert np.all(np.diff(gap) <= 0.0)
        envelope = 2.0 * np.exp(-hp.lam * traj.times) * (1.0 + 5.0 * grid.dt)
        assert np.all(gap <= envelope)

    def test_reward_filter_decay_bound(self):
        env = constant_reward_env(r0=-2.0)
        hp = Hyperparams.isotropic(lam=1.0, eta=0.0, rho=0.8, sigma=0.0, n=1)
        layout, grid, traj = integrate_learner(env, hp, rbar0=1.0)
        err = np.abs(traj.states[:, layout.rbar] - (-2.0))
        envelope = 3.0 * np.exp(-hp.rho * traj.times) * (1.0 + 5.0 * grid.dt)
        assert np.all(err <= envelope)

    def test_return_matches_reward_quadrature(self):
        """G(T) is the left-endpoint quadrature of the rewards the run saw."""
        model = tanh_scalar_model()
        env = supervised_task(model, np.array([1.0]))
        hp = Hyperparams.isotropic(lam=1.0, eta=1.0, rho=1.0, sigma=0.3, n=1)
        layout, grid, traj = integrate_learner(env, hp, rbar0=-1.0, seed=3)
        rewards = [
            env.reward_fn(t, env.input_fn(t, None), model.output_fn(y[layout.theta], env.input_fn(t, None), None), None)
            for t, y in zip(traj.times[:-1], traj.states[:-1])
        ]
        quadrature = math.fsum(r * grid.dt for r in rewards)
        G_T = traj.states[-1, layout.G]
        assert G_T == pytest.approx(quadrature, rel=1e-9)

    def test_reward_scale_symmetry(self):
        """Scaling rewards by c and eta by 1/c (with rbar0 scaled too)
        leaves the mu path untouched; c = 2 keeps the float ops exact."""
        model = tanh_scalar_model()

        def run_with(c):
            base = supervised_task(model, np.array([1.0]))

            class Env:
                input_dim = 1
                input_fn = staticmethod(base.input_fn)

                @staticmethod
                def reward_fn(t, x, y, env_state):
                    return c * base.reward_fn(t, x, y, env_state)

            hp = Hyperparams.isotropic(lam=1.0, eta=1.0 / c, rho=1.0, sigma=0.3, n=1)
            layout, _, traj = integrate_learner(Env(), hp, rbar0=c * -1.0, seed=11)
            return traj.states[:, layout.mu][:, 0], traj.states[:, layout.theta][:, 0]

        mu_1, theta_1 = run_with(1.0)
        mu_2, theta_2 = run_with(2.0)
        assert np.array_equal(mu_1, mu_2)
        assert np.array_equal(theta_1, theta_2)

    @given(st.floats(0.1, 3.0), st.floats(0.1, 3.0))
    def test_stationary_variance_scaling(self, lam, sigma):
        hp = Hyperparams.isotropic(lam=lam, eta=0.0, rho=1.0, sigma=sigma, n=1)
        assert stationary_covariance(hp)[0, 0] == pytest.approx(sigma**2 / (2 * lam))


class TestMetaStack:
    def test_sigma_floor_applies_to_diffusion_not_state(self):
        """A deeply negative sigma state still produces the floor-level
        exploration noise instead of a negative magnitude."""
        model = tanh_scalar_model()
        env = supervised_task(model, np.array([1.0]))
        hp = Hyperparams.isotropic(lam=1.0, eta=1.0, rho=1.0, sigma=0.15, n=1)
        meta = MetaState(sigma=-0.4, mu_sigma=0.0, lam_sigma=2.0, eta_sigma=3.0, meta_diffusion=0.1)
        system = learner_as_sde(model, env, hp, meta)
        layout = stacked_layout(model, env, meta)
        y0 = stack_state(
            layout,
            LearnerState(theta=np.zeros(1), mu=np.zeros(1), rbar=0.0),
            meta=meta,
        )
        g = system.diffusion(0.0, y0)
        assert g[layout.latent_dim, 0] == SIGMA_FLOOR
        assert g[layout.sigma, layout.wiener_dim - 1] == 0.1

    def test_stack_state_requires_meta_block(self):
        model = tanh_scalar_model()
        env = supervised_task(model, np.array([1.0]))
        meta = MetaState(sigma=0.15, mu_sigma=0.15, lam_sigma=2.0, eta_sigma=3.0, meta_diffusion=0.1)
        layout = stacked_layout(model, env, meta)
        with pytest.raises(ValueError):
            stack_state(layout, LearnerState(theta=np.zeros(1), mu=np.zeros(1), rbar=0.0))
