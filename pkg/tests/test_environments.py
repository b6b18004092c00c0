import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oua.environments import (
    Environment,
    SdiState,
    sdi_dynamics,
    sdi_observe,
    sdi_reward,
    sdi_task,
    sine_bank,
    sine_input,
    supervised_task,
    tracking_reward,
)
from oua.models import ctrnn_model, linear_model, tanh_scalar_model
from oua.sde import TimeGrid


class TestSineInputs:
    def test_single_input_is_slow_sine(self):
        for t in (0.0, 1.0, 10.0, 31.4):
            assert sine_input(1, 1, t) == pytest.approx(math.sin(0.1 * t))

    def test_bank_phases(self):
        x = sine_bank(3, 0.0)
        # phases (i-1) * 2pi/3 at t = 0
        assert x[0] == pytest.approx(0.0, abs=1e-15)
        assert x[1] == pytest.approx(0.8660254037844387)
        assert x[2] == pytest.approx(-0.8660254037844387)

    def test_bank_frequencies(self):
        t = 2.0
        x = sine_bank(2, t)
        assert x[0] == pytest.approx(math.sin(0.1 * t))
        assert x[1] == pytest.approx(math.sin(0.2 * t + math.pi))

    def test_bank_matches_elementwise(self):
        t = 7.3
        bank = sine_bank(4, t)
        for i in range(1, 5):
            assert bank[i - 1] == pytest.approx(sine_input(i, 4, t), abs=1e-15)

    def test_index_bounds(self):
        with pytest.raises(ValueError):
            sine_input(0, 3, 0.0)
        with pytest.raises(ValueError):
            sine_input(4, 3, 0.0)


class TestTrackingReward:
    def test_reference_value(self):
        assert tracking_reward(0.5, 1.5) == -1.0

    @given(st.floats(-5, 5), st.floats(-5, 5))
    def test_nonpositive_and_tight(self, y, y_star):
        r = tracking_reward(y, y_star)
        assert r <= 0.0
        if y == y_star:
            assert r == 0.0


class TestEnvironmentValidation:
    def test_stateful_needs_drift(self):
        with pytest.raises(ValueError):
            Environment(
                input_dim=1,
                input_fn=lambda t, s: np.zeros(1),
                reward_fn=lambda t, x, y, s: 0.0,
                state_dim=2,
            )

    def test_noisy_needs_diffusion(self):
        with pytest.raises(ValueError):
            Environment(
                input_dim=1,
                input_fn=lambda t, s: np.zeros(1),
                reward_fn=lambda t, x, y, s: 0.0,
                state_dim=2,
                wiener_dim=1,
                env_drift=lambda t, s, y: np.zeros(2),
            )


class TestSupervisedTask:
    def test_target_parameters_give_zero_reward(self):
        """Running the model at the target parameters must score exactly 0
        everywhere; the environment generates its targets from the same
        model."""
        model = tanh_scalar_model()
        env = supervised_task(model, np.array([0.8]))
        for t in np.linspace(0.0, 50.0, 101):
            x = env.input_fn(t, None)
            y = model.output_fn(np.array([0.8]), x, None)
            assert env.reward_fn(t, x, y, None) == 0.0

    def test_off_target_reward_is_negative(self):
        model = tanh_scalar_model()
        env = supervised_task(model, np.array([1.0]))
        x = env.input_fn(3.0, None)
        y = model.output_fn(np.array([0.2]), x, None)
        assert env.reward_fn(3.0, x, y, None) < 0.0

    def test_switch_swaps_target(self):
        model = tanh_scalar_model()
        env = supervised_task(
            model, np.array([1.0]), switch=(5.0, np.array([-1.0]))
        )
        t_pre, t_post = 4.9, 5.0
        for t, theta in ((t_pre, 1.0), (t_post, -1.0)):
            x = env.input_fn(t, None)
            y = model.output_fn(np.array([theta]), x, None)
            assert env.reward_fn(t, x, y, None) == 0.0
        # the old target is now wrong whenever the input is nonzero
        x = env.input_fn(t_post + 1.3, None)
        y = model.output_fn(np.array([1.0]), x, None)
        assert env.reward_fn(t_post + 1.3, x, y, None) < 0.0

    def test_switch_rejected_for_latent_models(self):
        grid = TimeGrid(0.0, 1.0, 0.05)
        with pytest.raises(ValueError):
            supervised_task(
                ctrnn_model(), np.ones(3), switch=(0.5, -np.ones(3)), grid=grid
            )

    def test_latent_model_needs_grid(self):
        with pytest.raises(ValueError):
            supervised_task(ctrnn_model(), np.ones(3))

    def test_latent_target_zero_reward_on_step_grid(self):
        """A CTRNN run at the target parameters, advanced with the same
        Euler steps from the same initial latent, reproduces the target
        output exactly at every step edge."""
        grid = TimeGrid(0.0, 5.0, 0.05)
        model = ctrnn_model()
        theta_star = np.array([0.3, 0.7, 1.0])
        env = supervised_task(model, theta_star, grid=grid)
        z = np.zeros(1)
        for k in range(grid.n_steps + 1):
            t = grid.t0 + k * grid.dt
            x = env.input_fn(t, None)
            y = model.output_fn(theta_star, x, z)
            assert env.reward_fn(t, x, y, None) == 0.0
            z = z + model.latent_drift(theta_star, x, z) * grid.dt

    def test_target_length_checked(self):
        with pytest.raises(ValueError):
            supervised_task(linear_model(2), np.ones(3))

    def test_switch_shape_checked(self):
        with pytest.raises(ValueError):
            supervised_task(
                linear_model(2), np.ones(2), switch=(1.0, np.ones(3))
            )


class TestSdi:
    def test_state_validation(self):
        with pytest.raises(ValueError):
            SdiState(s=np.zeros(3), gamma=0.0, alpha=0.0, beta=0.0)
        with pytest.raises(ValueError):
            SdiState(s=np.zeros(2), gamma=-0.1, alpha=0.0, beta=0.0)

    def test_reward_reference_value(self):
        assert sdi_reward(np.array([1.0, 2.0]), 0.5) == -2.625

    def test_observation_mixes_noise(self):
        state = SdiState(s=np.array([1.0, -1.0]), gamma=0.0, alpha=0.0, beta=0.5)
        obs = sdi_observe(state, np.array([2.0, 4.0]))
        assert obs == pytest.approx([2.0, 1.0])

    def test_dynamics_increment(self):
        state = SdiState(s=np.array([1.0, 2.0]), gamma=0.1, alpha=0.3, beta=0.0)
        ds = sdi_dynamics(state, y=0.5, dW=0.2, dt=0.1)
        assert ds[0] == pytest.approx(0.2)
        assert ds[1] == pytest.approx((-0.2 + 0.5) * 0.1 + 0.06)

    def test_closed_loop_feedback_stabilizes(self):
        """Proportional-derivative feedback u = -s1 - s2 drives the
        noise-free plant to the origin from any start."""
        s = np.array([1.5, -0.8])
        dt = 0.05
        for _ in range(int(30.0 / dt)):
            state = SdiState(s=s, gamma=0.0, alpha=0.0, beta=0.0)
            u = -s[0] - s[1]
            s = s + sdi_dynamics(state, y=u, dW=0.0, dt=dt)
        assert np.linalg.norm(s) < 1e-3

    def test_task_wiring(self):
        env = sdi_task(gamma=0.01, alpha=0.005, beta=0.0)
        assert (env.state_dim, env.wiener_dim, env.input_dim) == (2, 1, 2)
        s = np.array([0.4, -0.2])
        assert np.array_equal(env.input_fn(0.0, s), s)
        assert env.reward_fn(0.0, s, 0.1, s) == sdi_reward(s, 0.1)
        drift = env.env_drift(0.0, s, 1.0)
        assert drift == pytest.approx([-0.2, 1.0 - 0.01 * -0.2])
        g = env.env_diffusion(0.0, s)
        assert g.shape == (2, 1)
        assert g[1, 0] == 0.005

    def test_observation_noise_hook(self):
        env = sdi_task(gamma=0.0, alpha=0.0, beta=0.5, observation_noise=lambda t: np.array([1.0, -1.0]))
        s = np.array([1.0, 1.0])
        assert env.input_fn(0.0, s) == pytest.approx([1.5, 0.5])

    def test_rewards_nonpositive_along_any_trajectory(self):
        env = sdi_task(gamma=0.01, alpha=0.005, beta=0.005)
        rng = np.random.default_rng(1)
        for _ in range(200):
            s = rng.normal(size=2)
            y = rng.normal()
            assert env.reward_fn(0.0, s, y, s) <= 0.0
