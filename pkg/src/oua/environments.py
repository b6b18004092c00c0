"""Task environments: input signals, targets, rewards, and plant dynamics.

Every reward here is nonpositive and peaks at 0 exactly at the task
optimum, so accumulated return is non-increasing and comparisons read
"closer to zero is better".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .models import Model
from .sde import TimeGrid


def sine_input(i: int, n: int, t: float) -> float:
    """Input bank entry i of n: frequency 0.1*i, phase offset (i-1)*2pi/n.

    Reduces to sin(0.1 t) for i = n = 1.
    """
    if not 1 <= i <= n:
        raise ValueError(f"input index {i} outside 1..{n}")
    return float(np.sin(0.1 * i * t + (i - 1) * 2.0 * np.pi / n))


def sine_bank(n: int, t: float) -> np.ndarray:
    i = np.arange(1, n + 1)
    return np.sin(0.1 * i * t + (i - 1) * 2.0 * np.pi / n)


def tracking_reward(y: float, y_star: float) -> float:
    """Negative squared tracking error; 0 exactly on target."""
    err = y - y_star
    return -(err * err)


@dataclass(frozen=True)
class Environment:
    """Hooks the stacked system consumes.

    input_fn(t, env_state) -> x; reward_fn(t, x, y, env_state) -> r.
    Stateful plants add env_drift(t, env_state, y) and
    env_diffusion(t, env_state) over ``wiener_dim`` noise channels.
    """

    input_dim: int
    input_fn: Callable
    reward_fn: Callable
    state_dim: int = 0
    wiener_dim: int = 0
    env_drift: Callable | None = None
    env_diffusion: Callable | None = None
    initial_state: np.ndarray | None = None

    def __post_init__(self):
        if self.state_dim > 0 and self.env_drift is None:
            raise ValueError("stateful environment needs env_drift")
        if self.wiener_dim > 0 and self.env_diffusion is None:
            raise ValueError("noisy environment needs env_diffusion")


def _euler_target_outputs(
    model: Model,
    theta_star: np.ndarray,
    grid: TimeGrid,
    n_inputs: int,
) -> np.ndarray:
    """Run the target system open-loop on the step grid; returns y* per step."""
    z = np.zeros(model.latent_dim)
    out = np.empty(grid.n_steps + 1)
    t = grid.t0
    for k in range(grid.n_steps + 1):
        x = sine_bank(n_inputs, t)
        out[k] = model.output_fn(theta_star, x, z)
        if k < grid.n_steps:
            z = z + model.latent_drift(theta_star, x, z) * grid.dt
            t = grid.t0 + (k + 1) * grid.dt
    return out


def supervised_task(
    model: Model,
    theta_star: np.ndarray,
    switch: tuple[float, np.ndarray] | None = None,
    grid: TimeGrid | None = None,
) -> Environment:
    """Tracking task: the target output comes from the same model run at
    a fixed parameter vector, and reward is negative squared error.

    ``switch=(t_switch, theta_star_2)`` swaps the target parameters once.
    Latent models need ``grid``: their target runs its own latent state,
    advanced with the same step size, and is sampled at step boundaries.
    """
    theta_star = np.atleast_1d(np.asarray(theta_star, dtype=float))
    if theta_star.shape[0] != model.param_dim:
        raise ValueError(
            f"target has {theta_star.shape[0]} parameters, model expects {model.param_dim}"
        )
    n_inputs = 1 if model.latent_dim > 0 else model.param_dim

    if switch is not None:
        t_switch, theta_star_2 = switch
        theta_star_2 = np.atleast_1d(np.asarray(theta_star_2, dtype=float))
        if theta_star_2.shape != theta_star.shape:
            raise ValueError("switch target must match the primary target's shape")

        def theta_star_at(t):
            return theta_star if t < t_switch else theta_star_2

    else:

        def theta_star_at(t):
            return theta_star

    def input_fn(t, env_state):
        return sine_bank(n_inputs, t)

    if model.latent_dim == 0:

        def reward_fn(t, x, y, env_state):
            y_star = model.output_fn(theta_star_at(t), x, None)
            return tracking_reward(y, y_star)

    else:
        if switch is not None:
            raise ValueError("target switching is only supported for stateless models")
        if grid is None:
            raise ValueError("latent-model tasks need a grid to run the target system")
        y_star_steps = _euler_target_outputs(model, theta_star, grid, n_inputs)
        t0, dt = grid.t0, grid.dt

        def reward_fn(t, x, y, env_state):
            k = int(round((t - t0) / dt))
            return tracking_reward(y, y_star_steps[k])

    return Environment(input_dim=n_inputs, input_fn=input_fn, reward_fn=reward_fn)


@dataclass(frozen=True)
class SdiState:
    """Double-integrator plant: position and velocity, with friction and
    the process/observation noise scales."""

    s: np.ndarray
    gamma: float
    alpha: float
    beta: float

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        object.__setattr__(self, "s", s)
        if s.shape != (2,) or not np.all(np.isfinite(s)):
            raise ValueError("plant state must be a finite 2-vector")
        if self.gamma < 0 or self.alpha < 0 or self.beta < 0:
            raise ValueError("gamma, alpha, beta must be >= 0")


def sdi_dynamics(state: SdiState, y: float, dW: float, dt: float) -> np.ndarray:
    """One explicit increment of the plant under control y."""
    s1, s2 = state.s
    return np.array([s2 * dt, (-state.gamma * s2 + y) * dt + state.alpha * dW])


def sdi_observe(state: SdiState, noise: np.ndarray) -> np.ndarray:
    """Noisy state observation x = s + beta * noise."""
    return state.s + state.beta * np.asarray(noise, dtype=float)


def sdi_reward(s: np.ndarray, y: float) -> float:
    """Quadratic state and control cost, negated."""
    return float(-0.5 * (s[0] * s[0] + s[1] * s[1]) - 0.5 * y * y)


def sdi_task(
    gamma: float,
    alpha: float,
    beta: float,
    observation_noise: Callable[[float], np.ndarray] | None = None,
) -> Environment:
    """Stabilization task around the origin.

    The plant is a frictional double integrator driven by the model
    output; reward penalizes state magnitude and control effort. The
    observation handed to the model is the state plus ``beta`` times a
    standard-normal draw, redrawn each step; ``observation_noise`` maps a
    time to that draw so a run can pin the exact sequence. Without it the
    observation is noiseless.
    """

    def input_fn(t, env_state):
        if beta == 0.0 or observation_noise is None:
            return env_state.copy()
        return env_state + beta * observation_noise(t)

    def reward_fn(t, x, y, env_state):
        return sdi_reward(env_state, y)

    def env_drift(t, env_state, y):
        return np.array([env_state[1], -gamma * env_state[1] + y])

    def env_diffusion(t, env_state):
        return np.array([[0.0], [alpha]])

    return Environment(
        input_dim=2,
        input_fn=input_fn,
        reward_fn=reward_fn,
        state_dim=2,
        wiener_dim=1,
        env_drift=env_drift,
        env_diffusion=env_diffusion,
        initial_state=np.zeros(2),
    )
