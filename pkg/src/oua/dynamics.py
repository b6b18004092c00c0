"""Core learning dynamics.

Parameters follow a mean-reverting diffusion around an adaptive mean. The
mean drifts toward recent parameter values whenever the reward prediction
error is positive, and away when it is negative; the prediction error is
the gap between instantaneous reward and a low-pass filtered reward trace.
An optional meta level applies the same mechanism to the diffusion
coefficient itself.

Everything here is a pure function over small value types. The stacked
system assembled by :func:`learner_as_sde` is the reference path; the hot
loops in :mod:`oua.kernels` reproduce it step for step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sde import SdeSystem

# Lower clamp on a learned diffusion magnitude. Keeps the parameter noise
# well-posed when the sigma process wanders negative.
SIGMA_FLOOR = 1e-6


@dataclass(frozen=True)
class Hyperparams:
    """Learner rates: mean reversion, mean adaptation, reward filtering,
    and the per-parameter exploration magnitudes.

    ``lam`` is the rate at which parameters revert to their mean, ``eta``
    scales how strongly prediction error moves the mean, ``rho`` is the
    reward-filter rate, and ``sigma`` holds one diffusion coefficient per
    parameter.
    """

    lam: float
    eta: float
    rho: float
    sigma: np.ndarray

    def __post_init__(self):
        sigma = np.atleast_1d(np.asarray(self.sigma, dtype=float))
        object.__setattr__(self, "sigma", sigma)
        if self.lam < 0 or self.eta < 0 or self.rho < 0:
            raise ValueError("rates lam, eta, rho must be >= 0")
        if sigma.ndim != 1 or np.any(sigma < 0) or not np.all(np.isfinite(sigma)):
            raise ValueError("sigma must be a vector of finite values >= 0")

    @property
    def n(self) -> int:
        return self.sigma.shape[0]

    @classmethod
    def isotropic(cls, lam: float, eta: float, rho: float, sigma: float, n: int) -> "Hyperparams":
        """Same diffusion coefficient on every parameter channel."""
        return cls(lam=lam, eta=eta, rho=rho, sigma=np.full(n, float(sigma)))


@dataclass(frozen=True)
class LearnerState:
    """Instantaneous learner state: parameters, their mean, the filtered
    reward, and the accumulated return."""

    theta: np.ndarray
    mu: np.ndarray
    rbar: float
    G: float = 0.0

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "mu", mu)
        if theta.shape != mu.shape:
            raise ValueError("theta and mu must have equal length")
        if not (
            np.all(np.isfinite(theta))
            and np.all(np.isfinite(mu))
            and np.isfinite(self.rbar)
            and np.isfinite(self.G)
        ):
            raise ValueError("learner state entries must be finite")


@dataclass(frozen=True)
class MetaState:
    """State and rates of the learned-diffusion level.

    ``sigma`` replaces the fixed diffusion coefficient of every parameter
    channel; ``mu_sigma`` is its adaptive mean. ``meta_diffusion`` is the
    noise magnitude of the sigma process itself, kept as an explicit knob.
    """

    sigma: float
    mu_sigma: float
    lam_sigma: float
    eta_sigma: float
    meta_diffusion: float

    def __post_init__(self):
        vals = (self.sigma, self.mu_sigma, self.lam_sigma, self.eta_sigma, self.meta_diffusion)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("meta state entries must be finite")


def rpe(r: float, rbar: float) -> float:
    """Reward prediction error: instantaneous reward minus its filtered trace."""
    return r - rbar


def rbar_drift(r: float, rbar: float, rho: float) -> float:
    """Low-pass filter drift; time constant 1/rho."""
    return rho * (r - rbar)


def theta_dynamics(state: LearnerState, hp: Hyperparams) -> tuple[np.ndarray, np.ndarray]:
    """Drift and diagonal diffusion of the parameter process."""
    drift = hp.lam * (state.mu - state.theta)
    return drift, hp.sigma.copy()


def mu_drift(state: LearnerState, hp: Hyperparams, delta_r: float) -> np.ndarray:
    """Mean adaptation: prediction error gates movement toward theta."""
    return hp.eta * delta_r * (state.theta - state.mu)


def stationary_covariance(hp: Hyperparams) -> np.ndarray:
    """Long-run parameter covariance when the mean and gate are frozen."""
    if hp.lam <= 0:
        raise ValueError("stationary covariance undefined for lam <= 0")
    return np.diag(hp.sigma**2 / (2.0 * hp.lam))


def meta_sigma_dynamics(meta: MetaState, delta_r: float) -> tuple[float, float, float]:
    """Drifts and diffusion of the learned-sigma level.

    Returns (sigma drift, sigma diffusion magnitude, mu_sigma drift). The
    caller clamps sigma at SIGMA_FLOOR before using it as the parameter
    diffusion.
    """
    dsigma = meta.lam_sigma * (meta.mu_sigma - meta.sigma)
    dmu_sigma = meta.eta_sigma * delta_r * (meta.sigma - meta.mu_sigma)
    return dsigma, meta.meta_diffusion, dmu_sigma


@dataclass(frozen=True)
class StackedLayout:
    """Index map of the stacked state vector.

    Order: latent/plant state, theta, mu, rbar, G, then sigma and mu_sigma
    when the meta level is active. Wiener channels: one per parameter,
    then any environment channels, then one for sigma when meta is active.
    """

    latent_dim: int
    n: int
    env_wiener_dim: int
    meta: bool

    @property
    def z(self) -> slice:
        return slice(0, self.latent_dim)

    @property
    def theta(self) -> slice:
        return slice(self.latent_dim, self.latent_dim + self.n)

    @property
    def mu(self) -> slice:
        return slice(self.latent_dim + self.n, self.latent_dim + 2 * self.n)

    @property
    def rbar(self) -> int:
        return self.latent_dim + 2 * self.n

    @property
    def G(self) -> int:
        return self.latent_dim + 2 * self.n + 1

    @property
    def sigma(self) -> int:
        if not self.meta:
            raise AttributeError("layout has no meta block")
        return self.latent_dim + 2 * self.n + 2

    @property
    def mu_sigma(self) -> int:
        if not self.meta:
            raise AttributeError("layout has no meta block")
        return self.latent_dim + 2 * self.n + 3

    @property
    def state_dim(self) -> int:
        return self.latent_dim + 2 * self.n + 2 + (2 if self.meta else 0)

    @property
    def wiener_dim(self) -> int:
        return self.n + self.env_wiener_dim + (1 if self.meta else 0)

    def labels(self) -> list[str]:
        out = [f"z{i}" for i in range(self.latent_dim)]
        out += [f"theta{i}" for i in range(self.n)]
        out += [f"mu{i}" for i in range(self.n)]
        out += ["rbar", "G"]
        if self.meta:
            out += ["sigma", "mu_sigma"]
        return out


def stacked_layout(model, env, meta: MetaState | None = None) -> StackedLayout:
    """Layout of the system built by :func:`learner_as_sde`."""
    latent_dim = model.latent_dim + getattr(env, "state_dim", 0)
    return StackedLayout(
        latent_dim=latent_dim,
        n=model.param_dim,
        env_wiener_dim=getattr(env, "wiener_dim", 0),
        meta=meta is not None,
    )


def stack_state(
    layout: StackedLayout,
    state: LearnerState,
    latent: np.ndarray | None = None,
    meta: MetaState | None = None,
) -> np.ndarray:
    """Pack learner, latent, and meta state into one flat vector."""
    y = np.zeros(layout.state_dim)
    if layout.latent_dim:
        if latent is None:
            latent = np.zeros(layout.latent_dim)
        y[layout.z] = latent
    y[layout.theta] = state.theta
    y[layout.mu] = state.mu
    y[layout.rbar] = state.rbar
    y[layout.G] = state.G
    if layout.meta:
        if meta is None:
            raise ValueError("layout expects a meta block")
        y[layout.sigma] = meta.sigma
        y[layout.mu_sigma] = meta.mu_sigma
    return y


def learner_as_sde(model, env, hp: Hyperparams, meta: MetaState | None = None) -> SdeSystem:
    """Assemble the coupled learner/model/environment system.

    ``model`` supplies ``param_dim``, ``latent_dim``, ``output_fn`` and
    (when stateful) ``latent_drift``; ``env`` supplies ``input_fn``,
    ``reward_fn`` and optionally plant dynamics. The returned system
    stacks everything so one solver call advances the whole loop.
    """
    if model.param_dim != hp.n:
        raise ValueError(
            f"model has {model.param_dim} parameters but hyperparams carry {hp.n} sigma entries"
        )
    layout = stacked_layout(model, env, meta)
    env_state_dim = getattr(env, "state_dim", 0)
    model_latent = slice(0, model.latent_dim)
    env_latent = slice(model.latent_dim, model.latent_dim + env_state_dim)

    def split(y):
        z_model = y[model_latent]
        z_env = y[env_latent]
        theta = y[layout.theta]
        mu = y[layout.mu]
        return z_model, z_env, theta, mu, y[layout.rbar]

    def drift(t, y):
        z_model, z_env, theta, mu, rbar = split(y)
        x = env.input_fn(t, z_env)
        out = model.output_fn(theta, x, z_model)
        r = env.reward_fn(t, x, out, z_env)
        delta = rpe(r, rbar)
        eta = hp.eta
        f = np.zeros_like(y)
        if model.latent_dim:
            f[model_latent] = model.latent_drift(theta, x, z_model)
        if env_state_dim:
            f[env_latent] = env.env_drift(t, z_env, out)
        f[layout.theta] = hp.lam * (mu - theta)
        f[layout.mu] = eta * delta * (theta - mu)
        f[layout.rbar] = rbar_drift(r, rbar, hp.rho)
        f[layout.G] = r
        if layout.meta:
            sig = y[layout.sigma]
            mu_sig = y[layout.mu_sigma]
            f[layout.sigma] = meta.lam_sigma * (mu_sig - sig)
            f[layout.mu_sigma] = meta.eta_sigma * delta * (sig - mu_sig)
        return f

    def diffusion(t, y):
        g = np.zeros((layout.state_dim, layout.wiener_dim))
        if layout.meta:
            sig_eff = max(y[layout.sigma], SIGMA_FLOOR)
            for i in range(hp.n):
                g[layout.latent_dim + i, i] = sig_eff
            g[layout.sigma, layout.wiener_dim - 1] = meta.meta_diffusion
        else:
            for i in range(hp.n):
                g[layout.latent_dim + i, i] = hp.sigma[i]
        if env_state_dim and layout.env_wiener_dim:
            g_env = env.env_diffusion(t, y[env_latent])
            g[env_latent, hp.n : hp.n + layout.env_wiener_dim] = g_env
        return g

    return SdeSystem(
        state_dim=layout.state_dim,
        drift=drift,
        diffusion=diffusion,
        wiener_dim=layout.wiener_dim,
        labels=layout.labels(),
    )
