"""Parametric models mapping inputs (and optional latent state) to a scalar output."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


def tanh_scalar(theta: float, x: float) -> float:
    """y = tanh(theta * x), bounded in (-1, 1)."""
    return float(np.tanh(theta * x))


def tanh_multi(theta: np.ndarray, x: np.ndarray) -> float:
    """y = tanh(theta . x)."""
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    if theta.shape != x.shape:
        raise ValueError(f"dimension mismatch: theta {theta.shape} vs x {x.shape}")
    return float(np.tanh(theta @ x))


def linear(theta: np.ndarray, x: np.ndarray) -> float:
    """y = theta . x."""
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    if theta.shape != x.shape:
        raise ValueError(f"dimension mismatch: theta {theta.shape} vs x {x.shape}")
    return float(theta @ x)


NONLINEARITIES: dict[str, Callable[[float], float]] = {
    "tanh": np.tanh,
    "sigmoid": lambda u: 1.0 / (1.0 + np.exp(-u)),
}


def ctrnn(
    theta: np.ndarray,
    x: float,
    z: float,
    nonlinearity: Callable[[float], float] = np.tanh,
) -> tuple[float, float]:
    """Single-unit recurrent model.

    dz/dt = f(theta1*z + theta2*x) - z, y = theta3*z. The drift pulls z
    toward the image of f, so trajectories stay bounded for bounded input.
    """
    dz = float(nonlinearity(theta[0] * z + theta[1] * x)) - z
    return dz, theta[2] * z


@dataclass(frozen=True)
class Model:
    """Bundle of callables the stacked system and the kernels consume.

    output_fn(theta, x, z) -> y; latent_drift(theta, x, z) -> dz/dt,
    present exactly when latent_dim > 0.
    """

    param_dim: int
    latent_dim: int
    output_fn: Callable
    latent_drift: Callable | None = None

    def __post_init__(self):
        if (self.latent_dim > 0) != (self.latent_drift is not None):
            raise ValueError("latent_drift must be present iff latent_dim > 0")


def tanh_scalar_model() -> Model:
    return Model(
        param_dim=1,
        latent_dim=0,
        output_fn=lambda theta, x, z: tanh_scalar(theta[0], x[0]),
    )


def tanh_multi_model(n: int) -> Model:
    return Model(
        param_dim=n,
        latent_dim=0,
        output_fn=lambda theta, x, z: tanh_multi(theta, x),
    )


def linear_model(n: int) -> Model:
    return Model(
        param_dim=n,
        latent_dim=0,
        output_fn=lambda theta, x, z: linear(theta, x),
    )


def resolve_nonlinearity(f: str | Callable[[float], float]) -> Callable[[float], float]:
    if callable(f):
        return f
    try:
        return NONLINEARITIES[f]
    except KeyError:
        raise ValueError(f"unknown nonlinearity {f!r}; choices: {sorted(NONLINEARITIES)}")


def ctrnn_model(nonlinearity: str | Callable[[float], float] = "tanh") -> Model:
    f = resolve_nonlinearity(nonlinearity)
    return Model(
        param_dim=3,
        latent_dim=1,
        output_fn=lambda theta, x, z: theta[2] * z[0],
        latent_drift=lambda theta, x, z: np.array(
            [ctrnn(theta, x[0], z[0], nonlinearity=f)[0]]
        ),
    )
