"""Fixed-step integration of coupled stochastic/ordinary differential equations.

Systems are described by a drift ``f(t, y)`` and a diffusion ``g(t, y)``
mapping Wiener increments into state perturbations. Integration uses the
explicit Euler-Heun predictor-corrector:

    predictor:  y~  = y + f(t, y) dt + g(t, y) dW
    corrector:  y'  = y + f(t, y) dt + 1/2 [g(t, y) + g(t, y~)] dW

For state-independent (additive) diffusion the corrector term collapses and
the step coincides with explicit Euler-Maruyama.

Noise comes from :class:`WienerSource`, an explicitly seeded generator whose
increments over a step of length ``dt`` are i.i.d. normal with variance
``dt`` per component. Identical seeds give bit-identical increment
sequences, which makes whole trajectories bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import IntegrationError

DEFAULT_DT = 0.05


@dataclass(frozen=True)
class TimeGrid:
    """Uniform integration grid from ``t0`` to ``t_end`` with step ``dt``."""

    t0: float = 0.0
    t_end: float = 1.0
    dt: float = DEFAULT_DT

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.t_end > self.t0:
            raise ValueError(f"t_end must exceed t0, got t0={self.t0}, t_end={self.t_end}")
        if self.n_steps < 1 or not np.isfinite(self.n_steps):
            raise ValueError("grid must contain at least one step")

    @property
    def n_steps(self) -> int:
        return int(round((self.t_end - self.t0) / self.dt))

    def times(self) -> np.ndarray:
        """All step endpoints, shape (n_steps + 1,)."""
        return self.t0 + self.dt * np.arange(self.n_steps + 1)


class WienerSource:
    """Seeded source of multivariate Wiener increments.

    Auxiliary draws (e.g. per-step observation noise) come from the same
    generator after the increment block, so a single 64-bit seed pins every
    random number a run consumes.
    """

    def __init__(self, seed: int, dim: int):
        if dim < 0:
            raise ValueError("dim must be >= 0")
        self.seed = int(seed)
        self.dim = int(dim)
        self._rng = np.random.default_rng(self.seed)

    def increments(self, n_steps: int, dt: float) -> np.ndarray:
        """Draw an (n_steps, dim) block of N(0, dt) increments."""
        return self._rng.normal(0.0, np.sqrt(dt), size=(n_steps, self.dim))

    def standard_normal(self, shape) -> np.ndarray:
        """Auxiliary unit-variance draws from the same stream."""
        return self._rng.standard_normal(shape)


def substream_seed(base_seed: int, run_index: int) -> int:
    """Derive the seed for run ``run_index`` of a multi-run batch."""
    return int(base_seed) ^ int(run_index)


@dataclass
class SdeSystem:
    """A coupled system dy = f(t, y) dt + g(t, y) dW.

    ``diffusion`` may return either a (state_dim, wiener_dim) matrix or,
    when ``wiener_dim == state_dim``, a length-``state_dim`` diagonal.
    """

    state_dim: int
    drift: Callable[[float, np.ndarray], np.ndarray]
    diffusion: Callable[[float, np.ndarray], np.ndarray]
    wiener_dim: int
    labels: Sequence[str] = field(default_factory=tuple)

    def state_labels(self) -> list[str]:
        if self.labels and len(self.labels) == self.state_dim:
            return list(self.labels)
        return [f"state_{i}" for i in range(self.state_dim)]


@dataclass
class Trajectory:
    """Recorded (t, state) samples of one integration run."""

    times: np.ndarray
    states: np.ndarray
    labels: Sequence[str] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.times)

    def final_state(self) -> np.ndarray:
        return self.states[-1]


def _apply_diffusion(g: np.ndarray, dW: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim == 1:
        if g.shape[0] != dW.shape[0]:
            raise IntegrationError(
                "diagonal diffusion length does not match Wiener dimension",
                component="diffusion",
            )
        return g * dW
    return g @ dW


def euler_heun_step(
    system: SdeSystem,
    t: float,
    state: np.ndarray,
    dt: float,
    dW: np.ndarray,
    step_index: int = 0,
) -> np.ndarray:
    """Advance ``state`` from ``t`` to ``t + dt`` given increments ``dW``."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    state = np.asarray(state, dtype=float)
    dW = np.atleast_1d(np.asarray(dW, dtype=float))

    f = np.asarray(system.drift(t, state), dtype=float)
    if not np.all(np.isfinite(f)):
        bad = int(np.flatnonzero(~np.isfinite(f))[0])
        raise IntegrationError("non-finite drift", step=step_index, component=_label(system, bad))
    g0 = np.asarray(system.diffusion(t, state), dtype=float)
    if not np.all(np.isfinite(g0)):
        raise IntegrationError("non-finite diffusion", step=step_index, component="diffusion")

    drift_term = f * dt
    noise0 = _apply_diffusion(g0, dW)
    predictor = state + drift_term + noise0
    g1 = np.asarray(system.diffusion(t, predictor), dtype=float)
    if not np.all(np.isfinite(g1)):
        raise IntegrationError(
            "non-finite diffusion at predictor state", step=step_index, component="diffusion"
        )
    noise1 = _apply_diffusion(g1, dW)
    new_state = state + drift_term + 0.5 * (noise0 + noise1)
    if not np.all(np.isfinite(new_state)):
        bad = int(np.flatnonzero(~np.isfinite(new_state))[0])
        raise IntegrationError("non-finite state", step=step_index, component=_label(system, bad))
    return new_state


def _label(system: SdeSystem, index: int) -> str:
    return system.state_labels()[index]


def integrate(
    system: SdeSystem,
    grid: TimeGrid,
    noise: WienerSource,
    initial_state: np.ndarray,
    record_stride: int = 1,
    increments: Optional[np.ndarray] = None,
) -> Trajectory:
    """Integrate ``system`` over ``grid``; deterministic given the seed.

    Records every ``record_stride``-th step plus the final one. Pre-drawn
    ``increments`` of shape (n_steps, wiener_dim) may be supplied; otherwise
    they are taken from ``noise``.
    """
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    if noise.dim != system.wiener_dim:
        raise ValueError(
            f"noise dimension {noise.dim} does not match system Wiener dimension {system.wiener_dim}"
        )
    n_steps = grid.n_steps
    if increments is None:
        increments = noise.increments(n_steps, grid.dt)
    if increments.shape != (n_steps, system.wiener_dim):
        raise ValueError("increments must have shape (n_steps, wiener_dim)")

    state = np.array(initial_state, dtype=float).reshape(system.state_dim)
    n_records = n_steps // record_stride + 1 + (0 if n_steps % record_stride == 0 else 1)
    times = np.empty(n_records)
    states = np.empty((n_records, system.state_dim))

    rec = 0
    for k in range(n_steps + 1):
        t = grid.t0 + k * grid.dt
        if k % record_stride == 0 or k == n_steps:
            times[rec] = t
            states[rec] = state
            rec += 1
        if k < n_steps:
            state = euler_heun_step(system, t, state, grid.dt, increments[k], step_index=k)
    return Trajectory(times=times, states=states, labels=system.state_labels())


def write_trajectory_csv(trajectory: Trajectory, path) -> None:
    """Export as CSV: header ``t,<state_0>,...``, 17 significant digits."""
    labels = list(trajectory.labels) if trajectory.labels else [
        f"state_{i}" for i in range(trajectory.states.shape[1])
    ]
    with open(path, "w", newline="") as fh:
        fh.write("t," + ",".join(labels) + "\n")
        for t, row in zip(trajectory.times, trajectory.states):
            fh.write("%.17g" % t)
            for value in row:
                fh.write(",%.17g" % value)
            fh.write("\n")
