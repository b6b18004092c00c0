"""Specialized integration loops for the built-in tasks.

Each kernel advances the full stacked state (latents, parameters, mean,
filtered reward, return) with the same predictor-corrector stepping as the
generic path in :mod:`oua.sde`, but flattened into a single loop over
preallocated arrays so the JIT backend can compile it. All randomness is
drawn by the caller and passed in; kernels are deterministic functions of
their arguments.

Rules for code in this file: module-level flat loops only, no calls into
other wrapped kernels, no Python objects inside the loop. Every kernel must
produce results matching the generic path (same step arithmetic, left-point
evaluation of inputs, rewards, and the prediction-error gate).

Row format of every returned record array: time in column 0, then the state
in stacked order. Rows are written for every ``record_stride``-th step plus
the final step.
"""

from __future__ import annotations

import numpy as np

from ._backend import accelerated

# model_kind codes for kernels that evaluate a stateless readout
MODEL_TANH = 0
MODEL_LINEAR = 1


def n_records(n_steps: int, record_stride: int) -> int:
    """Number of rows a kernel writes for this grid and stride."""
    extra = 0 if n_steps % record_stride == 0 else 1
    return n_steps // record_stride + 1 + extra


@accelerated
def supervised_kernel(
    t0,
    dt,
    n_steps,
    record_stride,
    theta0,
    mu0,
    rbar0,
    G0,
    lam,
    eta,
    rho,
    sigma,
    model_kind,
    theta_star_1,
    theta_star_2,
    t_switch,
    dW,
    out,
):
    """Tracking task with a bank of sine inputs, one per parameter.

    Noise is additive here, so the corrector stage collapses to the
    predictor and a single diffusion evaluation suffices. ``out`` must
    have n_records rows and 2n+4 columns: t, theta, mu, rbar, G, delta.
    """
    n = theta0.shape[0]
    theta = theta0.copy()
    mu = mu0.copy()
    rbar = rbar0
    G = G0
    x = np.empty(n)
    two_pi = 2.0 * np.pi
    rec = 0
    for k in range(n_steps + 1):
        t = t0 + k * dt

        for i in range(n):
            x[i] = np.sin(0.1 * (i + 1) * t + i * two_pi / n)
        ts = theta_star_1 if t < t_switch else theta_star_2
        u = 0.0
        u_star = 0.0
        for i in range(n):
            u += theta[i] * x[i]
            u_star += ts[i] * x[i]
        if model_kind == MODEL_TANH:
            y = np.tanh(u)
            y_star = np.tanh(u_star)
        else:
            y = u
            y_star = u_star
        err = y - y_star
        r = -(err * err)
        delta = r - rbar

        if k % record_stride == 0 or k == n_steps:
            out[rec, 0] = t
            for i in range(n):
                out[rec, 1 + i] = theta[i]
                out[rec, 1 + n + i] = mu[i]
            out[rec, 1 + 2 * n] = rbar
            out[rec, 2 + 2 * n] = G
            out[rec, 3 + 2 * n] = delta
            rec += 1
        if k == n_steps:
            break

        for i in range(n):
            theta_i = theta[i]
            theta[i] = theta_i + (lam * (mu[i] - theta_i)) * dt + sigma[i] * dW[k, i]
            mu[i] = mu[i] + (eta * delta * (theta_i - mu[i])) * dt
        rbar = rbar + (rho * (r - rbar)) * dt
        G = G + r * dt
    return out


@accelerated
def ctrnn_target_kernel(t0, dt, n_steps, theta_star, ystar):
    """Open-loop target outputs of the recurrent model, one per step edge."""
    z = 0.0
    for k in range(n_steps + 1):
        t = t0 + k * dt
        x = np.sin(0.1 * t)
        ystar[k] = theta_star[2] * z
        if k < n_steps:
            z = z + (np.tanh(theta_star[0] * z + theta_star[1] * x) - z) * dt
    return ystar


@accelerated
def ctrnn_kernel(
    t0,
    dt,
    n_steps,
    record_stride,
    z0,
    theta0,
    mu0,
    rbar0,
    G0,
    lam,
    eta,
    rho,
    sigma,
    ystar,
    dW,
    out,
):
    """Recurrent tracking task; latent z carries no noise.

    ``ystar`` holds the precomputed target output at every step edge.
    ``out`` columns: t, z, theta x3, mu x3, rbar, G, delta.
    """
    z = z0
    theta = theta0.copy()
    mu = mu0.copy()
    rbar = rbar0
    G = G0
    rec = 0
    for k in range(n_steps + 1):
        t = t0 + k * dt
        x = np.sin(0.1 * t)
        y = theta[2] * z
        err = y - ystar[k]
        r = -(err * err)
        delta = r - rbar

        if k % record_stride == 0 or k == n_steps:
            out[rec, 0] = t
            out[rec, 1] = z
            for i in range(3):
                out[rec, 2 + i] = theta[i]
                out[rec, 5 + i] = mu[i]
            out[rec, 8] = rbar
            out[rec, 9] = G
            out[rec, 10] = delta
            rec += 1
        if k == n_steps:
            break

        dz = np.tanh(theta[0] * z + theta[1] * x) - z
        z = z + dz * dt
        for i in range(3):
            theta_i = theta[i]
            theta[i] = theta_i + (lam * (mu[i] - theta_i)) * dt + sigma[i] * dW[k, i]
            mu[i] = mu[i] + (eta * delta * (theta_i - mu[i])) * dt
        rbar = rbar + (rho * (r - rbar)) * dt
        G = G + r * dt
    return out


@accelerated
def sdi_kernel(
    t0,
    dt,
    n_steps,
    record_stride,
    s0,
    theta0,
    mu0,
    rbar0,
    G0,
    lam,
    eta,
    rho,
    sigma,
    gamma,
    alpha,
    beta,
    dW,
    eps,
    out,
):
    """Double-integrator stabilization with linear state feedback.

    Wiener columns: parameter channels 0..1, plant channel 2. ``eps``
    holds the per-step standard-normal observation draws (n_steps x 2);
    the reward uses the true state, the control uses the observation.
    ``out`` columns: t, s x2, theta x2, mu x2, rbar, G, delta.
    """
    s1 = s0[0]
    s2 = s0[1]
    theta = theta0.copy()
    mu = mu0.copy()
    rbar = rbar0
    G = G0
    rec = 0
    for k in range(n_steps + 1):
        t = t0 + k * dt
        if k < n_steps:
            x1 = s1 + beta * eps[k, 0]
            x2 = s2 + beta * eps[k, 1]
        else:
            x1 = s1
            x2 = s2
        y = theta[0] * x1 + theta[1] * x2
        r = -0.5 * (s1 * s1 + s2 * s2) - 0.5 * y * y
        delta = r - rbar

        if k % record_stride == 0 or k == n_steps:
            out[rec, 0] = t
            out[rec, 1] = s1
            out[rec, 2] = s2
            out[rec, 3] = theta[0]
            out[rec, 4] = theta[1]
            out[rec, 5] = mu[0]
            out[rec, 6] = mu[1]
            out[rec, 7] = rbar
            out[rec, 8] = G
            out[rec, 9] = delta
            rec += 1
        if k == n_steps:
            break

        new_s1 = s1 + s2 * dt
        new_s2 = s2 + (-gamma * s2 + y) * dt + alpha * dW[k, 2]
        s1 = new_s1
        s2 = new_s2
        for i in range(2):
            theta_i = theta[i]
            theta[i] = theta_i + (lam * (mu[i] - theta_i)) * dt + sigma[i] * dW[k, i]
            mu[i] = mu[i] + (eta * delta * (theta_i - mu[i])) * dt
        rbar = rbar + (rho * (r - rbar)) * dt
        G = G + r * dt
    return out


@accelerated
def meta_kernel(
    t0,
    dt,
    n_steps,
    record_stride,
    theta0,
    mu0,
    rbar0,
    G0,
    lam,
    eta,
    rho,
    sigma0,
    mu_sigma0,
    lam_sigma,
    eta_sigma,
    meta_diffusion,
    sigma_floor,
    theta_star_1,
    theta_star_2,
    t_switch,
    dW,
    out,
):
    """Single-parameter tracking with a learned diffusion coefficient.

    The parameter diffusion is max(sigma, sigma_floor) and depends on the
    state, so the corrector genuinely averages the two diffusion
    evaluations: the second one uses sigma advanced by its own predictor.
    Wiener columns: theta 0, sigma 1. ``out`` columns: t, theta, mu,
    rbar, G, sigma, mu_sigma, delta.
    """
    theta = theta0
    mu = mu0
    rbar = rbar0
    G = G0
    sigma = sigma0
    mu_sigma = mu_sigma0
    rec = 0
    for k in range(n_steps + 1):
        t = t0 + k * dt
        x = np.sin(0.1 * t)
        ts = theta_star_1 if t < t_switch else theta_star_2
        y = np.tanh(theta * x)
        y_star = np.tanh(ts * x)
        err = y - y_star
        r = -(err * err)
        delta = r - rbar

        if k % record_stride == 0 or k == n_steps:
            out[rec, 0] = t
            out[rec, 1] = theta
            out[rec, 2] = mu
            out[rec, 3] = rbar
            out[rec, 4] = G
            out[rec, 5] = sigma
            out[rec, 6] = mu_sigma
            out[rec, 7] = delta
            rec += 1
        if k == n_steps:
            break

        sig_eff = sigma if sigma > sigma_floor else sigma_floor
        dsigma_drift = (lam_sigma * (mu_sigma - sigma)) * dt
        sigma_pred = sigma + dsigma_drift + meta_diffusion * dW[k, 1]
        sig_eff_pred = sigma_pred if sigma_pred > sigma_floor else sigma_floor

        theta_new = (
            theta
            + (lam * (mu - theta)) * dt
            + 0.5 * (sig_eff * dW[k, 0] + sig_eff_pred * dW[k, 0])
        )
        mu = mu + (eta * delta * (theta - mu)) * dt
        sigma_new = sigma + dsigma_drift + meta_diffusion * dW[k, 1]
        mu_sigma = mu_sigma + (eta_sigma * delta * (sigma - mu_sigma)) * dt
        theta = theta_new
        sigma = sigma_new
        rbar = rbar + (rho * (r - rbar)) * dt
        G = G + r * dt
    return out


@accelerated
def weather_kernel(
    t0,
    dt,
    n_steps,
    record_stride,
    theta0,
    mu0,
    rbar0,
    G0,
    lam,
    eta,
    rho,
    sigma,
    knot_t0,
    knot_spacing,
    x_knots,
    x_slopes,
    ystar_knots,
    ystar_slopes,
    dW,
    out,
):
    """Linear readout over interpolated data streams.

    Inputs and target are cubic Hermite interpolants over uniformly
    spaced knots; knot values and precomputed backward-difference slopes
    are passed in. The interpolation is inlined here (kernels cannot call
    other wrapped kernels). ``out`` columns: t, theta x n, mu x n, rbar,
    G, delta.
    """
    n = theta0.shape[0]
    n_knots = x_knots.shape[0]
    theta = theta0.copy()
    mu = mu0.copy()
    rbar = rbar0
    G = G0
    x = np.empty(n)
    rec = 0
    for k in range(n_steps + 1):
        t = t0 + k * dt

        pos = (t - knot_t0) / knot_spacing
        seg = int(pos)
        if seg > n_knots - 2:
            seg = n_knots - 2
        if seg < 0:
            seg = 0
        s = pos - seg
        s2 = s * s
        s3 = s2 * s
        h00 = 2.0 * s3 - 3.0 * s2 + 1.0
        h10 = s3 - 2.0 * s2 + s
        h01 = -2.0 * s3 + 3.0 * s2
        h11 = s3 - s2
        for i in range(n):
            x[i] = (
                h00 * x_knots[seg, i]
                + h10 * knot_spacing * x_slopes[seg, i]
                + h01 * x_knots[seg + 1, i]
                + h11 * knot_spacing * x_slopes[seg + 1, i]
            )
        y_star = (
            h00 * ystar_knots[seg]
            + h10 * knot_spacing * ystar_slopes[seg]
            + h01 * ystar_knots[seg + 1]
            + h11 * knot_spacing * ystar_slopes[seg + 1]
        )
        y = 0.0
        for i in range(n):
            y += theta[i] * x[i]
        err = y - y_star
        r = -(err * err)
        delta = r - rbar

        if k % record_stride == 0 or k == n_steps:
            out[rec, 0] = t
            for i in range(n):
                out[rec, 1 + i] = theta[i]
                out[rec, 1 + n + i] = mu[i]
            out[rec, 1 + 2 * n] = rbar
            out[rec, 2 + 2 * n] = G
            out[rec, 3 + 2 * n] = delta
            rec += 1
        if k == n_steps:
            break

        for i in range(n):
            theta_i = theta[i]
            theta[i] = theta_i + (lam * (mu[i] - theta_i)) * dt + sigma[i] * dW[k, i]
            mu[i] = mu[i] + (eta * delta * (theta_i - mu[i])) * dt
        rbar = rbar + (rho * (r - rbar)) * dt
        G = G + r * dt
    return out
