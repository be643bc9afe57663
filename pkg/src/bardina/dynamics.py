"""Time integration of the damped Bardina system and energy diagnostics.

The semi-linear structure du/dt = L u + N(u) + f is integrated with a
second-order exponential (ETD2RK) scheme.  The linear symbol
lambda(k) = -(nu |k|^2 + beta) is diagonal in Fourier space and treated
exactly; the nonlinear term and the force enter through phi-function
weights.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .spectral import (
    VectorField,
    dealias,
    dealias_mask,
    h1alpha_inner,
    leray_project,
    norms,
    tensor_product_spectra,
    vector_to_physical,
    wavenumber_sq,
    wavevectors,
)

__all__ = [
    "SimState",
    "DiagnosticsSample",
    "Trajectory",
    "BlowUpError",
    "nonlinear_term",
    "step",
    "evolve",
    "cfl_cap",
    "energy_budget_residual",
    "decay_envelope_check",
    "absorbing_ball_entry",
]


class BlowUpError(RuntimeError):
    """Raised when the state develops NaN/Inf coefficients."""

    def __init__(self, t, detail=""):
        self.t = t
        super().__init__(f"non-finite state at t={t:.6g} {detail}".rstrip())


@dataclass
class SimState:
    u: VectorField
    t: float
    params: "PhysParams"
    force: VectorField


@dataclass(frozen=True)
class DiagnosticsSample:
    t: float
    l2_sq: float
    h1dot_sq: float
    h2dot_sq: float
    h1alpha_sq: float
    dissipation: float  # nu (|u|_H1^2 + alpha^2 |u|_H2^2)
    damping: float      # beta |u|_{H1_alpha}^2
    force_pairing: float  # <f, u>_{H1_alpha}


@dataclass
class Trajectory:
    samples: list = field(default_factory=list)

    @property
    def times(self):
        return np.array([s.t for s in self.samples])

    def series(self, name):
        return np.array([getattr(s, name) for s in self.samples])

    def integral(self, name):
        """Cumulative trapezoid integral of a diagnostic series."""
        t = self.times
        y = self.series(name)
        if len(t) < 2:
            return np.zeros_like(t)
        return cumulative_trapezoid(y, t, initial=0.0)


def nonlinear_term(u, alpha):
    """P div((u (x) u)_alpha): the Bardina nonlinearity, dealiased."""
    grid = u.grid
    tensor = tensor_product_spectra(u)
    bessel = 1.0 / (1.0 + alpha**2 * wavenumber_sq(grid))
    k = wavevectors(grid)
    div = np.empty_like(u.coeffs)
    for i in range(3):
        acc = np.zeros((grid.n,) * 3, dtype=np.complex128)
        for j in range(3):
            acc += 1j * k[j] * (bessel * tensor[i, j])
        div[i] = acc
    out = leray_project(VectorField(grid, div))
    return dealias(out)


def _phi1(z):
    """(e^z - 1)/z with a series fallback near z = 0."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-4
    zs = z[small]
    out[small] = 1.0 + zs / 2.0 + zs**2 / 6.0 + zs**3 / 24.0
    zl = z[~small]
    out[~small] = np.expm1(zl) / zl
    return out


def _phi2(z):
    """(e^z - z - 1)/z^2 with a series fallback near z = 0."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-4
    zs = z[small]
    out[small] = 0.5 + zs / 6.0 + zs**2 / 24.0 + zs**3 / 120.0
    zl = z[~small]
    out[~small] = (np.expm1(zl) - zl) / zl**2
    return out


def _etd_weights(grid, params, dt):
    lam = -(params.nu * wavenumber_sq(grid) + params.beta)
    z = lam * dt
    return np.exp(z), dt * _phi1(z), dt * _phi2(z)


def _rhs_nonlinear(u, force, alpha):
    """N(u) + f with N(u) = -P div((u (x) u)_alpha)."""
    return force.coeffs - nonlinear_term(u, alpha).coeffs


def cfl_cap(u, grid):
    """Advective CFL limit 0.5 * dx / max|u| (inf when the field is zero)."""
    umax = np.abs(vector_to_physical(u)).max()
    if umax == 0:
        return np.inf
    return 0.5 * grid.dx / umax


def step(state, dt, _weights=None):
    """Advance one ETD2RK step.  Raises BlowUpError on non-finite output."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    grid = state.u.grid
    alpha = state.params.alpha
    if _weights is None:
        _weights = _etd_weights(grid, state.params, dt)
    expz, w1, w2 = _weights

    n0 = _rhs_nonlinear(state.u, state.force, alpha)
    predictor = expz * state.u.coeffs + w1 * n0
    upred = VectorField(grid, predictor)
    n1 = _rhs_nonlinear(upred, state.force, alpha)
    out = predictor + w2 * (n1 - n0)

    if not np.all(np.isfinite(out)):
        raise BlowUpError(state.t + dt)
    u_new = VectorField(grid, out * dealias_mask(grid), div_free=True)
    return SimState(u_new, state.t + dt, state.params, state.force)


def sample_diagnostics(state):
    p = state.params
    nb = norms(state.u, p.alpha)
    return DiagnosticsSample(
        t=state.t,
        l2_sq=nb.l2_sq,
        h1dot_sq=nb.h1dot_sq,
        h2dot_sq=nb.h2dot_sq,
        h1alpha_sq=nb.h1alpha_sq,
        dissipation=p.nu * (nb.h1dot_sq + p.alpha**2 * nb.h2dot_sq),
        damping=p.beta * nb.h1alpha_sq,
        force_pairing=h1alpha_inner(state.force, state.u, p.alpha),
    )


def evolve(state, t_end, dt, sample_every=1, enforce_cfl=True):
    """Repeated stepping with diagnostics sampling every sample_every steps.

    Returns (final_state, Trajectory).  The trajectory always contains the
    initial and the final sample.
    """
    if t_end < state.t:
        raise ValueError("t_end precedes current state time")
    if enforce_cfl:
        cap = cfl_cap(state.u, state.u.grid)
        if dt > cap:
            raise ValueError(f"dt={dt} exceeds the CFL cap {cap:.3e}")
    traj = Trajectory()
    traj.samples.append(sample_diagnostics(state))
    n_steps = int(round((t_end - state.t) / dt))
    if n_steps == 0 and t_end > state.t:
        n_steps = 1
    weights = _etd_weights(state.u.grid, state.params, dt)
    for i in range(1, n_steps + 1):
        state = step(state, dt, _weights=weights)
        if i % sample_every == 0 or i == n_steps:
            traj.samples.append(sample_diagnostics(state))
    return state, traj


def energy_budget_residual(trajectory):
    """Relative defect of the energy equality (nu-corrected form) per sample:

      E(t) - E(0) + 2 int diss + 2 int damp - 2 int force = 0,

    normalized by max(E(0), 1), with trapezoid quadrature in time.
    """
    e = trajectory.series("h1alpha_sq")
    if len(e) == 0:
        return np.array([])
    i_diss = trajectory.integral("dissipation")
    i_damp = trajectory.integral("damping")
    i_force = trajectory.integral("force_pairing")
    return (e - e[0] + 2 * i_diss + 2 * i_damp - 2 * i_force) / max(e[0], 1.0)


@dataclass(frozen=True)
class EnvelopeReport:
    pointwise_slack: float   # max over samples of E(t) - envelope(t)
    windowed_slack: float    # max over windows of lhs - rhs of the window bound
    passed: bool


def decay_envelope_check(trajectory, force, params, slack_tol=None):
    """Check the two decay controls of the damped model.

      E(t) <= E(0) e^{-beta t} + (4/beta^2) |f|_{H1_alpha}^2            (pointwise)
      nu int_t^{t+T} |u|_H1^2 + alpha^2 int |u|_H2^2
          <= (2T/beta) |f|_{H1_alpha}^2 + E(t)                          (windows)

    Windows run from each sample time to the final time.  Returns an
    EnvelopeReport with the worst (most positive) slack of each family.
    """
    p = params
    t = trajectory.times
    e = trajectory.series("h1alpha_sq")
    f_sq = norms(force, p.alpha).h1alpha_sq
    if slack_tol is None:
        slack_tol = 1e-12 * max(e[0], 1.0)

    envelope = e[0] * np.exp(-p.beta * (t - t[0])) + (4.0 / p.beta**2) * f_sq
    pointwise = float((e - envelope).max())

    i_h1 = trajectory.integral("h1dot_sq")
    i_h2 = trajectory.integral("h2dot_sq")
    lhs_total = p.nu * i_h1 + p.alpha**2 * i_h2
    # windows [t_i, t_end] for every sample i
    windowed = -np.inf
    for i in range(len(t)):
        lhs = lhs_total[-1] - lhs_total[i]
        rhs = (2.0 * (t[-1] - t[i]) / p.beta) * f_sq + e[i]
        windowed = max(windowed, lhs - rhs)
    windowed = float(windowed)

    return EnvelopeReport(
        pointwise_slack=pointwise,
        windowed_slack=windowed,
        passed=pointwise <= slack_tol and windowed <= slack_tol,
    )


def absorbing_ball_entry(trajectory, force, params):
    """First sample time with E(t) <= (8/beta^2) |f|_{H1_alpha}^2.

    Returns (entry_time_or_None, radius_sq, analytic_bound_or_None).  With a
    zero force the ball degenerates to {0}; entry is then reported only for
    an identically zero state.
    """
    p = params
    f_sq = norms(force, p.alpha).h1alpha_sq
    radius_sq = (8.0 / p.beta**2) * f_sq
    t = trajectory.times
    e = trajectory.series("h1alpha_sq")
    if f_sq == 0:
        entry = t[0] if e[0] == 0 else None
        return entry, 0.0, None
    inside = np.nonzero(e <= radius_sq)[0]
    entry = float(t[inside[0]]) if len(inside) else None
    bound = None
    if e[0] > radius_sq:
        bound = (1.0 / p.beta) * np.log(p.beta**2 * e[0] / (4.0 * f_sq))
    return entry, radius_sq, bound
