"""Classical-limit oracles for the covariance machinery.

Replacing the quantum Wiener processes by a standard classical Wiener
process turns the oscillator into the linear SDE ``dx = A x dt + B dw``
whose stationary covariance is the same ``P``.  Two independent routes
are provided:

* Euler-Maruyama Monte Carlo of the quadratic cost rate and of the
  exponential-moment rate ``(1 / (theta T)) ln E exp(theta int x^T Pi x dt)``;
* the spectral formula for the large-time exponential-moment rate,
  ``(1 / (4 pi theta)) int -ln det(I - 2 theta Phi(lam)) dlam``, with
  ``Phi(lam) = sqrt(Pi) H(lam) B B^T H(lam)^* sqrt(Pi)`` and
  ``H(lam) = (i lam I - A)^{-1}``.
"""

import math
import warnings
from dataclasses import asdict, dataclass, field

import numba
import numpy as np
from scipy import integrate, optimize
from scipy.special import logsumexp

from . import matnum
from .errors import ConfigInvalid, NotHurwitz, ThetaSupercritical
from .oqho import invariant_model

# log of the largest finite double; per-path exponents above it would
# overflow a naive exp()
_LOG_MAX = math.log(np.finfo(float).max)
_OVERFLOW_FLAG_FRACTION = 1e-3


class MomentOverflow(RuntimeWarning):
    """Too many trajectories had exponents beyond the double range."""


@dataclass(frozen=True)
class SimConfig:
    horizon: float = 50.0
    dt: float = 1e-3
    trajectories: int = 2000
    seed: int = 0
    theta: float = 0.0

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigInvalid(f"dt must be positive, got {self.dt!r}")
        if not self.horizon >= 10 * self.dt:
            raise ConfigInvalid("horizon must be at least 10 time steps")
        if self.trajectories < 100:
            raise ConfigInvalid("at least 100 trajectories are required")
        if not self.theta >= 0:
            raise ConfigInvalid(f"theta must be nonnegative, got {self.theta!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigInvalid("seed must be a 64-bit unsigned integer")

    @property
    def steps(self):
        return int(round(self.horizon / self.dt))


@dataclass
class SimReport:
    quad_rate_estimate: float
    quad_rate_stderr: float
    nominal_rate: float
    burn_in: float
    exp_rate_estimate: float | None = None
    exp_rate_stderr: float | None = None
    spectral_rate: float | None = None
    overflowed: int = 0
    flags: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def default_dt(A):
    return 1e-3 * min(1.0, 1.0 / max(matnum.operator_norm(A), 1e-300))


@numba.njit(cache=True)
def _path_integrals(gen, F, Bs, Pi, dt, steps, keep_from):
    # left-point sums of x^T Pi x over [0, T] and over the post burn-in tail
    n, m = Bs.shape
    x = np.zeros(n)
    y = np.empty(n)
    w = np.empty(m)
    full = 0.0
    tail = 0.0
    for k in range(steps):
        q = 0.0
        for a in range(n):
            for b in range(n):
                q += x[a] * Pi[a, b] * x[b]
        full += q
        if k >= keep_from:
            tail += q
        for b in range(m):
            w[b] = gen.standard_normal()
        for a in range(n):
            s = 0.0
            for b in range(n):
                s += F[a, b] * x[b]
            for b in range(m):
                s += Bs[a, b] * w[b]
            y[a] = s
        x[:] = y
    return full * dt, tail * dt


def _simulate(ss, params, cfg, burn_steps):
    """Per-path time integrals of ``x^T Pi x`` over the full horizon and after burn-in.

    Every trajectory draws from its own generator spawned from ``cfg.seed``,
    so results do not depend on evaluation order.
    """
    n = ss.A.shape[0]
    F = np.ascontiguousarray(np.eye(n) + cfg.dt * ss.A)
    Bs = np.ascontiguousarray(math.sqrt(cfg.dt) * ss.B)
    Pi = np.ascontiguousarray(params.Pi)
    full = np.empty(cfg.trajectories)
    tail = np.empty(cfg.trajectories)
    for i, child in enumerate(np.random.SeedSequence(cfg.seed).spawn(cfg.trajectories)):
        gen = np.random.Generator(np.random.PCG64(child))
        full[i], tail[i] = _path_integrals(gen, F, Bs, Pi, cfg.dt, cfg.steps, burn_steps)
    return full, tail


def _burn_in(ss, cfg):
    decay = -matnum.spectral_abscissa(ss.A)
    # never discard more than half of a short horizon; such runs are flagged
    return min(max(5.0 / decay, 0.1 * cfg.horizon), 0.5 * cfg.horizon), decay


def simulate_quadratic_rate(ss, params, cfg):
    """Monte Carlo estimate of the stationary rate ``E x^T Pi x``.

    Paths start at ``x(0) = 0``; the first ``max(5 / mu, T / 10)`` time
    units of each path are discarded, ``mu`` being the decay margin of
    ``A``.  When ``T mu < 5`` at most ``T / 2`` is discarded and the report
    carries the ``finite_horizon`` flag.
    """
    return _run(ss, params, cfg, with_moment=False)


def simulate_exp_moment_rate(ss, params, cfg):
    """Monte Carlo estimate of ``(1 / (theta T)) ln E exp(theta int_0^T x^T Pi x dt)``.

    The expectation is accumulated in log space.  Trajectories whose
    exponent exceeds the double range are counted; if more than 0.1% of
    them do, the estimate is flagged and :class:`MomentOverflow` is
    warned.
    """
    if not cfg.theta > 0:
        raise ConfigInvalid("theta must be positive; use simulate_quadratic_rate for theta = 0")
    return _run(ss, params, cfg, with_moment=True)


def _run(ss, params, cfg, with_moment):
    if not ss.hurwitz:
        raise NotHurwitz("A is not Hurwitz")
    burn, decay = _burn_in(ss, cfg)
    flags = []
    if cfg.horizon * decay < 5:
        flags.append("finite_horizon")
    nominal = invariant_model(params, ss).nominal_rate
    burn_steps = int(math.ceil(burn / cfg.dt))
    full, tail = _simulate(ss, params, cfg, burn_steps)
    window = (cfg.steps - burn_steps) * cfg.dt
    per_path = tail / window
    N = cfg.trajectories
    report = SimReport(
        quad_rate_estimate=float(per_path.mean()),
        quad_rate_stderr=float(per_path.std(ddof=1) / math.sqrt(N)),
        nominal_rate=nominal,
        burn_in=burn,
        flags=flags,
    )
    if with_moment:
        theta, T = cfg.theta, cfg.steps * cfg.dt
        expo = theta * full
        report.overflowed = int(np.sum(expo > _LOG_MAX))
        if report.overflowed > _OVERFLOW_FLAG_FRACTION * N:
            flags.append("moment_overflow")
            warnings.warn(f"{report.overflowed} of {N} path exponents overflow", MomentOverflow)
        log_mean = logsumexp(expo) - math.log(N)
        w = np.exp(expo - expo.max())
        rel_se = w.std(ddof=1) / (w.mean() * math.sqrt(N))
        report.exp_rate_estimate = float(log_mean / (theta * T))
        report.exp_rate_stderr = float(rel_se / (theta * T))
        try:
            report.spectral_rate = classical_spectral_rate(ss, params, theta)
        except ThetaSupercritical:
            flags.append("supercritical")
    return report


def _phi_eigs(lam, A, BBt, R):
    n = A.shape[0]
    H = np.linalg.solve(1j * lam * np.eye(n) - A, np.eye(n))
    Phi = R @ H @ BBt @ H.conj().T @ R
    return np.linalg.eigvalsh(0.5 * (Phi + Phi.conj().T))


def _frequency_scale(A):
    ev = np.linalg.eigvals(A)
    return float(max(np.abs(ev).max(), 1e-12)), sorted({abs(float(w)) for w in ev.imag})


def classical_critical_theta(ss, params):
    """Largest ``theta`` with ``2 theta Phi(lam) < I`` for every frequency."""
    A, R = ss.A, params.sqrt_pi
    BBt = ss.B @ ss.B.T
    scale, peaks = _frequency_scale(A)
    grid = np.unique(np.concatenate([
        np.linspace(0.0, 10.0 * scale, 2001), np.asarray(peaks, dtype=float)]))
    top = np.array([_phi_eigs(l, A, BBt, R)[-1] for l in grid])
    k = int(np.argmax(top))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    best = top[k]
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda l: -_phi_eigs(l, A, BBt, R)[-1], bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-12 * scale})
        best = max(best, -res.fun)
    return math.inf if best <= 0 else 1.0 / (2.0 * best)


def classical_spectral_rate(ss, params, theta, tol=1e-11):
    """Large-time exponential-moment rate of the classical analog.

    At ``theta = 0`` the limiting value ``trace(Pi P)`` is returned through
    the same frequency integral.
    """
    if not ss.hurwitz:
        raise NotHurwitz("A is not Hurwitz")
    if theta < 0:
        raise ThetaSupercritical(f"theta must be nonnegative, got {theta!r}")
    if theta > 0 and theta >= classical_critical_theta(ss, params):
        raise ThetaSupercritical(f"theta={theta!r} at or above the classical critical value")
    A, R = ss.A, params.sqrt_pi
    BBt = ss.B @ ss.B.T

    def integrand(lam):
        e = _phi_eigs(lam, A, BBt, R)
        if theta == 0:
            return 2.0 * float(e.sum())
        return float(-np.log1p(-2.0 * theta * e).sum() / theta)

    scale, peaks = _frequency_scale(A)
    cut = 10.0 * scale
    inner, _ = integrate.quad(integrand, 0.0, cut, points=[p for p in peaks if 0 < p < cut] or None,
                              epsabs=0.0, epsrel=tol, limit=500)
    outer, _ = integrate.quad(integrand, cut, np.inf, epsabs=0.0, epsrel=tol, limit=500)
    # integrand is even in lam
    return (inner + outer) / (2.0 * math.pi)
