"""Growth-rate bounds for the quadratic-exponential functional and the
worst-case quadratic cost over relative-entropy uncertainty balls.

Given a decay certificate ``(mu, Gamma, alpha)`` with
``||Z(tau)|| <= alpha exp(-mu |tau|)``, the QEF growth rate at risk
sensitivity ``theta`` in ``[0, mu / (4 alpha))`` is bounded by

    gamma(theta) = (n / 2) (mu - sqrt(mu^2 - 4 theta alpha mu)),

and the worst-case cost rate over states whose relative entropy grows at
most at rate ``eps`` is bounded by ``min_theta (eps + gamma(theta)) / theta``,
which has the closed form ``n alpha (1 + s + sqrt(s (2 + s)))`` with
``s = 2 eps / (n mu)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .config import DEFAULTS
from .errors import NegativeEps, QuadratureFailure, ThetaOutOfRange

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class RobustBound:
    eps: float
    sigma: float
    theta_star: float
    bound: float
    theta_max: float
    mu: float
    alpha: float
    n: int
    # (theta, gamma(theta), (eps + gamma(theta)) / theta) samples
    curve: list = field(default_factory=list, repr=False)
    # set when the optimal theta sits on the boundary theta -> 0 (eps == 0)
    boundary: bool = False

    def row(self):
        return {
            "eps": self.eps,
            "sigma": self.sigma,
            "theta_star": self.theta_star,
            "bound": self.bound,
            "mu": self.mu,
            "alpha": self.alpha,
            "n": self.n,
        }

    def to_dict(self):
        d = self.row()
        d.update(theta_max=self.theta_max, boundary=self.boundary,
                 curve=[list(c) for c in self.curve])
        return d


def theta_max(cert):
    """Upper end ``mu / (4 alpha)`` of the admissible risk-sensitivity range."""
    return math.inf if cert.alpha == 0 else cert.mu / (4.0 * cert.alpha)


def _gamma(theta, n, mu, alpha):
    # mu - sqrt(mu^2 - x) rewritten as x / (mu + sqrt(mu^2 - x)) to avoid cancellation
    x = 4.0 * theta * alpha * mu
    return 0.5 * n * x / (mu + math.sqrt(max(mu * mu - x, 0.0)))


def _check_theta(theta, cert):
    tmax = theta_max(cert)
    if not (0.0 <= theta < tmax):
        raise ThetaOutOfRange(f"theta={theta!r} outside [0, {tmax!r})")


def qef_rate_bound_closed(theta, n, cert):
    """Closed-form bound on the QEF growth rate at ``theta``."""
    _check_theta(theta, cert)
    return _gamma(theta, n, cert.mu, cert.alpha)


def qef_rate_bound_integral(theta, n, cert, quad_tol=None):
    """Spectral-integral form of the QEF growth-rate bound.

    Evaluates ``-(n / 4 pi) int ln(1 - 2 theta F(lam)) dlam`` with the
    Lorentzian ``F(lam) = 2 alpha mu / (lam^2 + mu^2)`` by adaptive
    quadrature on ``[-cut, cut]``.  Beyond the cutoff the first-order term
    of the logarithm is integrated exactly and the cutoff is chosen so that
    the neglected higher-order remainder stays below ``quad_tol / 2``.
    """
    quad_tol = DEFAULTS.quad_tol if quad_tol is None else quad_tol
    _check_theta(theta, cert)
    if theta == 0.0 or cert.alpha == 0.0:
        return 0.0
    mu = cert.mu
    c = 4.0 * theta * cert.alpha * mu  # 2 theta F(lam) = c / (lam^2 + mu^2)
    scale = n / (2.0 * math.pi)  # both half-lines folded into [0, inf)
    # for lam >= mu: 2 theta F <= 1/2, so -ln(1-x) - x <= x^2 and the
    # remainder is at most scale * c^2 / (3 cut^3)
    cut = max(mu, (2.0 * scale * c * c / (3.0 * quad_tol)) ** (1.0 / 3.0))

    def integrand(lam):
        return -math.log1p(-c / (lam * lam + mu * mu))

    core, err = integrate.quad(
        integrand, 0.0, cut, epsabs=quad_tol / (4.0 * scale), epsrel=0.0, limit=500
    )
    if not math.isfinite(core) or err > quad_tol / (2.0 * scale):
        raise QuadratureFailure(f"quadrature error estimate {err:.3g} exceeds budget")
    tail = (c / mu) * (math.pi / 2.0 - math.atan(cut / mu))
    return scale * (core + tail)


def _sigma(eps, n, mu):
    return 2.0 * eps / (n * mu)


def robust_bound_value(eps, n, mu, alpha):
    """Closed-form worst-case cost-rate bound ``n alpha (1 + s + sqrt(s (2 + s)))``."""
    if eps < 0:
        raise NegativeEps(f"eps must be nonnegative, got {eps!r}")
    s = _sigma(eps, n, mu)
    return n * alpha * (1.0 + s + math.sqrt(s * (2.0 + s)))


def optimal_theta(eps, n, mu, alpha):
    s = _sigma(eps, n, mu)
    r = math.sqrt(s * (2.0 + s))
    # 1 + s - r == 1 / (1 + s + r), which stays accurate for large s
    return (mu / (2.0 * alpha)) * r / (1.0 + s + r)


def _objective(theta, eps, n, mu, alpha):
    return (eps + _gamma(theta, n, mu, alpha)) / theta


def _curve(eps, n, cert, points):
    tmax = theta_max(cert)
    if not math.isfinite(tmax) or points <= 0:
        return []
    thetas = np.geomspace(1e-6 * tmax, (1.0 - 1e-6) * tmax, points)
    out = []
    for t in thetas:
        g = _gamma(t, n, cert.mu, cert.alpha)
        out.append((float(t), g, (eps + g) / t))
    return out


def worst_case_bound_closed(eps, n, cert, curve_points=None):
    """Worst-case cost-rate bound and optimal risk sensitivity in closed form."""
    if eps < 0:
        raise NegativeEps(f"eps must be nonnegative, got {eps!r}")
    curve_points = DEFAULTS.curve_points if curve_points is None else curve_points
    mu, alpha = cert.mu, cert.alpha
    sigma = _sigma(eps, n, mu)
    bound = robust_bound_value(eps, n, mu, alpha)
    tmax = theta_max(cert)
    if alpha == 0.0:
        theta_star = math.inf
    else:
        theta_star = optimal_theta(eps, n, mu, alpha)
    return RobustBound(
        eps=float(eps), sigma=sigma, theta_star=theta_star, bound=bound,
        theta_max=tmax, mu=mu, alpha=alpha, n=n,
        curve=_curve(eps, n, cert, curve_points), boundary=(eps == 0 or alpha == 0.0),
    )


def golden_section(f, a, b, tol, max_iter=200):
    """Minimise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``.

    Only interior points are evaluated, so ``f`` may be undefined at the
    endpoints.
    """
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def worst_case_bound_numeric(eps, n, cert, grid=None):
    """Minimise ``(eps + gamma(theta)) / theta`` numerically.

    A logarithmic grid over ``(0, mu / (4 alpha))`` locates the minimum and
    golden-section search refines it inside the bracketing grid cell.  The
    objective is convex in ``theta``, so the bracket always holds the
    minimiser.
    """
    if eps < 0:
        raise NegativeEps(f"eps must be nonnegative, got {eps!r}")
    grid = DEFAULTS.theta_grid if grid is None else grid
    if grid < 16:
        raise ValueError(f"grid must have at least 16 points, got {grid}")
    mu, alpha = cert.mu, cert.alpha
    if alpha == 0.0:
        return worst_case_bound_closed(eps, n, cert)
    tmax = theta_max(cert)
    thetas = np.geomspace(1e-6 * tmax, tmax * (1.0 - 1e-12), grid)
    values = np.array([_objective(t, eps, n, mu, alpha) for t in thetas])
    k = int(np.argmin(values))
    lo = thetas[k - 1] if k > 0 else 0.0
    hi = thetas[k + 1] if k < grid - 1 else tmax
    theta_opt, best = golden_section(
        lambda t: _objective(t, eps, n, mu, alpha), lo, hi, tol=1e-15 * tmax
    )
    if values[k] < best:
        theta_opt, best = float(thetas[k]), float(values[k])
    curve = [(float(t), _gamma(t, n, mu, alpha), float(v)) for t, v in zip(thetas, values)]
    return RobustBound(
        eps=float(eps), sigma=_sigma(eps, n, mu), theta_star=float(theta_opt),
        bound=float(best), theta_max=tmax, mu=mu, alpha=alpha, n=n,
        curve=curve, boundary=(eps == 0),
    )


def sweep(eps_list, n, cert):
    """Closed-form bounds for each threshold, in ascending order of ``eps``."""
    eps_list = [float(e) for e in eps_list]
    bad = [e for e in eps_list if e < 0]
    if bad:
        raise NegativeEps(f"negative eps values: {bad}")
    return [worst_case_bound_closed(e, n, cert) for e in sorted(eps_list)]
