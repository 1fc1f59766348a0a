"""Open quantum harmonic oscillator models.

An oscillator is specified by its CCR matrix ``Theta``, Hamiltonian matrix
``K``, coupling matrix ``M`` and cost weight ``Pi``.  From these we derive
the drift/dispersion pair ``(A, B)``, the invariant Gaussian state
covariance ``P`` for vacuum input fields and the two-point kernels

    Lambda(tau) = expm(tau A) Theta       (tau >= 0)
    Sigma(tau)  = expm(tau A) P           (tau >= 0)
    Z(tau)      = sqrt(Pi) (Sigma(tau) + i Lambda(tau)) sqrt(Pi)

extended to negative ``tau`` by (conjugate) transposition.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import matnum
from .config import DEFAULTS
from .errors import DimensionMismatch, InvalidParams, NotHurwitz


def canonical_j(m):
    """Block matrix ``[[0, I], [-I, 0]]`` of even order ``m`` (so ``J @ J = -I``)."""
    if m <= 0 or m % 2:
        raise InvalidParams(f"order must be even and positive, got {m}")
    h = m // 2
    J = np.zeros((m, m))
    J[:h, h:] = np.eye(h)
    J[h:, :h] = -np.eye(h)
    return J


def ito_matrix(m):
    """Ito matrix ``I + iJ`` of ``m`` vacuum field channels."""
    return np.eye(m) + 1j * canonical_j(m)


def _matrix(name, value, shape):
    arr = np.asarray(value, dtype=float)
    if arr.shape != shape:
        raise DimensionMismatch(f"{name} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParams(f"{name} has non-finite entries")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class OqhoParams:
    """Physical parameters of an oscillator and its quadratic cost.

    Arrays are copied, made read-only and checked on construction; an
    inconsistent set of parameters raises :class:`InvalidParams`.
    """

    n: int
    m: int
    Theta: np.ndarray
    K: np.ndarray
    M: np.ndarray
    Pi: np.ndarray

    def __post_init__(self):
        for name in ("n", "m"):
            v = getattr(self, name)
            if int(v) != v or v <= 0 or int(v) % 2:
                raise InvalidParams(f"{name} must be an even positive integer, got {v!r}")
        n, m = int(self.n), int(self.m)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "Theta", _matrix("Theta", self.Theta, (n, n)))
        object.__setattr__(self, "K", _matrix("K", self.K, (n, n)))
        object.__setattr__(self, "M", _matrix("M", self.M, (m, n)))
        object.__setattr__(self, "Pi", _matrix("Pi", self.Pi, (n, n)))
        self.validate()

    def validate(self):
        Theta, K, Pi = self.Theta, self.K, self.Pi
        scale = max(matnum.operator_norm(Theta), 1.0)
        if matnum.operator_norm(Theta + Theta.T) > 1e-12 * scale:
            raise InvalidParams("Theta is not antisymmetric")
        norm = matnum.operator_norm(Theta)
        if abs(np.linalg.det(Theta)) <= 1e-12 * norm**self.n:
            raise InvalidParams("Theta is singular")
        if matnum.operator_norm(K - K.T) > 1e-12 * max(matnum.operator_norm(K), 1.0):
            raise InvalidParams("K is not symmetric")
        if matnum.operator_norm(Pi - Pi.T) > 1e-12 * max(matnum.operator_norm(Pi), 1.0):
            raise InvalidParams("Pi is not symmetric")
        w = np.linalg.eigvalsh(matnum.symmetrize(Pi))
        if w.min() < -DEFAULTS.psd_clamp_rtol * max(abs(w).max(), 0.0):
            raise InvalidParams(f"Pi is not positive semi-definite (min eigenvalue {w.min():.3g})")

    @property
    def sqrt_pi(self):
        return matnum.sqrtm_psd(self.Pi)

    def to_dict(self):
        return {
            "n": self.n,
            "m": self.m,
            "Theta": self.Theta.tolist(),
            "K": self.K.tolist(),
            "M": self.M.tolist(),
            "Pi": self.Pi.tolist(),
        }

    @classmethod
    def from_dict(cls, doc):
        missing = [k for k in ("n", "m", "Theta", "K", "M", "Pi") if k not in doc]
        if missing:
            raise InvalidParams(f"missing fields: {', '.join(missing)}")
        return cls(doc["n"], doc["m"], doc["Theta"], doc["K"], doc["M"], doc["Pi"])


@dataclass(frozen=True)
class StateSpace:
    A: np.ndarray
    B: np.ndarray
    J: np.ndarray
    pr_residual: float
    hurwitz: bool

    @property
    def spectral_abscissa(self):
        return matnum.spectral_abscissa(self.A)

    @classmethod
    def from_matrices(cls, A, B, Theta):
        """Wrap an arbitrary ``(A, B)`` pair, computing its realizability residual."""
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        ss = cls(A, B, canonical_j(B.shape[1]), float("nan"), matnum.is_hurwitz(A))
        return replace(ss, pr_residual=check_physical_realizability(ss, Theta))


@dataclass(frozen=True)
class InvariantModel:
    P: np.ndarray
    Theta: np.ndarray
    nominal_rate: float

    @property
    def quantum_covariance(self):
        return self.P + 1j * self.Theta


def check_physical_realizability(ss, Theta):
    """Operator norm of ``A Theta + Theta A^T + B J B^T``; zero iff the CCRs are preserved."""
    A, B, J = ss.A, ss.B, ss.J
    Theta = np.asarray(Theta, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or Theta.shape != (n, n) or B.shape[0] != n or J.shape != (B.shape[1],) * 2:
        raise DimensionMismatch(
            f"inconsistent shapes A{A.shape} B{B.shape} J{J.shape} Theta{Theta.shape}"
        )
    return matnum.operator_norm(A @ Theta + Theta @ A.T + B @ J @ B.T)


def build_state_space(params):
    """Drift ``A = 2 Theta (K + M^T J M)`` and dispersion ``B = 2 Theta M^T``."""
    params.validate()
    J = canonical_j(params.m)
    Theta, M = params.Theta, params.M
    A = 2.0 * Theta @ (params.K + M.T @ J @ M)
    B = 2.0 * Theta @ M.T
    ss = StateSpace(A, B, J, float("nan"), matnum.is_hurwitz(A))
    return replace(ss, pr_residual=check_physical_realizability(ss, Theta))


def invariant_model(params, ss):
    """Invariant Gaussian state of a stable oscillator driven by vacuum fields."""
    if not ss.hurwitz:
        raise NotHurwitz(f"A is not Hurwitz (spectral abscissa {ss.spectral_abscissa:.6g})")
    P = matnum.solve_lyapunov(ss.A, ss.B @ ss.B.T)
    rate = float(np.trace(params.Pi @ P))
    return InvariantModel(P, params.Theta, max(rate, 0.0))


def _causal_kernel(A, X, tau):
    if tau >= 0:
        return matnum.expm(tau * A) @ X
    return X @ matnum.expm(-tau * A.T)


def ccr_kernel(ss, Theta, tau):
    """Two-point commutation matrix ``Lambda(tau)``."""
    return _causal_kernel(ss.A, np.asarray(Theta, dtype=float), tau)


def covariance_kernel(inv, ss, tau):
    """Real part ``Sigma(tau)`` of the two-point covariance in the invariant state."""
    return _causal_kernel(ss.A, inv.P, tau)


def weighted_covariance(params, inv, ss, tau):
    """Two-point covariance ``Z(tau)`` of the weighted variables ``sqrt(Pi) X``."""
    R = params.sqrt_pi
    E = matnum.expm(abs(tau) * ss.A)
    if tau >= 0:
        kernel = E @ inv.quantum_covariance
    else:
        kernel = inv.quantum_covariance @ E.T
    return R @ kernel @ R


def random_params(rng, n=4, m=4, max_tries=100_000):
    """Draw a random oscillator with Hurwitz drift.

    ``K`` is symmetric with standard normal entries on and above the
    diagonal, ``M`` is standard normal, ``Theta`` is the canonical form of
    order ``n`` and ``Pi = L L^T / n`` for a standard normal ``L``.  Draws
    whose drift is not Hurwitz are rejected.
    """
    Theta = canonical_j(n)
    for _ in range(max_tries):
        G = rng.standard_normal((n, n))
        K = np.triu(G) + np.triu(G, 1).T
        M = rng.standard_normal((m, n))
        A = 2.0 * Theta @ (K + M.T @ canonical_j(m) @ M)
        if matnum.is_hurwitz(A):
            L = rng.standard_normal((n, n))
            return OqhoParams(n, m, Theta, K, M, L @ L.T / n)
    raise RuntimeError(f"no Hurwitz draw in {max_tries} attempts for n={n}, m={m}")


def worked_example():
    """Two-mode example with ``A = -2I``, ``B = 2J`` and ``P = I``."""
    J = canonical_j(2)
    return OqhoParams(2, 2, J, np.zeros((2, 2)), np.eye(2), np.eye(2))
