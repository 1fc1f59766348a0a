"""Dense matrix numerics: Lyapunov solves, matrix exponential, PSD roots.

Everything here works on small dense ``numpy`` arrays (n up to a few
dozen).  Functions are pure and never mutate their inputs.
"""

import math

import numpy as np

from .config import PSD_CLAMP_RTOL
from .errors import NotHurwitz, NotPsd, SingularSolve

# Pade(13) coefficients and the 1-norm threshold below which no scaling is
# needed (Higham, 2005).
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152

# reciprocal condition number below which the Kronecker system is rejected
_RCOND_MIN = 1e-14


def _as_square(A, name="A"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    return A


def symmetrize(M):
    return 0.5 * (M + M.T)


def spectral_abscissa(A):
    """Largest real part over the eigenvalues of ``A``."""
    A = _as_square(A)
    return float(np.max(np.linalg.eigvals(A).real))


def is_hurwitz(A):
    return spectral_abscissa(A) < 0.0


def operator_norm(M):
    """Largest singular value of a real or complex matrix."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def solve_lyapunov(A, Q):
    """Solve ``A X + X A^T + Q = 0`` for symmetric ``X``.

    The equation is vectorised as ``(A (+) A) vec(X) = -vec(Q)`` with the
    Kronecker sum ``I (x) A + A (x) I``, which is fine at the problem sizes
    this package targets.

    Raises:
        NotHurwitz: if ``A`` has an eigenvalue with nonnegative real part.
        SingularSolve: if the Kronecker system is numerically singular.
    """
    A = _as_square(A)
    Q = _as_square(Q, "Q")
    n = A.shape[0]
    if Q.shape != A.shape:
        raise ValueError(f"Q has shape {Q.shape}, expected {A.shape}")
    sa = spectral_abscissa(A)
    if sa >= 0.0:
        raise NotHurwitz(f"spectral abscissa {sa:.6g} is not negative")
    eye = np.eye(n)
    L = np.kron(eye, A) + np.kron(A, eye)
    if 1.0 / np.linalg.cond(L, 1) < _RCOND_MIN:
        raise SingularSolve("Kronecker-sum system is numerically singular")
    try:
        x = np.linalg.solve(L, -symmetrize(Q).reshape(-1))
    except np.linalg.LinAlgError as exc:
        raise SingularSolve(str(exc)) from exc
    return symmetrize(x.reshape(n, n))


def lyapunov_residual(A, X, Q):
    return operator_norm(A @ X + X @ A.T + Q)


def expm(A):
    """Matrix exponential by scaling and squaring with a [13/13] Pade approximant."""
    A = _as_square(A)
    n = A.shape[0]
    norm1 = np.linalg.norm(A, 1)
    if norm1 == 0.0:
        return np.eye(n)
    s = max(0, int(math.ceil(math.log2(norm1 / _THETA13))))
    X = A / 2.0**s
    b = _PADE13
    eye = np.eye(n)
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    U = X @ (
        X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2)
        + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * eye
    )
    V = (
        X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2)
        + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * eye
    )
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def _eigh_checked(M, clamp_rtol):
    M = _as_square(M, "M")
    scale = operator_norm(M)
    w, V = np.linalg.eigh(symmetrize(M))
    floor = -clamp_rtol * scale
    if w.size and w.min() < floor:
        raise NotPsd(f"minimum eigenvalue {w.min():.6g} below {floor:.3g}")
    return np.clip(w, 0.0, None), V


def sqrtm_psd(M, clamp_rtol=PSD_CLAMP_RTOL):
    """Principal square root of a symmetric positive semi-definite matrix.

    Slightly negative eigenvalues (down to ``-clamp_rtol * ||M||``) are
    treated as rounding noise and clamped to zero.
    """
    w, V = _eigh_checked(M, clamp_rtol)
    return symmetrize((V * np.sqrt(w)) @ V.T)


def inv_sqrtm_pd(M):
    """Inverse square root of a symmetric positive definite matrix."""
    w, V = np.linalg.eigh(symmetrize(_as_square(M, "M")))
    if w.min() <= 0.0:
        raise NotPsd(f"matrix is not positive definite (min eigenvalue {w.min():.6g})")
    return symmetrize((V / np.sqrt(w)) @ V.T)


def psd_margin(L, R):
    """Smallest eigenvalue of ``R - L``; nonnegative iff ``L <= R`` in Loewner order."""
    D = _as_square(R, "R") - _as_square(L, "L")
    return float(np.linalg.eigvalsh(symmetrize(D)).min())


def psd_order_holds(L, R, tol):
    return psd_margin(L, R) >= -tol
