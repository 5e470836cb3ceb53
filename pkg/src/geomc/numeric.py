"""Dense linear algebra and special-function kernels.

Everything here is a pure function of its arguments. Random streams are plain
:class:`numpy.random.Generator` objects; independent per-chain streams come from
:func:`split_rng`, which uses the generator's ``SeedSequence`` spawning.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfcx, ndtr

from geomc.errors import DimensionError, DomainError

__all__ = [
    "matrix_exp",
    "project_out_basis",
    "log_probit",
    "probit_ratio",
    "make_rng",
    "split_rng",
]

# Pade coefficients and 1-norm thresholds for degrees 3, 5, 7, 9, 13
# (Higham 2005, "The scaling and squaring method for the matrix exponential
# revisited").
_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (
        17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0,
    ),
    13: (
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
        16380.0, 182.0, 1.0,
    ),
}
_THETA = (
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
)
_THETA_13 = 5.371920351148152e0


def _pade_low(a, b):
    n = a.shape[0]
    eye = np.eye(n)
    a2 = a @ a
    # build even/odd polynomials in a2 via Horner
    deg = len(b) - 1
    u = b[deg] * eye
    v = b[deg - 1] * eye
    for k in range(deg - 2, 0, -2):
        u = u @ a2 + b[k] * eye
        v = v @ a2 + b[k - 1] * eye
    return a @ u, v


def _pade13(a):
    b = _PADE[13]
    eye = np.eye(a.shape[0])
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * eye)
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * eye
    return u, v


def matrix_exp(m):
    """Matrix exponential by scaling and squaring with a Pade approximant.

    The Pade degree (3, 5, 7, 9 or 13) is chosen from the 1-norm of ``m``;
    matrices with norm above the degree-13 threshold are scaled by a power of
    two first and the result squared back.

    Raises:
        DimensionError: if ``m`` is not a square 2-d array.
        DomainError: if ``m`` has non-finite entries.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"matrix_exp needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix_exp got non-finite entries")
    if a.shape[0] == 0:
        return a.copy()

    norm = np.abs(a).sum(axis=0).max()
    if norm == 0.0:
        return np.eye(a.shape[0])
    for deg, theta in _THETA:
        if norm <= theta:
            u, v = _pade_low(a, _PADE[deg])
            return np.linalg.solve(v - u, v + u)

    s = max(0, int(math.ceil(math.log2(norm / _THETA_13))))
    if s:
        a = a / 2.0**s
    u, v = _pade13(a)
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


def project_out_basis(basis, u):
    """Remove the components of ``u`` along the orthonormal columns of ``basis``.

    Returns ``(I - N N^T) u``. ``basis`` may be 1-d, in which case it is treated
    as a single unit column.
    """
    n = np.asarray(basis, dtype=float)
    u = np.asarray(u, dtype=float)
    if n.ndim == 1:
        n = n[:, None]
    if n.ndim != 2 or u.ndim != 1 or n.shape[0] != u.shape[0]:
        raise DimensionError(f"basis of shape {n.shape} incompatible with vector of shape {u.shape}")
    if n.shape[1] == 0:
        return u.copy()
    return u - n @ (n.T @ u)


_SQRT2 = math.sqrt(2.0)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_LOG_HALF = math.log(0.5)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
# below this the erfcx forms are used
_SWITCH = -1.0


def _check_finite(x):
    if not np.all(np.isfinite(x)):
        raise DomainError("probit functions need finite arguments")


def log_probit(x):
    """``log Phi(x)`` for the standard normal CDF, stable in the lower tail.

    Accepts scalars or arrays. For ``x < -1`` the identity
    ``Phi(x) = erfcx(-x/sqrt 2) exp(-x^2/2) / 2`` is used so no underflow occurs.
    """
    xa = np.asarray(x, dtype=float)
    _check_finite(xa)
    out = np.empty_like(xa)
    lo = xa < _SWITCH
    hi = ~lo
    xl = xa[lo]
    out[lo] = _LOG_HALF + np.log(erfcx(-xl / _SQRT2)) - 0.5 * xl * xl
    out[hi] = np.log(ndtr(xa[hi]))
    return out if out.ndim else float(out)


def probit_ratio(x):
    """Inverse Mills ratio ``phi(x) / Phi(x)``.

    Behaves like ``-x`` as ``x -> -inf``; evaluated through ``erfcx`` below
    ``x = -1`` and directly above.
    """
    xa = np.asarray(x, dtype=float)
    _check_finite(xa)
    out = np.empty_like(xa)
    lo = xa < _SWITCH
    hi = ~lo
    out[lo] = _SQRT_2_OVER_PI / erfcx(-xa[lo] / _SQRT2)
    xh = xa[hi]
    out[hi] = _INV_SQRT_2PI * np.exp(-0.5 * xh * xh) / ndtr(xh)
    return out if out.ndim else float(out)


def make_rng(seed=None):
    """Seedable random stream (PCG64 under a ``SeedSequence``)."""
    return np.random.default_rng(seed)


def split_rng(rng, n):
    """Derive ``n`` independent child streams from ``rng``."""
    return rng.spawn(n)
