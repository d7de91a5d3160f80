"""Complete elliptic integral K(k) and Jacobi sn, cn, dn.

The second argument is always the modulus k (not the parameter m = k**2).
Both routines are built on the arithmetic-geometric mean of 1 and
k' = sqrt(1 - k**2); the Jacobi functions use the descending Landen
recursion for the amplitude (DLMF 22.20(ii)).
"""

import math
from typing import NamedTuple

import numpy as np

from .errors import DomainError

__all__ = ["JacobiTriple", "agm_sequence", "complete_elliptic_k", "jacobi_sn_cn_dn"]

_MAX_AGM_ITER = 64


class JacobiTriple(NamedTuple):
    sn: np.ndarray
    cn: np.ndarray
    dn: np.ndarray


def _check_modulus(k):
    k = float(k)
    if not (0.0 <= k < 1.0):
        raise DomainError(f"elliptic modulus must satisfy 0 <= k < 1, got {k}")
    return k


def agm_sequence(k):
    """AGM sequences (a_n, c_n) started from a0 = 1, b0 = k', c0 = k.

    Iteration stops once c_n is below one ulp of a_n.
    """
    k = _check_modulus(k)
    a, b, c = 1.0, math.sqrt((1.0 - k) * (1.0 + k)), k
    a_seq, c_seq = [a], [c]
    for _ in range(_MAX_AGM_ITER):
        if c <= 0.5 * math.ulp(a):
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        a_seq.append(a)
        c_seq.append(c)
    return a_seq, c_seq


def complete_elliptic_k(k):
    """K(k) = integral_0^{pi/2} dtheta / sqrt(1 - k^2 sin^2 theta)."""
    a_seq, _ = agm_sequence(k)
    return math.pi / (2.0 * a_seq[-1])


def jacobi_sn_cn_dn(x, k):
    """Jacobi elliptic functions at ``x`` (scalar or array) for modulus ``k``.

    The argument is first reduced modulo the real period 4K(k), then the
    amplitude is recovered by the backward Landen recurrence.
    """
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DomainError("Jacobi functions need finite arguments")
    a_seq, c_seq = agm_sequence(k)
    k = float(k)
    n = len(a_seq) - 1
    period = 2.0 * math.pi / a_seq[-1]  # 4K
    xr = x - period * np.round(x / period)
    phi = (2.0**n) * a_seq[-1] * xr
    for i in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c_seq[i] / a_seq[i] * np.sin(phi)))
    sn = np.sin(phi)
    cn = np.cos(phi)
    # dn > 0 for real x when k < 1
    dn = np.sqrt((1.0 - k * sn) * (1.0 + k * sn))
    if x.ndim == 0:
        return JacobiTriple(float(sn), float(cn), float(dn))
    return JacobiTriple(sn, cn, dn)
