"""Numeric inner loops for entropy evaluation.

Every kernel exists twice: a numba ``@njit`` version and a vectorised numpy
version.  The numba path is used when numba imports and the environment
variable ``TSALLIS_CAUSAL_NUMBA`` is not set to ``0``.  Both paths must agree
to rounding; ``tests/test_kernels.py`` checks this.
"""
import os

import numpy as np

_WANT_NUMBA = os.environ.get("TSALLIS_CAUSAL_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")

try:
    if not _WANT_NUMBA:
        raise ImportError("numba disabled by TSALLIS_CAUSAL_NUMBA")
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn
        return wrap


def _power_sums_numpy(p, qs):
    p = p[p > 0.0]
    if p.size == 0:
        return np.zeros(qs.shape[0])
    logp = np.log(p)
    return np.exp(np.outer(qs, logp)).sum(axis=1)


def _shannon_numpy(p):
    p = p[p > 0.0]
    return float(-(p * np.log(p)).sum())


def _tsallis_many_numpy(p, qs, q_tol):
    # p (1 - p^(q-1)) / (q-1) summed; expm1 keeps q near 1 accurate
    p = p[p > 0.0]
    out = np.empty(qs.shape[0])
    near = np.abs(qs - 1.0) < q_tol
    if near.any():
        out[near] = -(p * np.log(p)).sum()
    far = ~near
    if far.any():
        qm1 = qs[far] - 1.0
        terms = -np.expm1(np.outer(qm1, np.log(p))) * p
        out[far] = terms.sum(axis=1) / qm1
    return out


@njit(cache=True)
def _power_sums_jit(p, qs):
    out = np.zeros(qs.shape[0])
    for i in range(p.shape[0]):
        pi = p[i]
        if pi > 0.0:
            lp = np.log(pi)
            for k in range(qs.shape[0]):
                out[k] += np.exp(qs[k] * lp)
    return out


@njit(cache=True)
def _shannon_jit(p):
    acc = 0.0
    for i in range(p.shape[0]):
        pi = p[i]
        if pi > 0.0:
            acc -= pi * np.log(pi)
    return acc


@njit(cache=True)
def _tsallis_many_jit(p, qs, q_tol):
    out = np.zeros(qs.shape[0])
    for i in range(p.shape[0]):
        pi = p[i]
        if pi > 0.0:
            lp = np.log(pi)
            for k in range(qs.shape[0]):
                qm1 = qs[k] - 1.0
                if abs(qm1) < q_tol:
                    out[k] -= pi * lp
                else:
                    out[k] -= pi * np.expm1(qm1 * lp) / qm1
    return out


def power_sums(p, qs):
    """Return ``sum_{p_i > 0} p_i ** q`` for every ``q`` in ``qs``."""
    p = np.ascontiguousarray(p, dtype=np.float64).ravel()
    qs = np.ascontiguousarray(qs, dtype=np.float64).ravel()
    if HAVE_NUMBA:
        return _power_sums_jit(p, qs)
    return _power_sums_numpy(p, qs)


def shannon_sum(p):
    """Return ``-sum p ln p`` over the positive entries of ``p``."""
    p = np.ascontiguousarray(p, dtype=np.float64).ravel()
    if HAVE_NUMBA:
        return float(_shannon_jit(p))
    return _shannon_numpy(p)


def tsallis_many(p, qs, q_tol=1e-9):
    """Tsallis entropies of one probability vector at many orders."""
    p = np.ascontiguousarray(p, dtype=np.float64).ravel()
    qs = np.ascontiguousarray(qs, dtype=np.float64).ravel()
    if HAVE_NUMBA:
        return _tsallis_many_jit(p, qs, q_tol)
    return _tsallis_many_numpy(p, qs, q_tol)


def backend():
    return "numba" if HAVE_NUMBA else "numpy"
