"""Hot loops for the stage-1 multiplier bootstrap sweep.

Design notes
------------
- The sweep maximizes |sum_{j<=k} E_j(w) G_{j,l}| over k for every
  (frequency, replicate) pair. The j-accumulation is a loop-carried
  dependency, so the kernel keeps j sequential and vectorizes over the
  replicate axis instead (contiguous inner loop over l).
- Parallelism is across frequencies only; each output row is written by
  exactly one thread and the max-reduction is exact, so results do not
  depend on the thread count.
- Numba is optional; the pure-NumPy fallback computes the same values
  (slower, materializes one (n-m, K) temporary per frequency).
"""

from __future__ import annotations

import numpy as np

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap

    prange = range


def set_worker_threads(workers: int) -> int:
    """Clamp and apply the numba thread count; returns the value used."""
    if not HAVE_NUMBA:
        return 1
    limit = numba.config.NUMBA_NUM_THREADS
    used = max(1, min(int(workers), limit))
    numba.set_num_threads(used)
    return used


def _kernel_body(er, ei, g, norm, out):
    c, nb = er.shape
    k = g.shape[1]
    for w in prange(c):
        acc_r = np.zeros(k)
        acc_i = np.zeros(k)
        best = np.zeros(k)
        for j in range(nb):
            a = er[w, j]
            b = ei[w, j]
            for l in range(k):
                acc_r[l] += a * g[j, l]
                acc_i[l] += b * g[j, l]
                v = acc_r[l] * acc_r[l] + acc_i[l] * acc_i[l]
                best[l] = max(best[l], v)
        for l in range(k):
            out[w, l] = np.sqrt(best[l]) * norm


if HAVE_NUMBA:
    _kernel_parallel = njit(cache=True, parallel=True, fastmath=True)(_kernel_body)
    _kernel_serial = njit(cache=True, parallel=False, fastmath=True)(_kernel_body)


def _kernel_numpy(er, ei, g, norm, out):
    for w in range(er.shape[0]):
        cum = np.cumsum((er[w][:, None] + 1j * ei[w][:, None]) * g, axis=0)
        out[w] = np.max(np.abs(cum), axis=0) * norm


def cum_modulus_max(e: np.ndarray, g: np.ndarray, norm: float,
                    parallel: bool = False) -> np.ndarray:
    """max_k |sum_{j<=k} E[w,j] g[j,l]| * norm for every (w, l).

    e : complex (n_freqs, n_blocks), g : float (n_blocks, K).
    """
    er = np.ascontiguousarray(e.real)
    ei = np.ascontiguousarray(e.imag)
    g = np.ascontiguousarray(g, dtype=np.float64)
    out = np.empty((er.shape[0], g.shape[1]))
    if HAVE_NUMBA:
        kern = _kernel_parallel if parallel else _kernel_serial
        kern(er, ei, g, float(norm), out)
    else:
        _kernel_numpy(er, ei, g, float(norm), out)
    return out
