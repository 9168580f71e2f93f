"""Collapsed Gibbs sweep kernel (numba-compiled, pure-Python fallback)."""

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None


def gibbs_sweep(words, docs, z, ndk, nkw, nk, alpha, beta, vbeta, uniforms, p):
    """One full pass over all tokens in corpus order.

    ``uniforms`` holds one U[0,1) draw per token; ``p`` is length-K scratch.
    Counts are updated in place.
    """
    n_topics = nk.shape[0]
    for i in range(words.shape[0]):
        w = words[i]
        d = docs[i]
        k = z[i]
        ndk[d, k] -= 1
        nkw[k, w] -= 1
        nk[k] -= 1
        total = 0.0
        for t in range(n_topics):
            total += (ndk[d, t] + alpha) * (nkw[t, w] + beta) / (nk[t] + vbeta)
            p[t] = total
        u = uniforms[i] * total
        k = 0
        while k < n_topics - 1 and p[k] <= u:
            k += 1
        z[i] = k
        ndk[d, k] += 1
        nkw[k, w] += 1
        nk[k] += 1


if njit is not None:
    gibbs_sweep_fast = njit(cache=True, nogil=True)(gibbs_sweep)
else:  # pragma: no cover
    gibbs_sweep_fast = gibbs_sweep


def init_counts(words, docs, z, n_docs, n_topics, n_words):
    ndk = np.zeros((n_docs, n_topics), dtype=np.int64)
    nkw = np.zeros((n_topics, n_words), dtype=np.int64)
    np.add.at(ndk, (docs, z), 1)
    np.add.at(nkw, (z, words), 1)
    nk = nkw.sum(axis=1)
    return ndk, nkw, nk
