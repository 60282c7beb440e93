"""Compiled activation kernels.

All arithmetic mirrors :func:`asnn.network.sigmoid32` and the float32
accumulation of the pure-Python paths exactly; no fastmath, so LLVM keeps
the per-node summation order and does not contract into FMA.
"""

import math

import numpy as np
from numba import njit, prange

_SLOPE = 4.97
_ONE_BELOW = np.float32(np.nextafter(np.float32(1.0), np.float32(0.0)))
_TINY = np.float32(np.nextafter(np.float32(0.0), np.float32(1.0)))


@njit(inline="always")
def sig32(x):
    z = _SLOPE * np.float64(x)
    if z >= 0.0:
        v = 1.0 / (1.0 + math.exp(-z))
    else:
        e = math.exp(z)
        v = e / (1.0 + e)
    r = np.float32(v)
    if r > _ONE_BELOW:
        r = _ONE_BELOW
    elif r < _TINY:
        r = _TINY
    return r


@njit(inline="always")
def activate(p, nsens, ids, in_ptr, in_nodes, in_weights, inputs, op):
    nid = ids[p]
    if p < nsens:
        op[nid] = sig32(inputs[nid])
    else:
        s = np.float32(0.0)
        for k in range(in_ptr[p], in_ptr[p + 1]):
            s += in_weights[k] * op[in_nodes[k]]
        op[nid] = sig32(s)
    return nid


@njit(cache=True)
def eval_sequential_kernel(nsens, ids, in_ptr, in_nodes, in_weights, inputs, op):
    for p in range(ids.size):
        activate(p, nsens, ids, in_ptr, in_nodes, in_weights, inputs, op)


@njit(parallel=True, cache=True)
def eval_layers_kernel(nnl, ids, in_ptr, in_nodes, in_weights, inputs, op, nworkers):
    nsens = nnl[0]
    sid = 0
    for cl in range(nnl.size):
        width = nnl[cl]
        chunk = (width + nworkers - 1) // nworkers
        # the join at the end of each prange is the inter-layer barrier
        for w in prange(nworkers):
            lo = sid + w * chunk
            hi = min(lo + chunk, sid + width)
            for p in range(lo, hi):
                activate(p, nsens, ids, in_ptr, in_nodes, in_weights, inputs, op)
        sid += width


@njit(parallel=True, cache=True)
def eval_layers_debug_kernel(
    nnl, ids, in_ptr, in_nodes, in_weights, inputs, op, nworkers, spin, writes, sink
):
    nsens = nnl[0]
    sid = 0
    for cl in range(nnl.size):
        width = nnl[cl]
        chunk = (width + nworkers - 1) // nworkers
        for w in prange(nworkers):
            lo = sid + w * chunk
            hi = min(lo + chunk, sid + width)
            for p in range(lo, hi):
                nid = ids[p]
                acc = 0.0
                for _ in range(spin[nid]):
                    acc = acc * 0.5 + 1.0
                sink[nid] = acc
                activate(p, nsens, ids, in_ptr, in_nodes, in_weights, inputs, op)
                writes[nid] += 1
        sid += width
