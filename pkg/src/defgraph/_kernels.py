"""Hot numeric kernels: full-joint construction and forward sampling.

Each kernel exists twice: a loop written for numba's ``@njit`` and a
vectorized pure-numpy fallback. The active backend is chosen at import
time from the ``DEFGRAPH_BACKEND`` environment variable:

* ``numba`` — require numba (import error if it is missing)
* ``numpy`` — force the fallback
* unset    — numba when importable, numpy otherwise

Both paths consume the same flattened graph encoding (see
``inference._encode``) and produce bit-identical outputs, so switching
backends never changes results, only speed. ``benchmarks/bench_kernels.py``
times the two side by side.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "JIT_ENABLED",
    "joint_table",
    "joint_table_numba",
    "joint_table_numpy",
    "sample_counts",
    "sample_counts_numba",
    "sample_counts_numpy",
]

_requested = os.environ.get("DEFGRAPH_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"DEFGRAPH_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested == "numpy":
    _njit = None
else:
    try:
        from numba import njit as _njit
    except ImportError:
        if _requested == "numba":
            raise
        _njit = None

JIT_ENABLED = _njit is not None
BACKEND = "numba" if JIT_ENABLED else "numpy"


def _joint_table_loop(n_nodes, parent_off, parents, cpt_off, cpts):
    size = 1 << n_nodes
    joint = np.ones(size, dtype=np.float64)
    for k in range(n_nodes):
        lo = parent_off[k]
        width = parent_off[k + 1] - lo
        base = cpt_off[k]
        for idx in range(size):
            row = 0
            for j in range(width):
                row |= ((idx >> parents[lo + j]) & 1) << j
            p_true = cpts[base + row]
            if (idx >> k) & 1:
                joint[idx] *= p_true
            else:
                joint[idx] *= 1.0 - p_true
    return joint


def joint_table_numpy(n_nodes, parent_off, parents, cpt_off, cpts):
    """P(joint assignment) for all 2**n_nodes assignments.

    Bit k of the flat index is the state of node k. Node k's conditional
    row is selected by the bit pattern of its parents, bit j of the row
    index being the state of its j-th listed parent.

    Each node contributes one broadcast multiply of its conditional table
    into the joint tensor; every element sees the same operands in the
    same order as the loop backend, so results are bit-identical.
    """
    shape = (2,) * n_nodes
    joint = np.ones(shape, dtype=np.float64)
    for k in range(n_nodes):
        lo, hi = parent_off[k], parent_off[k + 1]
        width = hi - lo
        involved = [int(parents[lo + i]) for i in range(width)] + [k]
        p_true = cpts[cpt_off[k]:cpt_off[k] + (1 << width)].reshape((2,) * width)
        if width:
            # row bit i is parent i; reshape puts bit width-1 on axis 0
            p_true = p_true.transpose(tuple(reversed(range(width))))
        vals = np.stack([1.0 - p_true, p_true], axis=-1)
        # joint axis for node m is n_nodes-1-m (bit k of the flat C-order
        # index must be node k); order factor axes accordingly
        vals = vals.transpose(sorted(range(width + 1), key=lambda a: -involved[a]))
        target = [1] * n_nodes
        for m in involved:
            target[n_nodes - 1 - m] = 2
        np.multiply(joint, vals.reshape(target), out=joint)
    return joint.reshape(-1)


def _sample_counts_loop(parent_off, parents, cpt_off, cpts, u):
    n_samples, n_nodes = u.shape
    states = np.zeros((n_samples, n_nodes), dtype=np.uint8)
    counts = np.zeros(n_nodes, dtype=np.int64)
    for i in range(n_samples):
        for k in range(n_nodes):
            lo = parent_off[k]
            row = 0
            for j in range(parent_off[k + 1] - lo):
                row |= states[i, parents[lo + j]] << j
            if u[i, k] < cpts[cpt_off[k] + row]:
                states[i, k] = 1
                counts[k] += 1
    return counts


def sample_counts_numpy(parent_off, parents, cpt_off, cpts, u):
    """Count of true draws per node over ``u.shape[0]`` forward samples.

    Nodes must be encoded in topological order. ``u`` holds pre-drawn
    uniforms, one column per node; node k's sample at row i is true iff
    ``u[i, k]`` falls below its conditional true-probability.
    """
    n_samples, n_nodes = u.shape
    states = np.zeros((n_samples, n_nodes), dtype=np.uint8)
    for k in range(n_nodes):
        lo, hi = parent_off[k], parent_off[k + 1]
        row = np.zeros(n_samples, dtype=np.int64)
        for j in range(hi - lo):
            row |= states[:, parents[lo + j]].astype(np.int64) << j
        states[:, k] = u[:, k] < cpts[cpt_off[k] + row]
    return states.sum(axis=0, dtype=np.int64)


if JIT_ENABLED:
    joint_table_numba = _njit(cache=True)(_joint_table_loop)
    sample_counts_numba = _njit(cache=True)(_sample_counts_loop)
    joint_table = joint_table_numba
    sample_counts = sample_counts_numba
else:
    joint_table_numba = None
    sample_counts_numba = None
    joint_table = joint_table_numpy
    sample_counts = sample_counts_numpy
