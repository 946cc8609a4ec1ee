"""Pure-numpy implementations of the hot kernels.

Reference semantics for the numba backend: both backends must produce
bit-identical outputs for identical inputs.
"""

from __future__ import annotations

import numpy as np


def product_of_factors(n_axes, K, tables, offsets, coeffs, consts):
    """Evaluate a product of table lookups over a mixed-radix grid.

    The grid has ``K ** n_axes`` cells; cell ``c`` has digits
    ``digit_j = (c // K**(n_axes-1-j)) % K`` (first axis most significant).
    Factor ``f`` contributes ``tables[offsets[f] + consts[f] + coeffs[f] @ digits]``.
    Returns the per-cell product as a flat float64 vector.
    """
    n_cells = K**n_axes
    cells = np.arange(n_cells, dtype=np.int64)
    digits = np.empty((n_axes, n_cells), dtype=np.int64)
    stride = n_cells
    for j in range(n_axes):
        stride //= K
        digits[j] = (cells // stride) % K
    out = np.ones(n_cells, dtype=np.float64)
    for f in range(len(consts)):
        idx = consts[f] + coeffs[f] @ digits
        out *= tables[offsets[f] + idx]
    return out


def ancestral_draw(preset, step_slot, step_offset, step_coeffs, step_const, K, tables, uniforms):
    """Draw assignments sequentially from tabulated conditionals.

    ``preset`` seeds every sample's slot vector (clamped values); step ``s``
    then fills ``step_slot[s]`` by inverse-CDF over the length-``K`` row at
    ``tables[step_offset[s] + row*K :]`` with
    ``row = step_const[s] + step_coeffs[s] @ assignment``.
    ``uniforms`` has shape (count, n_steps). Returns (count, n_slots) int64.
    """
    count = uniforms.shape[0]
    assign = np.tile(preset, (count, 1))
    for s in range(len(step_slot)):
        row = step_const[s] + assign @ step_coeffs[s]
        probs = tables[step_offset[s] + row[:, None] * K + np.arange(K)]
        cum = np.cumsum(probs, axis=1)
        vals = (uniforms[:, s, None] >= cum).sum(axis=1)
        assign[:, step_slot[s]] = np.minimum(vals, K - 1)
    return assign
