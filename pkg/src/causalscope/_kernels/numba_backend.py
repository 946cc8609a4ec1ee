"""Numba-compiled implementations of the hot kernels.

Must match numpy_backend bit for bit; see tests/test_kernels.py.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def product_of_factors(n_axes, K, tables, offsets, coeffs, consts):
    n_cells = 1
    for _ in range(n_axes):
        n_cells *= K
    n_factors = len(consts)
    out = np.ones(n_cells, dtype=np.float64)
    digits = np.zeros(n_axes, dtype=np.int64)
    for c in range(n_cells):
        if c > 0:
            # odometer increment, last axis fastest
            j = n_axes - 1
            while True:
                digits[j] += 1
                if digits[j] < K:
                    break
                digits[j] = 0
                j -= 1
        acc = 1.0
        for f in range(n_factors):
            idx = consts[f]
            for j in range(n_axes):
                idx += coeffs[f, j] * digits[j]
            acc *= tables[offsets[f] + idx]
        out[c] = acc
    return out


@njit(cache=True)
def ancestral_draw(preset, step_slot, step_offset, step_coeffs, step_const, K, tables, uniforms):
    count = uniforms.shape[0]
    n_slots = preset.shape[0]
    n_steps = step_slot.shape[0]
    assign = np.empty((count, n_slots), dtype=np.int64)
    for i in range(count):
        for k in range(n_slots):
            assign[i, k] = preset[k]
        for s in range(n_steps):
            row = step_const[s]
            for k in range(n_slots):
                row += step_coeffs[s, k] * assign[i, k]
            base = step_offset[s] + row * K
            u = uniforms[i, s]
            acc = 0.0
            val = K - 1
            for v in range(K):
                acc += tables[base + v]
                if u < acc:
                    val = v
                    break
            assign[i, step_slot[s]] = val
    return assign
