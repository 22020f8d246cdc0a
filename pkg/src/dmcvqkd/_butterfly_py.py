"""Pure-numpy fallback for the pair-rotation kernel.

Must stay bit-identical to the compiled version in ``_butterfly.pyx``: the
pairs within one layer are disjoint, so the gather/scatter below performs
the same floating-point operations in the same order as the C loop.
"""
import numpy as np


def rotate_pairs(v, lo, hi, c, s):
    """Apply disjoint 2x2 rotations in place.

    For each i: (v[lo[i]], v[hi[i]]) <- (c*a + s*b, -s*a + c*b) with
    a = v[lo[i]], b = v[hi[i]].
    """
    a = v[lo]
    b = v[hi]
    v[lo] = c * a + s * b
    v[hi] = (-s) * a + c * b
