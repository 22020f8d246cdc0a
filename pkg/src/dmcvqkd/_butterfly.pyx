# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled pair-rotation kernel.

Semantics (and floating-point operation order) must match
``_butterfly_py.rotate_pairs`` exactly; the build disables FP contraction
so both give bit-identical results.
"""


def rotate_pairs(double[::1] v, long long[::1] lo, long long[::1] hi,
                 double[::1] c, double[::1] s):
    """Apply disjoint 2x2 rotations in place; see _butterfly_py."""
    cdef Py_ssize_t i, n = lo.shape[0]
    cdef double a, b
    for i in range(n):
        a = v[lo[i]]
        b = v[hi[i]]
        v[lo[i]] = c[i] * a + s[i] * b
        v[hi[i]] = (-s[i]) * a + c[i] * b
