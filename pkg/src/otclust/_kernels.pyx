# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of otclust._kernels_py.

Fuses score evaluation, argmax and mass binning into one pass so the
n-by-k score matrix is never materialized.  Site coordinates are staged
in contiguous per-axis buffers, giving the inner loop unit-stride
streams; the running-max comparison uses strict ``>`` so the first
maximum wins ties.  Mass and energy accumulators use Kahan compensation
to keep bin sums exact to the ulp.
"""

import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc

cnp.import_array()

BACKEND = "compiled"


def assign_and_masses(const double[:, ::1] points, const double[::1] weights,
                      const double[:, ::1] positions, const double[::1] offsets):
    """See otclust._kernels_py.assign_and_masses."""
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t k = positions.shape[0]

    assignment_arr = np.empty(n, dtype=np.int64)
    masses_arr = np.zeros(k, dtype=np.float64)
    comp_arr = np.zeros(k, dtype=np.float64)
    cdef long long[::1] assignment = assignment_arr
    cdef double[::1] masses = masses_arr
    cdef double[::1] comp = comp_arr

    # Contiguous per-axis coordinate streams, plus a score scratch row
    # used only by the generic-dimension path.
    cdef double* buf = <double*> malloc((k + d * k) * sizeof(double))
    if buf == NULL:
        raise MemoryError("could not allocate the coordinate buffer")
    cdef double* scratch = buf
    cdef double* coord = buf + k

    cdef double best, s, w, y, t, x0, x1, x2
    cdef double total = 0.0, total_comp = 0.0
    cdef Py_ssize_t i, j, c, bj

    try:
        for c in range(d):
            for j in range(k):
                coord[c * k + j] = positions[j, c]

        for i in range(n):
            bj = 0
            if d == 2:
                x0 = points[i, 0]
                x1 = points[i, 1]
                best = offsets[0] + x0 * coord[0] + x1 * coord[k]
                for j in range(1, k):
                    s = offsets[j] + x0 * coord[j] + x1 * coord[k + j]
                    if s > best:  # strict: first max wins ties
                        best = s
                        bj = j
            elif d == 3:
                x0 = points[i, 0]
                x1 = points[i, 1]
                x2 = points[i, 2]
                best = offsets[0] + x0 * coord[0] + x1 * coord[k] + x2 * coord[2 * k]
                for j in range(1, k):
                    s = (offsets[j] + x0 * coord[j]
                         + x1 * coord[k + j] + x2 * coord[2 * k + j])
                    if s > best:
                        best = s
                        bj = j
            else:
                for j in range(k):
                    scratch[j] = offsets[j]
                for c in range(d):
                    x0 = points[i, c]
                    for j in range(k):
                        scratch[j] += x0 * coord[c * k + j]
                best = scratch[0]
                for j in range(1, k):
                    if scratch[j] > best:
                        best = scratch[j]
                        bj = j

            assignment[i] = bj
            w = weights[i]
            y = w - comp[bj]
            t = masses[bj] + y
            comp[bj] = (t - masses[bj]) - y
            masses[bj] = t
            y = w * best - total_comp
            t = total + y
            total_comp = (t - total) - y
            total = t
    finally:
        free(buf)

    return assignment_arr, masses_arr, total
