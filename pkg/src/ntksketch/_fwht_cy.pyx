# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled in-place Walsh-Hadamard butterflies, the hot kernel behind
every Hadamard-based sketch application."""


def fwht_rows_f64(double[:, ::1] a):
    """Unnormalized Walsh-Hadamard transform of each row, in place.

    Row length must be a power of two (checked by the caller).
    """
    cdef Py_ssize_t rows = a.shape[0]
    cdef Py_ssize_t n = a.shape[1]
    cdef Py_ssize_t r, h, i, j, step
    cdef double u, v
    if n <= 1:
        return
    with nogil:
        for r in range(rows):
            h = 1
            while h < n:
                step = h << 1
                i = 0
                while i < n:
                    for j in range(i, i + h):
                        u = a[r, j]
                        v = a[r, j + h]
                        a[r, j] = u + v
                        a[r, j + h] = u - v
                    i += step
                h = step
