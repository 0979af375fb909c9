# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled integer kernels: inversion parity and box enumeration of an
integral quadratic form.  Behaviour matches ``_fallback`` exactly."""

from libc.stdlib cimport malloc, free


def inversion_parity(seq):
    cdef Py_ssize_t n = len(seq)
    cdef Py_ssize_t i, j
    cdef long count = 0
    cdef long *buf = <long *> malloc(n * sizeof(long) + 1)
    if buf == NULL:
        raise MemoryError()
    try:
        for i in range(n):
            buf[i] = seq[i]
        for i in range(n):
            for j in range(i + 1, n):
                if buf[j] < buf[i]:
                    count += 1
    finally:
        free(buf)
    return count & 1


cdef class _Box:
    """Odometer over an integer box with an incrementally updated ``A y``."""
    cdef Py_ssize_t n
    cdef long long *A
    cdef long long *y
    cdef long long *lo
    cdef long long *hi
    cdef long long *Ay

    def __cinit__(self, A, bounds):
        cdef Py_ssize_t i, j
        self.n = len(bounds)
        n = self.n
        self.A = <long long *> malloc((n * n + 1) * sizeof(long long))
        self.y = <long long *> malloc((n + 1) * sizeof(long long))
        self.lo = <long long *> malloc((n + 1) * sizeof(long long))
        self.hi = <long long *> malloc((n + 1) * sizeof(long long))
        self.Ay = <long long *> malloc((n + 1) * sizeof(long long))
        if not (self.A and self.y and self.lo and self.hi and self.Ay):
            raise MemoryError()
        for i in range(n):
            for j in range(n):
                self.A[i * n + j] = A[i][j]
            self.hi[i] = bounds[i]
            self.lo[i] = -bounds[i]
            self.y[i] = self.lo[i]
        for i in range(n):
            self.Ay[i] = 0
            for j in range(n):
                self.Ay[i] += self.A[i * n + j] * self.y[j]

    def __dealloc__(self):
        free(self.A)
        free(self.y)
        free(self.lo)
        free(self.hi)
        free(self.Ay)

    cdef inline long long value(self):
        cdef long long s = 0
        cdef Py_ssize_t i
        for i in range(self.n):
            s += self.y[i] * self.Ay[i]
        return s

    cdef inline bint advance(self):
        """Step to the next box point (last coordinate fastest); False at the end."""
        cdef Py_ssize_t i, k
        cdef long long delta
        i = self.n - 1
        while i >= 0:
            if self.y[i] < self.hi[i]:
                self.y[i] += 1
                for k in range(self.n):
                    self.Ay[k] += self.A[k * self.n + i]
                return True
            delta = self.lo[i] - self.y[i]
            self.y[i] = self.lo[i]
            for k in range(self.n):
                self.Ay[k] += self.A[k * self.n + i] * delta
            i -= 1
        return False

    cdef tuple point(self):
        return tuple([self.y[i] for i in range(self.n)])


def box_norm_counts(A, bounds, long long max_norm):
    cdef _Box box = _Box(A, bounds)
    cdef long long v
    cdef list counts = [0] * (max_norm + 1)
    cdef long long *c = <long long *> malloc((max_norm + 1) * sizeof(long long))
    cdef Py_ssize_t k
    if c == NULL:
        raise MemoryError()
    try:
        for k in range(max_norm + 1):
            c[k] = 0
        if box.n == 0:
            if max_norm >= 0:
                c[0] = 1
        else:
            while True:
                v = box.value()
                if 0 <= v <= max_norm:
                    c[v] += 1
                if not box.advance():
                    break
        for k in range(max_norm + 1):
            counts[k] = c[k]
    finally:
        free(c)
    return counts


def box_enumerate(A, bounds, long long target):
    cdef _Box box = _Box(A, bounds)
    cdef list out = []
    if box.n == 0:
        return [()] if target == 0 else []
    while True:
        if box.value() == target:
            out.append(box.point())
        if not box.advance():
            break
    return out
