# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled term kernels; same contracts as ``_pykernels``.

Only usable when a table's packed monomial fits in 63 bits; the dispatcher
in ``kernels`` routes wider tables to the pure-Python path.
"""
from libc.stdlib cimport malloc, free

ctypedef unsigned long long u64

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef inline int _swaps(u64 ma, u64 mb) nogil:
    cdef int s = 0
    cdef int j
    while mb:
        j = __builtin_ctzll(mb)
        s += __builtin_popcountll(ma >> (j + 1))
        mb &= mb - 1
    return s


def mul_terms(dict a, dict b, u64 odd_mask, u64 guard, double prune):
    cdef Py_ssize_t nb = len(b)
    cdef Py_ssize_t j = 0
    cdef u64 ka, kb, ma, k
    cdef double complex ca, v
    cdef u64* bkeys
    cdef double complex* bvals
    cdef dict out = {}
    if nb == 0 or len(a) == 0:
        return out
    bkeys = <u64*> malloc(nb * sizeof(u64))
    bvals = <double complex*> malloc(nb * sizeof(double complex))
    if bkeys == NULL or bvals == NULL:
        free(bkeys)
        free(bvals)
        raise MemoryError()
    try:
        for key, val in b.items():
            bkeys[j] = key
            bvals[j] = val
            j += 1
        for key, val in a.items():
            ka = key
            ca = val
            ma = ka & odd_mask
            for j in range(nb):
                kb = bkeys[j]
                if ma & kb & odd_mask:
                    continue
                k = ka + kb
                if k & guard:
                    raise OverflowError("even exponent exceeds packed field width")
                v = ca * bvals[j]
                if _swaps(ma, kb & odd_mask) & 1:
                    v = -v
                pk = k
                prev = out.get(pk)
                if prev is None:
                    out[pk] = v
                else:
                    out[pk] = prev + v
    finally:
        free(bkeys)
        free(bvals)
    return {kk: vv for kk, vv in out.items() if abs(vv) >= prune}


def add_terms(dict a, dict b, double complex scale, double prune):
    cdef dict out = dict(a)
    for k, v in b.items():
        prev = out.get(k)
        if prev is None:
            out[k] = scale * v
        else:
            out[k] = prev + scale * v
    return {kk: vv for kk, vv in out.items() if abs(vv) >= prune}


def deriv_even(dict terms, int shift, int width):
    cdef u64 field = (<u64> 1 << width) - 1
    cdef u64 unit = <u64> 1 << shift
    cdef u64 k, e
    cdef dict out = {}
    for key, c in terms.items():
        k = key
        e = (k >> shift) & field
        if e:
            out[k - unit] = c * <double> e
    return out


def deriv_odd(dict terms, int bit, bint left, u64 odd_mask):
    cdef u64 unit = <u64> 1 << bit
    cdef u64 k, m
    cdef int n
    cdef dict out = {}
    for key, c in terms.items():
        k = key
        if not (k & unit):
            continue
        m = k & odd_mask
        if left:
            n = __builtin_popcountll(m & (unit - 1))
        else:
            n = __builtin_popcountll(m >> (bit + 1))
        out[k - unit] = -c if n & 1 else c
    return out
