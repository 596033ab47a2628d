# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled SSA kernels. Mirrors ``_pykernels`` operation for operation."""

from libc.math cimport log
from libc.stdint cimport int64_t

import numpy


cdef double[:] cython_zeros(Py_ssize_t n):
    return numpy.zeros(n, dtype=numpy.float64)

cdef int HORIZON = 0
cdef int ABSORBED = 1
cdef int NEED_MORE = 2


cdef double _propensities(int64_t[:] x, int64_t[:, :] reactants, double[:] rates,
                          double[:] out) nogil:
    cdef Py_ssize_t n_reactions = reactants.shape[0]
    cdef Py_ssize_t n_species = reactants.shape[1]
    cdef Py_ssize_t j, i
    cdef int64_t r, xi, q
    cdef double a, b, total = 0.0
    for j in range(n_reactions):
        a = rates[j]
        for i in range(n_species):
            r = reactants[j, i]
            if r:
                xi = x[i]
                if xi < r:
                    a = 0.0
                    break
                b = 1.0
                for q in range(r):
                    b = b * <double>(xi - q) / <double>(q + 1)
                a = a * b
        out[j] = a
        total += a
    return total


def propensities(int64_t[:] x, int64_t[:, :] reactants, double[:] rates, double[:] out):
    return _propensities(x, reactants, rates, out)


cdef Py_ssize_t _pick(double[:] props, double target) nogil:
    cdef Py_ssize_t n = props.shape[0]
    cdef Py_ssize_t j, k = n - 1
    cdef double acc = 0.0
    for j in range(n):
        acc += props[j]
        if target < acc and props[j] > 0.0:
            k = j
            break
    while props[k] <= 0.0:
        k -= 1
    return k


def ssa_advance(int64_t[:] x, double t, double horizon, int64_t[:, :] reactants,
                int64_t[:, :] change, double[:] rates, double[:] uniforms,
                double[:] times_out, int64_t[:, :] states_out):
    cdef Py_ssize_t n_species = x.shape[0]
    cdef Py_ssize_t capacity = times_out.shape[0]
    cdef Py_ssize_t n_uniforms = uniforms.shape[0]
    cdef Py_ssize_t steps = 0, used = 0, i, k
    cdef double a0, u1, u2, t_next
    cdef double[:] props = cython_zeros(rates.shape[0])
    while True:
        a0 = _propensities(x, reactants, rates, props)
        if a0 <= 0.0:
            return t, steps, used, ABSORBED
        if used + 2 > n_uniforms or steps >= capacity:
            return t, steps, used, NEED_MORE
        u1 = uniforms[used]
        u2 = uniforms[used + 1]
        used += 2
        t_next = t - log(1.0 - u1) / a0
        if t_next > horizon:
            return t, steps, used, HORIZON
        k = _pick(props, u2 * a0)
        for i in range(n_species):
            x[i] += change[k, i]
        t = t_next
        times_out[steps] = t
        for i in range(n_species):
            states_out[steps, i] = x[i]
        steps += 1


def ssa_final(int64_t[:] x, double t, double horizon, int64_t[:, :] reactants,
              int64_t[:, :] change, double[:] rates, double[:] uniforms):
    cdef Py_ssize_t n_species = x.shape[0]
    cdef Py_ssize_t n_uniforms = uniforms.shape[0]
    cdef Py_ssize_t used = 0, i, k
    cdef double a0, u1, u2, t_next
    cdef double[:] props = cython_zeros(rates.shape[0])
    while True:
        a0 = _propensities(x, reactants, rates, props)
        if a0 <= 0.0:
            return t, used, ABSORBED
        if used + 2 > n_uniforms:
            return t, used, NEED_MORE
        u1 = uniforms[used]
        u2 = uniforms[used + 1]
        used += 2
        t_next = t - log(1.0 - u1) / a0
        if t_next > horizon:
            return t, used, HORIZON
        k = _pick(props, u2 * a0)
        for i in range(n_species):
            x[i] += change[k, i]
        t = t_next

