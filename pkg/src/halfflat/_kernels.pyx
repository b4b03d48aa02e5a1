# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled polynomial kernels; same contract as ``_kernels_py``."""

from cpython.dict cimport PyDict_GetItem, PyDict_SetItem, PyDict_DelItem
from cpython.object cimport PyObject

from halfflat._kernels_py import _fields


cpdef dict padd(dict a, dict b):
    cdef dict r
    cdef PyObject* p
    if len(a) < len(b):
        a, b = b, a
    r = dict(a)
    for m, c in b.items():
        p = PyDict_GetItem(r, m)
        if p is NULL:
            PyDict_SetItem(r, m, c)
        else:
            v = <object>p + c
            if v:
                PyDict_SetItem(r, m, v)
            else:
                PyDict_DelItem(r, m)
    return r


cpdef dict psub(dict a, dict b):
    cdef dict r = dict(a)
    cdef PyObject* p
    for m, c in b.items():
        p = PyDict_GetItem(r, m)
        if p is NULL:
            PyDict_SetItem(r, m, -c)
        else:
            v = <object>p - c
            if v:
                PyDict_SetItem(r, m, v)
            else:
                PyDict_DelItem(r, m)
    return r


cpdef dict pscale(dict a, c):
    if not c:
        return {}
    cdef dict r = {}
    for m, v in a.items():
        PyDict_SetItem(r, m, v * c)
    return r


cpdef dict pmulterm(dict a, mono, c):
    cdef dict r = {}
    for m, v in a.items():
        PyDict_SetItem(r, m + mono, v * c)
    return r


cpdef dict pmul(dict a, dict b):
    cdef dict r = {}
    cdef list bitems
    cdef Py_ssize_t j, nb
    cdef PyObject* p
    if len(a) > len(b):
        a, b = b, a
    if not a:
        return r
    bitems = list(b.items())
    nb = len(bitems)
    for ma, ca in a.items():
        for j in range(nb):
            mb, cb = <tuple>bitems[j]
            m = ma + mb
            t = ca * cb
            p = PyDict_GetItem(r, m)
            if p is NULL:
                PyDict_SetItem(r, m, t)
            else:
                v = <object>p + t
                if v:
                    PyDict_SetItem(r, m, v)
                else:
                    PyDict_DelItem(r, m)
    return r


cpdef dict pdiff(dict a, shift):
    cdef dict r = {}
    unit = 1 << shift
    for m, c in a.items():
        e = (m >> shift) & 0xFFFF
        if e:
            PyDict_SetItem(r, m - unit, c * e)
    return r


cpdef peval(dict a, vals):
    total = 0
    for m, c in a.items():
        t = c
        for i, e in _fields(m):
            v = vals[i]
            if v is None:
                raise KeyError(i)
            t = t * (v if e == 1 else v ** e)
        total = total + t
    return total
