# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels for window counting and overlap scoring.

Mirrors the contract of :mod:`retrobleu._kernels.pure`; the tree structure
arrives as flattened CSR-style offset/index lists.
"""

from cpython.mem cimport PyMem_Free, PyMem_Malloc

from retrobleu.errors import MissingTokenError


cdef Py_ssize_t* _as_array(object seq, Py_ssize_t length) except NULL:
    cdef Py_ssize_t* buf = <Py_ssize_t*> PyMem_Malloc(length * sizeof(Py_ssize_t))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    for i in range(length):
        buf[i] = seq[i]
    return buf


def count_chain_windows(object child_off, object child_idx, int n):
    """Count descending chains of ``n`` reactions via dynamic programming."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    cdef Py_ssize_t num = len(child_off) - 1
    if num < n:
        return 0

    cdef Py_ssize_t* off = _as_array(child_off, num + 1)
    cdef Py_ssize_t* idx = NULL
    cdef long long* chains = NULL
    cdef long long* nxt = NULL
    cdef long long* tmp = NULL
    cdef long long total, result = 0
    cdef Py_ssize_t node, j, step
    try:
        idx = _as_array(child_idx, len(child_idx))
        chains = <long long*> PyMem_Malloc(num * sizeof(long long))
        nxt = <long long*> PyMem_Malloc(num * sizeof(long long))
        if chains == NULL or nxt == NULL:
            raise MemoryError()
        for node in range(num):
            chains[node] = 1
        for step in range(n - 1):
            for node in range(num - 1, -1, -1):
                total = 0
                for j in range(off[node], off[node + 1]):
                    total += chains[idx[j]]
                nxt[node] = total
            tmp = chains
            chains = nxt
            nxt = tmp
        for node in range(num):
            result += chains[node]
    finally:
        PyMem_Free(off)
        PyMem_Free(idx)
        PyMem_Free(chains)
        PyMem_Free(nxt)
    return result


def count_recorded_windows(list tokens, object child_off, object child_idx,
                           int n, object entries):
    """Return ``(recorded, total)`` window counts against a key container."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    cdef Py_ssize_t num = len(child_off) - 1
    if num < n:
        return 0, 0

    cdef Py_ssize_t* off = _as_array(child_off, num + 1)
    cdef Py_ssize_t* idx = NULL
    cdef Py_ssize_t* win = NULL
    cdef Py_ssize_t* cursor = NULL
    cdef Py_ssize_t start, node, child, i
    cdef int depth
    cdef long long recorded = 0, total = 0
    cdef list parts = [None] * n
    cdef object tok, key
    cdef str tab = "\t"
    try:
        idx = _as_array(child_idx, len(child_idx))
        win = <Py_ssize_t*> PyMem_Malloc(n * sizeof(Py_ssize_t))
        cursor = <Py_ssize_t*> PyMem_Malloc(n * sizeof(Py_ssize_t))
        if win == NULL or cursor == NULL:
            raise MemoryError()
        for start in range(num):
            win[0] = start
            cursor[0] = off[start]
            depth = 0
            while depth >= 0:
                if depth == n - 1:
                    for i in range(n):
                        tok = tokens[win[i]]
                        if tok is None:
                            raise MissingTokenError(
                                f"reaction {win[i]} lacks the requested token"
                            )
                        parts[i] = tok
                    total += 1
                    key = tab.join(parts)
                    if key in entries:
                        recorded += 1
                    depth -= 1
                    continue
                node = win[depth]
                if cursor[depth] < off[node + 1]:
                    child = idx[cursor[depth]]
                    cursor[depth] += 1
                    depth += 1
                    win[depth] = child
                    cursor[depth] = off[child]
                else:
                    depth -= 1
    finally:
        PyMem_Free(off)
        PyMem_Free(idx)
        PyMem_Free(win)
        PyMem_Free(cursor)
    return recorded, total
