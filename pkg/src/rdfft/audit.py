"""Allocation auditing for the in-place kernels.

:class:`AllocationAudit` counts every array-memory acquisition made while it
is active, from two sources:

* numpy data buffers. A counting ``PyDataMem_Handler`` is installed for
  the duration, so even temporaries that are freed again are counted.
* the numba runtime (NRT) allocation counter, which sees any array
  created inside compiled code.

Interpreter bookkeeping (frames, boxed scalars, array *views*) is not
array memory and is not counted.
"""

from __future__ import annotations

import ctypes
import threading

_c = ctypes
_size_t = _c.c_size_t
_vp = _c.c_void_p

_MALLOC = _c.CFUNCTYPE(_vp, _vp, _size_t)
_CALLOC = _c.CFUNCTYPE(_vp, _vp, _size_t, _size_t)
_REALLOC = _c.CFUNCTYPE(_vp, _vp, _vp, _size_t)
_FREE = _c.CFUNCTYPE(None, _vp, _vp, _size_t)

# numpy C-API table slot of PyDataMem_SetHandler (stable since numpy 1.22)
_SET_HANDLER_SLOT = 304


class _Allocator(_c.Structure):
    _fields_ = [("ctx", _vp), ("malloc", _MALLOC), ("calloc", _CALLOC), ("realloc", _REALLOC), ("free", _FREE)]


class _Handler(_c.Structure):
    _fields_ = [("name", _c.c_char * 127), ("version", _c.c_uint8), ("allocator", _Allocator)]


class _Counter:
    def __init__(self):
        self.count = 0
        self.nbytes = 0


_active: list[_Counter] = []
_lock = threading.Lock()


def _record(nbytes: int) -> None:
    for counter in _active:
        counter.count += 1
        counter.nbytes += nbytes


_libc = _c.CDLL(None)
_libc.malloc.restype = _vp
_libc.malloc.argtypes = [_size_t]
_libc.calloc.restype = _vp
_libc.calloc.argtypes = [_size_t, _size_t]
_libc.realloc.restype = _vp
_libc.realloc.argtypes = [_vp, _size_t]
_libc.free.argtypes = [_vp]


def _malloc(ctx, size):
    _record(size)
    return _libc.malloc(size)


def _calloc(ctx, nelem, elsize):
    _record(nelem * elsize)
    return _libc.calloc(nelem, elsize)


def _realloc(ctx, ptr, size):
    _record(size)
    return _libc.realloc(ptr, size)


def _free(ctx, ptr, size):
    _libc.free(ptr)


# the callbacks and the struct must outlive every array allocated through them
_callbacks = (_MALLOC(_malloc), _CALLOC(_calloc), _REALLOC(_realloc), _FREE(_free))
_handler = _Handler(b"rdfft_counting_allocator", 1, _Allocator(None, *_callbacks))
_capsule = None
_set_handler = None


def _install_api():
    global _capsule, _set_handler
    if _set_handler is not None:
        return
    try:
        from numpy._core import _multiarray_umath
    except ImportError:  # numpy < 2
        from numpy.core import _multiarray_umath

    new_capsule = _c.pythonapi.PyCapsule_New
    new_capsule.restype = _c.py_object
    new_capsule.argtypes = [_vp, _c.c_char_p, _vp]
    get_pointer = _c.pythonapi.PyCapsule_GetPointer
    get_pointer.restype = _vp
    get_pointer.argtypes = [_c.py_object, _c.c_char_p]

    table = _c.cast(get_pointer(_multiarray_umath._ARRAY_API, None), _c.POINTER(_vp))
    _set_handler = _c.PYFUNCTYPE(_c.py_object, _c.py_object)(table[_SET_HANDLER_SLOT])
    _capsule = new_capsule(_c.addressof(_handler), b"mem_handler", None)


def _nrt_count():
    try:
        from numba.core.runtime import _nrt_python, rtsys

        _nrt_python.memsys_enable_stats()
        return rtsys.get_allocation_stats().alloc
    except Exception:  # pragma: no cover - numba internals moved
        return None


class AllocationAudit:
    """Context manager counting array-memory acquisitions.

    >>> with AllocationAudit() as audit:
    ...     forward_in_place(plan, buf)
    >>> audit.alloc_count, audit.scratch_bytes
    (0, 0)

    Handler installation is per-context (numpy keeps it in a contextvar),
    so allocations from other threads are not counted.
    """

    def __init__(self):
        self._counter = _Counter()
        self._previous = None
        self._nrt_start = None
        self.nrt_allocs: int | None = None

    @property
    def numpy_allocs(self) -> int:
        return self._counter.count

    @property
    def alloc_count(self) -> int:
        return self._counter.count + (self.nrt_allocs or 0)

    @property
    def scratch_bytes(self) -> int:
        # NRT does not report sizes; any NRT allocation is at least one byte
        return self._counter.nbytes + (self.nrt_allocs or 0)

    def __enter__(self) -> "AllocationAudit":
        _install_api()
        with _lock:
            _active.append(self._counter)
        self._nrt_start = _nrt_count()
        self._previous = _set_handler(_capsule)
        return self

    def __exit__(self, *exc) -> None:
        _set_handler(self._previous)
        end = _nrt_count()
        if self._nrt_start is not None and end is not None:
            self.nrt_allocs = end - self._nrt_start
        with _lock:
            _active.remove(self._counter)

    def __repr__(self) -> str:
        return (
            f"AllocationAudit(numpy_allocs={self.numpy_allocs}, "
            f"nrt_allocs={self.nrt_allocs}, scratch_bytes={self.scratch_bytes})"
        )
