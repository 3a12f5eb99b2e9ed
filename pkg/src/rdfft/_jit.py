"""Shared numba decorator for the in-place kernels.

``_nrt=False`` compiles without the numba runtime: a kernel that tries to
create an array fails to compile, so no kernel can acquire heap memory.
``nogil=True`` lets disjoint buffers be transformed from several threads.
"""

import numba

kernel = numba.njit(_nrt=False, nogil=True, cache=True)
