"""BLAS thread control.

On small/virtualized hosts the thread-sync cost of multi-threaded BLAS
dwarfs the GEMM work for this package's small matrices (measured 2-30x
slowdowns), so every heavy entry point pins BLAS to one thread. This also
keeps reductions in a fixed order, matching the single-threaded
determinism contract.
"""

from contextlib import contextmanager

try:
    from threadpoolctl import threadpool_limits

    @contextmanager
    def single_thread_blas():
        with threadpool_limits(limits=1):
            yield

except ImportError:  # threadpoolctl is optional; without it, rely on env vars

    @contextmanager
    def single_thread_blas():
        yield
