__module_name__ = "runtime_env"

"""
Process-level setup for numerical runs: BLAS thread counts and warning
filters. Must run before numpy is imported to affect the thread pools.
"""

import os
import warnings

THREAD_VARIABLES = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


def limit_threads(threads: int) -> None:
    """Pin BLAS/OpenMP pools to ``threads`` unless the user already set them."""
    for name in THREAD_VARIABLES:
        os.environ.setdefault(name, str(max(1, int(threads))))


def setup_environment(threads: int = 1) -> None:
    limit_threads(threads)

    from scipy.sparse import SparseEfficiencyWarning

    # lil stencil assembly in the FD baseline
    warnings.filterwarnings("ignore", category=SparseEfficiencyWarning)
    warnings.filterwarnings("ignore", category=DeprecationWarning, module="scipy")


__all__ = ["THREAD_VARIABLES", "limit_threads", "setup_environment"]
