"""Hot kernels with a compiled implementation and a pure-Python fallback.

The compiled extension is used when it imports; set ``COLLABANON_PURE=1`` to
force the fallback.
"""

import os

from ._mindfs_py import StateBudgetExceeded
from ._mindfs_py import min_dfs_code as min_dfs_code_py

min_dfs_code_ext = None
if os.environ.get("COLLABANON_PURE", "") not in ("1", "true", "yes"):
    try:
        from ._mindfs import min_dfs_code as min_dfs_code_ext
    except ImportError:  # extension not built
        min_dfs_code_ext = None

min_dfs_code = min_dfs_code_ext or min_dfs_code_py
BACKEND = "cython" if min_dfs_code_ext is not None else "python"

__all__ = ["BACKEND", "StateBudgetExceeded", "min_dfs_code", "min_dfs_code_py", "min_dfs_code_ext"]
