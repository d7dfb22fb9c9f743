__module_name__ = "utils"

"""
Utility modules for kronsolve.

This package contains logging setup and process environment helpers.
"""

from .logging_method import setup_logger
from .runtime_env import limit_threads, setup_environment

__all__ = ["setup_logger", "limit_threads", "setup_environment"]
