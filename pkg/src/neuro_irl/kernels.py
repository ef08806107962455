"""Kernel backend selection.

The compiled extension is preferred. Set ``NEURO_IRL_BACKEND=python`` to
force the numpy fallback (the benchmark and the equivalence tests do this
per call through :func:`get_backend`).
"""

import importlib
import logging
import os

from . import _kernels_py

logger = logging.getLogger(__name__)

__all__ = [
    "BACKEND",
    "get_backend",
    "q_values",
    "value_iteration",
    "lmdp_power_iteration",
    "log_matmul",
    "feedforward",
]


def _load_compiled():
    try:
        return importlib.import_module("neuro_irl._kernels")
    except ImportError:
        return None


_compiled = _load_compiled()


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython" or "python").

    With no name the environment/default choice is returned. Asking for
    "cython" when the extension is missing raises ``ImportError``.
    """
    if name is None:
        name = os.environ.get("NEURO_IRL_BACKEND", "cython" if _compiled else "python")
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("neuro_irl._kernels is not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


_active = get_backend()
BACKEND = "cython" if _active is _compiled and _compiled is not None else "python"
if BACKEND == "python":
    logger.debug("using numpy fallback kernels")

q_values = _active.q_values
value_iteration = _active.value_iteration
lmdp_power_iteration = _active.lmdp_power_iteration
log_matmul = _active.log_matmul
feedforward = _active.feedforward
