"""Select the compiled core when it is importable, else the pure-Python twin.

Set ``GSAT_BACKEND=python`` to force the fallback (``compiled`` makes a
missing extension an ImportError instead of a silent fallback).
"""
import os

_choice = os.environ.get("GSAT_BACKEND", "auto").lower()

if _choice == "python":
    from . import _core_py as core
elif _choice == "compiled":
    from . import _core as core
else:
    try:
        from . import _core as core
    except ImportError:
        from . import _core_py as core

BACKEND = core.BACKEND


def available_backends():
    """Names of every backend module that imports in this environment."""
    names = ["python"]
    try:
        from . import _core  # noqa: F401
    except ImportError:
        pass
    else:
        names.append("compiled")
    return names


def load(name):
    if name == "python":
        from . import _core_py
        return _core_py
    from . import _core
    return _core
