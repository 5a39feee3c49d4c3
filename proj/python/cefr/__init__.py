try:
    from ._cefr import *  # noqa: F401,F403
    from ._cefr import __doc__  # noqa: F401
except ImportError:  # running against a bare CMake build dir on PYTHONPATH
    from _cefr import *  # noqa: F401,F403
    from _cefr import __doc__  # noqa: F401
