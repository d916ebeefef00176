try:
    from ._sigkern import *  # noqa: F401,F403
    from ._sigkern import Array, EngineError  # noqa: F401
except ImportError:  # development tree: module built next to the package
    from _sigkern import *  # noqa: F401,F403
    from _sigkern import Array, EngineError  # noqa: F401
