"""Select the compiled core when it was built, else the numpy fallback."""

from . import _fallback

try:
    from . import _core as _impl
    COMPILED = True
except ImportError:
    _impl = _fallback
    COMPILED = False

rk4_affine = _impl.rk4_affine
perron_power = _impl.perron_power

__all__ = ["COMPILED", "rk4_affine", "perron_power"]
