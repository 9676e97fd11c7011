"""Saliency-regularized unpaired image-to-image stylization (C++ core bindings)."""

import torch as _torch  # noqa: F401  (loads libtorch shared objects before the extension)

try:
    from . import _sragan as _impl  # installed package layout
except ImportError:  # build-tree layout: extension sits on PYTHONPATH top level
    import _sragan as _impl

_names = [n for n in dir(_impl) if not n.startswith("_")]
globals().update({n: getattr(_impl, n) for n in _names})

__all__ = _names
__version__ = "0.1.0"
