"""Backend selection for the counting kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy implementation in ``_pykernels`` is used.  Setting
``EXTRACTORLAB_PURE=1`` forces the fallback.  ``BACKEND`` names the choice.
"""

import os

from . import _pykernels

if os.environ.get("EXTRACTORLAB_PURE"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "compiled" if _impl is not _pykernels else "python"

ip_table = _impl.ip_table
joint_counts = _impl.joint_counts
collision_counts = _impl.collision_counts
gf2m_mul_table = _impl.gf2m_mul_table
pair_slice_l1 = _impl.pair_slice_l1


def backends():
    """Every importable backend module, keyed by name (used by tests and benchmarks)."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["compiled"] = _ckernels
    return out
