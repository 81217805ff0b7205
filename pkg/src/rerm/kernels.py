"""Cone-product projection used in the solver's inner loop.

Two interchangeable backends: the compiled Cython kernel (rerm._hot) and
a pure-numpy fallback.  The compiled one is picked at import when it is
available and the RERM_PURE_PYTHON environment variable is unset.  Both
implement the same algorithm; benchmarks/bench_kernels.py compares them.
"""

import os

import numpy as np

from .cones import ConeKind, cone_layout, proj_exp, proj_soc

if os.environ.get("RERM_PURE_PYTHON"):
    _hot = None
else:
    try:
        from . import _hot
    except ImportError:
        _hot = None

HAVE_COMPILED = _hot is not None


class ConeProjector:
    """Projection onto a fixed product of cones, layout analyzed once.

    The instance is immutable after construction and safe to call from
    multiple threads.
    """

    def __init__(self, cones, compiled=None):
        self.cones = list(cones)
        self.dim = int(sum(c.dim for c in self.cones))
        self.kinds, self.starts, self.dims = cone_layout(self.cones)
        self.compiled = HAVE_COMPILED if compiled is None else compiled
        if self.compiled and not HAVE_COMPILED:
            raise RuntimeError("compiled kernels requested but not built")
        if not self.compiled:
            self._build_masks()

    def _build_masks(self):
        zero_idx, nonneg_idx = [], []
        self._soc = []
        self._exp = []
        self._exp_dual = []
        for kind, start, d in zip(self.kinds, self.starts, self.dims):
            sl = slice(int(start), int(start + d))
            if kind == ConeKind.ZERO:
                zero_idx.append(np.arange(sl.start, sl.stop))
            elif kind == ConeKind.NONNEG:
                nonneg_idx.append(np.arange(sl.start, sl.stop))
            elif kind == ConeKind.SOC:
                self._soc.append(sl)
            elif kind == ConeKind.EXP:
                self._exp.append(sl.start)
            elif kind == ConeKind.EXP_DUAL:
                self._exp_dual.append(sl.start)
            # FREE: nothing to do
        self._zero_idx = (
            np.concatenate(zero_idx) if zero_idx else np.empty(0, dtype=int)
        )
        self._nonneg_idx = (
            np.concatenate(nonneg_idx) if nonneg_idx else np.empty(0, dtype=int)
        )

    def __call__(self, v):
        v = np.ascontiguousarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"expected vector of length {self.dim}")
        if self.compiled:
            out = np.empty(self.dim)
            _hot.project_product(v, out, self.kinds, self.starts, self.dims)
            return out
        out = v.copy()
        out[self._zero_idx] = 0.0
        out[self._nonneg_idx] = np.maximum(v[self._nonneg_idx], 0.0)
        for sl in self._soc:
            out[sl] = proj_soc(v[sl])
        for s in self._exp:
            out[s : s + 3] = proj_exp(v[s], v[s + 1], v[s + 2])
        for s in self._exp_dual:
            p = proj_exp(-v[s], -v[s + 1], -v[s + 2])
            out[s] = v[s] + p[0]
            out[s + 1] = v[s + 1] + p[1]
            out[s + 2] = v[s + 2] + p[2]
        return out
