"""Nonuniform fast Fourier transforms with an exponential-of-semicircle
spreading kernel.

Types 1 (nonuniform to uniform), 2 (uniform to nonuniform), and 3
(nonuniform to nonuniform) in one, two, and three dimensions, with no
precomputation phase: kernel values are produced on the fly from a piecewise
polynomial and mode corrections come from numerical quadrature.  See the
nufft* functions for the user-facing API and TransformOptions for knobs.
"""

from .errors import (BadToleranceError, BoundsViolationError, DataError,
                     ErrorCode, EsnufftError, InternalError, ResourceError,
                     SizeError)
from .kernel import KernelParams, class_tolerance, params_for_width, select_params
from .oracle import (ErrorReport, aliasing_probe, direct_type1, direct_type2,
                     direct_type3, rel_l2)
from .transforms import (TransformOptions, exec_type1, exec_type2, exec_type3,
                         nufft1d1, nufft1d2, nufft1d3, nufft2d1, nufft2d2,
                         nufft2d3, nufft3d1, nufft3d2, nufft3d3)

__version__ = "0.1.0"

__all__ = [
    "BadToleranceError", "BoundsViolationError", "DataError", "ErrorCode",
    "EsnufftError", "InternalError", "ResourceError", "SizeError",
    "KernelParams", "class_tolerance", "params_for_width", "select_params",
    "ErrorReport", "aliasing_probe", "direct_type1", "direct_type2",
    "direct_type3", "rel_l2",
    "TransformOptions", "exec_type1", "exec_type2", "exec_type3",
    "nufft1d1", "nufft1d2", "nufft1d3", "nufft2d1", "nufft2d2", "nufft2d3",
    "nufft3d1", "nufft3d2", "nufft3d3",
    "__version__",
]
