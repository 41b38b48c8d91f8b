"""Schur analysis for slice hyperholomorphic functions of a quaternionic variable."""

from . import blaschke, errors, interp, kernels, qlinalg, quat, realize, series
from .blaschke import BlaschkeProduct, PointZero, SphereZero, factor_point, factor_sphere, product_build
from .interp import InterpProblem, InterpSolution, solve
from .kernels import KernelSeries, cara_kernel, hardy_kernel, hardy_series, kernel_neg_squares, schur_kernel
from .qlinalg import QMatrix
from .quat import ImagUnit, Quaternion, TwoSphere
from .realize import CaraColligation, UnitaryColligation, check_ag_identity, check_cara_kernel, eval_cara, eval_schur
from .series import LSeries, RSeries, star_inv, star_mul

__version__ = "0.1.0"
