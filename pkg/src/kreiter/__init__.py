"""Numerical calculus and verification harness for real-interpolation norms
with slowly varying weights."""

from .grid import Grid, GridSpec
from .kprofile import (KProfile, SimpleFunction, StepStar, f_star_star,
                       k_l1_linf, quasi_concave_check, random_simple_functions,
                       rearrange, synthetic_k)
from .svfun import (ONE, SvConstructionError, SvEvalError, SvExpr, const,
                    llpow, lpow, parse_sv, quasi_monotone_report, sv_compose,
                    sv_double_tail, sv_eval, sv_power, sv_product,
                    sv_recip_arg, sv_sum, sv_tail_norm)
from .wnorm import (GridFn, NormResult, cumulative_norms, refine_check,
                    weighted_norm)

__version__ = "0.1.0"
