"""Algebra and numeric evaluation of slowly varying weight functions.

The weight basis consists of positive constants, powers of
``l(t) = 1 + |ln t|``, powers of the iterated logarithm
``ll(t) = 1 + ln(1 + |ln t|)``, and everything reachable from these through
products, real powers, sums, reciprocal arguments ``b(1/t)``, regular
compositions ``b(t^lam * chi(t))`` and one- or two-level tail norms.  Each
expression tracks its asymptotic exponents at 0 and infinity, i.e. the pair
(a, b) with ``expr(t) ~ l(t)^a * ll(t)^b``, which drives every finiteness
decision.

Evaluation is a function of x = ln t throughout (``eval_log``); the basis
functions are exact functions of x, and tail-norm nodes are numeric prefix
integrals on a fixed internal grid, memoized after the first use.  Upper
variants are evaluated through the mirror identity (the value at t of an
upper tail equals the value at 1/t of the lower tail with reflected
operands), which keeps t -> 1/t symmetry exact to rounding.
"""

from __future__ import annotations

import math
import re

import numpy as np

from .grid import GridSpec, panel_integrals, prefix_sums
from .tails import TailModel, tail_factor

__all__ = [
    "SvExpr",
    "SvConstructionError",
    "SvEvalError",
    "const",
    "lpow",
    "llpow",
    "ONE",
    "sv_product",
    "sv_power",
    "sv_sum",
    "sv_recip_arg",
    "sv_compose",
    "sv_tail_norm",
    "sv_double_tail",
    "sv_eval",
    "parse_sv",
    "quasi_monotone_report",
    "primitive_exps",
]

# Internal quadrature range for tail-norm nodes; wide enough that every
# evaluation point that can arise (grid points, rho-transformed grid points,
# refined grids) stays strictly inside.
_INT_LO = -40.0
_INT_HI = 40.0
_INT_N = 8193


class SvConstructionError(ValueError):
    """A tail-norm construction whose defining integral diverges."""


class SvEvalError(ArithmeticError):
    """Evaluation produced a non-finite value."""


def primitive_exps(r_alpha: float, r_beta: float) -> tuple[float, float] | None:
    """Exponents of ``int (1+x)^{ra} ll^{rb} dx`` when it diverges.

    Returns None when the integral converges (so the primitive saturates),
    and raises on the doubly-critical case which cannot be resolved by this
    bookkeeping.
    """
    if r_alpha < -1.0:
        return None
    if r_alpha > -1.0:
        return (r_alpha + 1.0, r_beta)
    if r_beta < -1.0:
        return None
    if r_beta > -1.0:
        return (0.0, r_beta + 1.0)
    raise SvConstructionError("doubly critical exponent (a = b = -1): undetermined")


class SvExpr:
    """Base class; subclasses are immutable after construction."""

    #: (alpha, beta) log-exponents at t -> 0 and t -> inf, or None if unknown
    exps0: tuple[float, float] | None = None
    expsinf: tuple[float, float] | None = None
    #: True when the expression equals l^a * ll^b times a constant exactly
    exact_shape: bool = False

    # -- evaluation -------------------------------------------------------
    def eval_log(self, x):
        raise NotImplementedError

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr <= 0.0):
            raise SvEvalError("slowly varying functions live on (0, inf)")
        out = self.eval_log(np.log(t_arr))
        if not np.all(np.isfinite(out)) or np.any(out <= 0.0):
            raise SvEvalError(f"non-finite or non-positive value from {self!r}")
        return float(out) if np.isscalar(t) else out

    def freeze(self) -> "SvExpr":
        """Precompute memo tables; afterwards evaluation is read-only."""
        self.eval_log(np.array([0.0]))
        return self

    # -- models -----------------------------------------------------------
    def model(self, end: str) -> TailModel:
        exps = self.exps0 if end == "lo" else self.expsinf
        if exps is None:
            return TailModel(known=False)
        return TailModel(c=0.0, a=exps[0], b=exps[1], exact=self.exact_shape)

    def reflect(self) -> "SvExpr":
        """The function t -> self(1/t)."""
        return SvRecip(self)

    # -- sugar --------------------------------------------------------------
    def __mul__(self, other: "SvExpr") -> "SvExpr":
        return sv_product(self, other)

    def __pow__(self, p: float) -> "SvExpr":
        return sv_power(self, p)


class SvConst(SvExpr):
    def __init__(self, c: float):
        if not (c > 0.0 and math.isfinite(c)):
            raise ValueError("constant weights must be positive and finite")
        self.c = float(c)
        self.exps0 = (0.0, 0.0)
        self.expsinf = (0.0, 0.0)
        self.exact_shape = True

    def eval_log(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.c)

    def reflect(self):
        return self

    def __repr__(self):
        return f"const({self.c:g})"


class SvLogPow(SvExpr):
    """l(t)^alpha with l(t) = 1 + |ln t|."""

    def __init__(self, alpha: float):
        self.alpha = float(alpha)
        self.exps0 = (self.alpha, 0.0)
        self.expsinf = (self.alpha, 0.0)
        self.exact_shape = True

    def eval_log(self, x):
        return (1.0 + np.abs(x)) ** self.alpha

    def reflect(self):
        return self

    def __repr__(self):
        return f"lpow({self.alpha:g})"


class SvLogLogPow(SvExpr):
    """(1 + ln(1 + |ln t|))^beta."""

    def __init__(self, beta: float):
        self.beta = float(beta)
        self.exps0 = (0.0, self.beta)
        self.expsinf = (0.0, self.beta)
        self.exact_shape = True

    def eval_log(self, x):
        return (1.0 + np.log1p(np.abs(x))) ** self.beta

    def reflect(self):
        return self

    def __repr__(self):
        return f"llpow({self.beta:g})"


class SvProduct(SvExpr):
    def __init__(self, factors: tuple[SvExpr, ...]):
        self.factors = factors
        e0 = [f.exps0 for f in factors]
        ei = [f.expsinf for f in factors]
        self.exps0 = None if any(e is None for e in e0) else (
            sum(e[0] for e in e0), sum(e[1] for e in e0))
        self.expsinf = None if any(e is None for e in ei) else (
            sum(e[0] for e in ei), sum(e[1] for e in ei))
        self.exact_shape = all(f.exact_shape for f in factors)

    def eval_log(self, x):
        out = self.factors[0].eval_log(x)
        for f in self.factors[1:]:
            out = out * f.eval_log(x)
        return out

    def reflect(self):
        return SvProduct(tuple(f.reflect() for f in self.factors))

    def __repr__(self):
        return "*".join(repr(f) for f in self.factors)


class SvPower(SvExpr):
    def __init__(self, base: SvExpr, p: float):
        self.base = base
        self.p = float(p)
        self.exps0 = None if base.exps0 is None else (base.exps0[0] * p, base.exps0[1] * p)
        self.expsinf = None if base.expsinf is None else (base.expsinf[0] * p, base.expsinf[1] * p)
        self.exact_shape = base.exact_shape

    def eval_log(self, x):
        return self.base.eval_log(x) ** self.p

    def reflect(self):
        return SvPower(self.base.reflect(), self.p)

    def __repr__(self):
        return f"({self.base!r})^{self.p:g}"


class SvSum(SvExpr):
    """Pointwise sum; slowly varying since equivalent to the larger term."""

    def __init__(self, terms: tuple[SvExpr, ...]):
        self.terms = terms

        def _dominant(exps_list):
            if any(e is None for e in exps_list):
                return None
            out = exps_list[0]
            for e in exps_list[1:]:
                if out <= e:
                    out = e
            return out

        self.exps0 = _dominant([t.exps0 for t in terms])
        self.expsinf = _dominant([t.expsinf for t in terms])
        self.exact_shape = False

    def eval_log(self, x):
        out = self.terms[0].eval_log(x)
        for term in self.terms[1:]:
            out = out + term.eval_log(x)
        return out

    def reflect(self):
        return SvSum(tuple(t.reflect() for t in self.terms))

    def __repr__(self):
        return "(" + " + ".join(repr(t) for t in self.terms) + ")"


class SvRecip(SvExpr):
    """b(1/t): exact reflection on the log axis."""

    def __init__(self, inner: SvExpr):
        self.inner = inner
        self.exps0 = inner.expsinf
        self.expsinf = inner.exps0
        self.exact_shape = inner.exact_shape

    def eval_log(self, x):
        return self.inner.eval_log(-np.asarray(x, dtype=float))

    def reflect(self):
        return self.inner

    def __repr__(self):
        return f"recip({self.inner!r})"


class SvCompose(SvExpr):
    """b(rho(t)) with rho(t) = t^lam * chi(t), lam > 0."""

    def __init__(self, outer: SvExpr, lam: float, chi: SvExpr):
        if not lam > 0.0:
            raise SvConstructionError("regular composition needs a positive power")
        self.outer = outer
        self.lam = float(lam)
        self.chi = chi
        # rho preserves the ends, so the outer exponents carry over.
        self.exps0 = outer.exps0
        self.expsinf = outer.expsinf
        self.exact_shape = False

    def eval_log(self, x):
        x_arr = np.asarray(x, dtype=float)
        inner_log = self.lam * x_arr + np.log(self.chi.eval_log(x_arr))
        return self.outer.eval_log(inner_log)

    def reflect(self):
        return SvRecip(self)

    def __repr__(self):
        return f"compose({self.outer!r}, t^{self.lam:g}*{self.chi!r})"


def _internal_grid() -> tuple[np.ndarray, np.ndarray]:
    h = (_INT_HI - _INT_LO) / (_INT_N - 1)
    x = (np.arange(_INT_N) - (_INT_N - 1) / 2.0) * h
    return x, np.diff(x)


class SvTailNorm(SvExpr):
    """One-level tail norm of a slowly varying function.

    side 'lower':  B(t) = || u^{-1/r} b(u) ||_{r,(0,t)}
    side 'upper':  B(t) = || u^{-1/r} b(u) ||_{r,(t,inf)}

    Only the lower variant is computed directly; the upper one evaluates the
    lower norm of the reflected operand at 1/t.
    """

    def __init__(self, inner: SvExpr, r: float, side: str, _mirror_of=None):
        if side not in ("lower", "upper"):
            raise ValueError("side must be 'lower' or 'upper'")
        if not (r > 0.0):
            raise ValueError("quasi-exponent must be positive")
        self.inner = inner
        self.r = float(r)
        self.side = side
        self._memo = None
        if side == "upper":
            self._mirror = _mirror_of or SvTailNorm(inner.reflect(), r, "lower")
            self.exps0 = self._mirror.expsinf
            self.expsinf = self._mirror.exps0
            self.exact_shape = False
            return
        self._mirror = None
        exps = inner.exps0
        if exps is None:
            raise SvConstructionError(
                f"cannot certify || u^(-1/r) b ||_(r,(0,t)) < inf for opaque b = {inner!r}")
        a0, b0 = exps
        if math.isinf(self.r):
            # sup over (0, t): inner must stay bounded toward 0
            if (a0, b0) > (0.0, 0.0):
                raise SvConstructionError(
                    f"|| b ||_(inf,(0,t)) diverges: b = {inner!r} grows at 0")
            self.exps0 = (a0, b0) if (a0, b0) < (0.0, 0.0) else (0.0, 0.0)
        else:
            if primitive_exps(self.r * a0, self.r * b0) is not None:
                raise SvConstructionError(
                    f"|| u^(-1/r) b ||_(r,(0,t)) diverges at 0 for b = {inner!r}, r = {r:g}")
            self.exps0 = (a0 + 1.0 / self.r, b0)
        self.expsinf = self._far_exps(inner.expsinf)
        self.exact_shape = False

    def _far_exps(self, exps_inf):
        if exps_inf is None:
            return None
        ai, bi = exps_inf
        if math.isinf(self.r):
            return (ai, bi) if (ai, bi) > (0.0, 0.0) else (0.0, 0.0)
        try:
            prim = primitive_exps(self.r * ai, self.r * bi)
        except SvConstructionError:
            return None
        if prim is None:
            return (0.0, 0.0)
        return (prim[0] / self.r, prim[1] / self.r)

    def _build(self):
        x, h = _internal_grid()
        vals = self.inner.eval_log(x)
        if math.isinf(self.r):
            acc = np.maximum.accumulate(vals)
            self._memo = (x, acc)
            return
        integrand = vals ** self.r
        a0, b0 = self.inner.exps0
        head = integrand[0] * tail_factor(0.0, self.r * a0, self.r * b0, abs(x[0]))
        acc = prefix_sums(panel_integrals(h, integrand), head)
        # numeric confirmation: mass per decade must shrink outward
        dec = max(1, int(round(math.log(10.0) / (x[1] - x[0]))))
        m_outer = acc[dec] - acc[0]
        m_next = acc[2 * dec] - acc[dec]
        if not m_outer <= m_next * 4.0 + 1e-300:
            raise SvConstructionError(
                f"numeric confirmation failed: tail mass of {self!r} not decreasing outward")
        self._memo = (x, acc)

    def eval_log(self, x):
        x_arr = np.asarray(x, dtype=float)
        if self.side == "upper":
            return self._mirror.eval_log(-x_arr)
        if self._memo is None:
            self._build()
        xi, acc = self._memo
        xq = np.clip(x_arr, xi[0], xi[-1])
        val = np.interp(xq, xi, acc)
        if math.isinf(self.r):
            return val
        return val ** (1.0 / self.r)

    def reflect(self):
        if self.side == "upper":
            return self._mirror
        return SvTailNorm(self.inner.reflect(), self.r, "upper", _mirror_of=self)

    def __repr__(self):
        iv = "(0,t)" if self.side == "lower" else "(t,inf)"
        return f"tail[{self.inner!r}; r={self.r:g}, {iv}]"


class SvDoubleTail(SvExpr):
    """Two-level tail norm (the nested weight constructions).

    side 'lower':  D(t) = || s^{-1/r} b(s) || u^{-1/q} a(u) ||_{q,(s,t)} ||_{r,(0,t)}
    side 'upper':  D(t) = || s^{-1/r} b(s) || u^{-1/q} a(u) ||_{q,(t,s)} ||_{r,(t,inf)}

    As with one-level tails, only the lower variant computes; upper mirrors.
    """

    def __init__(self, a: SvExpr, b: SvExpr, q: float, r: float, side: str, _mirror_of=None):
        if side not in ("lower", "upper"):
            raise ValueError("side must be 'lower' or 'upper'")
        if not (q > 0.0 and r > 0.0):
            raise ValueError("quasi-exponents must be positive")
        self.a = a
        self.b = b
        self.q = float(q)
        self.r = float(r)
        self.side = side
        self._memo = None
        if side == "upper":
            self._mirror = _mirror_of or SvDoubleTail(a.reflect(), b.reflect(), q, r, "lower")
            self.exps0 = self._mirror.expsinf
            self.expsinf = self._mirror.exps0
            self.exact_shape = False
            return
        self._mirror = None
        if a.exps0 is None or b.exps0 is None:
            raise SvConstructionError("cannot certify nested tail norm for opaque operands")
        aa, ab = a.exps0
        ba, bb = b.exps0
        growth = self._window_growth_r()  # exps of window^r as s -> 0, or None
        win_r = (0.0, 0.0) if growth is None else growth
        composite = (self.r * ba + win_r[0], self.r * bb + win_r[1])
        if math.isinf(self.r):
            if composite > (0.0, 0.0):
                raise SvConstructionError(
                    f"nested tail norm diverges (sup) for a = {a!r}, b = {b!r}")
            self.exps0 = composite if composite < (0.0, 0.0) else (0.0, 0.0)
        else:
            if primitive_exps(composite[0], composite[1]) is not None:
                raise SvConstructionError(
                    "nested tail norm diverges at 0: "
                    f"|| s^(-1/r) b || u^(-1/q) a ||_(q,(s,t)) ||_(r,(0,t)) with "
                    f"a = {a!r}, b = {b!r}, q = {q:g}, r = {r:g}")
            inv_q = 0.0 if math.isinf(self.q) else 1.0 / self.q
            self.exps0 = (aa + ba + inv_q + 1.0 / self.r, ab + bb)
        self.expsinf = None  # estimated numerically on first build
        self.exact_shape = False

    def _window_growth_r(self) -> tuple[float, float] | None:
        """Exponents of (inner window)^r as the lower limit goes to 0.

        None when the inner integral (or sup) saturates below any fixed t.
        """
        aa, ab = self.a.exps0
        if math.isinf(self.q):
            return (self.r * aa, self.r * ab) if (aa, ab) > (0.0, 0.0) else None
        prim = primitive_exps(self.q * aa, self.q * ab)
        if prim is None:
            return None
        return (self.r / self.q * prim[0], self.r / self.q * prim[1])

    def _head_mass(self, x0: float, b_edge: float, a_edge: float, w_edge_pow_r) -> np.ndarray:
        """Outer mass below the internal grid, per boundary.

        ``w_edge_pow_r`` is the window at the grid edge, already raised to
        the outer power r.  The mass splits into a part where the window is
        frozen at its edge value and, when the window keeps growing below
        the grid, a part carrying that growth folded into the tail shape.
        """
        ba, bb = self.b.exps0
        r = self.r
        w = np.maximum(np.asarray(w_edge_pow_r, dtype=float), 0.0)
        mass = (b_edge ** r) * tail_factor(0.0, r * ba, r * bb, abs(x0)) * w
        growth = self._window_growth_r()
        if growth is not None:
            mass = mass + (b_edge ** r) * (a_edge ** r) * tail_factor(
                0.0, r * ba + growth[0], r * bb + growth[1], abs(x0))
        return mass

    def _build(self):
        x, h = _internal_grid()
        va = self.a.eval_log(x)
        vb = self.b.eval_log(x)
        n = len(x)
        q, r = self.q, self.r

        def window_row(k: int) -> np.ndarray:
            """Inner window values for s at nodes 0..k with boundary t_k."""
            if math.isinf(q):
                return np.maximum.accumulate(va[k::-1])[::-1]
            return np.maximum(Wq[k] - Wq[:k + 1], 0.0) ** (1.0 / q)

        Wq = None
        if not math.isinf(q):
            Wq = prefix_sums(panel_integrals(h, va ** q))

        if math.isinf(r):
            out = np.empty(n)
            for k in range(n):
                out[k] = float(np.max(vb[:k + 1] * window_row(k)))
            self._memo = (x, out)
            return

        if not math.isinf(q) and abs(q - r) < 1e-12:
            br = vb ** r
            P0 = prefix_sums(panel_integrals(h, br))
            P1 = prefix_sums(panel_integrals(h, br * Wq))
            body = np.maximum(Wq * P0 - P1, 0.0)
            out = body + self._head_mass(x[0], vb[0], va[0], np.maximum(Wq - Wq[0], 0.0))
            self._memo = (x, out)
            return

        # general rank-2 path
        br = vb ** r
        out = np.empty(n)
        for k in range(n):
            w = window_row(k)
            integ = br[:k + 1] * w ** r
            body = float(np.sum(panel_integrals(h[:k], integ))) if k > 0 else 0.0
            if math.isinf(q):
                w_edge_r = w[0] ** r
            else:
                w_edge_r = max(Wq[k] - Wq[0], 0.0) ** (r / q)
            out[k] = body + float(self._head_mass(x[0], vb[0], va[0], w_edge_r))
        self._memo = (x, out)

    def eval_log(self, x):
        x_arr = np.asarray(x, dtype=float)
        if self.side == "upper":
            return self._mirror.eval_log(-x_arr)
        if self._memo is None:
            self._build()
            self._fit_far_exps()
        xi, acc = self._memo
        xq = np.clip(x_arr, xi[0], xi[-1])
        val = np.interp(xq, xi, acc)
        if math.isinf(self.r):
            return val
        return val ** (1.0 / self.r)

    def _fit_far_exps(self):
        if self.expsinf is not None:
            return
        xi, acc = self._memo
        vals = acc if math.isinf(self.r) else acc ** (1.0 / self.r)
        sel = xi > 0.6 * xi[-1]
        lx = np.log1p(xi[sel])
        ly = np.log(np.maximum(vals[sel], 1e-300))
        slope = float(np.polyfit(lx, ly, 1)[0])
        self.expsinf = (slope, 0.0)

    def reflect(self):
        if self.side == "upper":
            return self._mirror
        return SvDoubleTail(self.a.reflect(), self.b.reflect(), self.q, self.r,
                            "upper", _mirror_of=self)

    def __repr__(self):
        if self.side == "lower":
            return (f"dtail[{self.b!r}; inner {self.a!r} on (s,t), q={self.q:g}; "
                    f"outer (0,t), r={self.r:g}]")
        return (f"dtail[{self.b!r}; inner {self.a!r} on (t,s), q={self.q:g}; "
                f"outer (t,inf), r={self.r:g}]")


# ---------------------------------------------------------------------------
# constructors

ONE = SvConst(1.0)


def const(c: float) -> SvExpr:
    return SvConst(c)


def lpow(alpha: float) -> SvExpr:
    return SvLogPow(alpha) if alpha != 0.0 else ONE


def llpow(beta: float) -> SvExpr:
    return SvLogLogPow(beta) if beta != 0.0 else ONE


def _is_one(e: SvExpr) -> bool:
    return isinstance(e, SvConst) and e.c == 1.0


def sv_product(*factors: SvExpr) -> SvExpr:
    flat: list[SvExpr] = []
    c = 1.0
    for f in factors:
        if isinstance(f, SvConst):
            c *= f.c
        elif isinstance(f, SvProduct):
            flat.extend(f.factors)
        else:
            flat.append(f)
    if c != 1.0:
        flat.insert(0, SvConst(c))
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    return SvProduct(tuple(flat))


def sv_power(base: SvExpr, p: float) -> SvExpr:
    if p == 1.0:
        return base
    if p == 0.0 or _is_one(base):
        return ONE
    if isinstance(base, SvConst):
        return SvConst(base.c ** p)
    if isinstance(base, SvLogPow):
        return SvLogPow(base.alpha * p)
    if isinstance(base, SvLogLogPow):
        return SvLogLogPow(base.beta * p)
    if isinstance(base, SvPower):
        return sv_power(base.base, base.p * p)
    return SvPower(base, p)


def sv_sum(*terms: SvExpr) -> SvExpr:
    if len(terms) == 1:
        return terms[0]
    return SvSum(tuple(terms))


def sv_recip_arg(expr: SvExpr) -> SvExpr:
    return expr.reflect()


def sv_compose(outer: SvExpr, lam: float, chi: SvExpr = ONE) -> SvExpr:
    if isinstance(outer, SvConst):
        return outer
    if lam == 1.0 and _is_one(chi):
        return outer
    return SvCompose(outer, lam, chi)


def sv_tail_norm(b: SvExpr, r: float, side: str) -> SvExpr:
    return SvTailNorm(b, r, side)


def sv_double_tail(a: SvExpr, b: SvExpr, q: float, r: float, side: str) -> SvExpr:
    if math.isinf(q) and isinstance(a, SvConst):
        # sup of a constant inner weight collapses to a one-level tail
        return sv_product(SvConst(a.c), SvTailNorm(b, r, side))
    return SvDoubleTail(a, b, q, r, side)


def sv_eval(expr: SvExpr, t: float) -> float:
    """Value of the represented function at a single point t > 0."""
    return expr(float(t))


# ---------------------------------------------------------------------------
# parsing (textual weight expressions used in config files)

_ATOM = re.compile(
    r"\s*(?:(?P<num>[0-9]+(?:\.[0-9]+)?)"
    r"|(?P<fn>lpow|llpow|const)\(\s*(?P<arg>[-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*\))\s*$"
)


def parse_sv(text: str) -> SvExpr:
    """Parse a weight expression: product of atoms joined by '*'.

    Atoms: a positive number, ``const(c)``, ``lpow(a)``, ``llpow(b)``.
    Examples: ``"1"``, ``"lpow(-2)"``, ``"lpow(1)*llpow(-0.5)"``.
    """
    factors = []
    for piece in str(text).split("*"):
        m = _ATOM.match(piece)
        if m is None:
            raise ValueError(f"cannot parse weight atom {piece!r}")
        if m.group("num") is not None:
            factors.append(const(float(m.group("num"))))
            continue
        fn, arg = m.group("fn"), float(m.group("arg"))
        factors.append({"lpow": lpow, "llpow": llpow, "const": const}[fn](arg))
    return sv_product(*factors)


# ---------------------------------------------------------------------------
# quasi-monotonicity check

class SvCheckReport:
    def __init__(self, eps, c_up, c_down, delta_up, delta_down):
        self.eps = eps
        self.c_up = c_up
        self.c_down = c_down
        self.delta_up = delta_up
        self.delta_down = delta_down

    @property
    def passed(self) -> bool:
        return (math.isfinite(self.c_up) and math.isfinite(self.c_down)
                and self.delta_up < 0.02 and self.delta_down < 0.02)

    def __repr__(self):
        return (f"SvCheckReport(eps={self.eps:g}, C_up={self.c_up:.6g}, "
                f"C_down={self.c_down:.6g}, deltas=({self.delta_up:.3g}, "
                f"{self.delta_down:.3g}), passed={self.passed})")


def _qm_constants(expr: SvExpr, eps: float, x: np.ndarray) -> tuple[float, float]:
    vals = expr.eval_log(x)
    up = np.exp(eps * x) * vals           # must be equivalent to increasing
    down = np.exp(-eps * x) * vals        # must be equivalent to decreasing
    c_up = float(np.max(np.maximum.accumulate(up) / up))
    c_down = float(np.max(down / np.minimum.accumulate(down)))
    return c_up, c_down


def quasi_monotone_report(expr: SvExpr, eps: float,
                          spec: GridSpec | None = None) -> SvCheckReport:
    """Empirical constants witnessing the two quasi-monotonicity conditions.

    C_up is the smallest grid constant with s^eps b(s) <= C t^eps b(t) for
    s <= t; C_down the analogue for t^{-eps} b(t).  The report passes when
    both are finite and move by less than 2% under grid doubling.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    spec = spec or GridSpec()
    g1 = spec.build()
    g2 = g1.refined()
    cu1, cd1 = _qm_constants(expr, eps, g1.x)
    cu2, cd2 = _qm_constants(expr, eps, g2.x)
    du = abs(cu2 - cu1) / max(cu1, 1e-300)
    dd = abs(cd2 - cd1) / max(cd1, 1e-300)
    return SvCheckReport(eps, cu2, cd2, du, dd)
