"""Weighted quasi-norms of scalar functions against dt/t on the log grid.

The engine computes ``|| u^{lam - 1/q} w(u) g(u) ||_{q,(a,b)}`` (with sup for
q = inf) for g given on the grid, plus cumulative variants: from-zero and
from-infinity passes that yield the norm at every grid boundary in one O(N)
sweep, and rank-two middles whose inner interval couples the integration
variable to the boundary.

Everything carries a :class:`GridFn`: nodal values plus tail models for the
two un-gridded ends.  Step functions (rearrangements) additionally carry
per-panel left/right values so that panels between inserted breakpoints
integrate exactly.  A norm is reported finite only when the models certify
integrable tails; otherwise the result is flagged divergent (a first-class
outcome, not an exception) or tail-uncertain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .grid import Grid, panel_integrals, prefix_sums, suffix_sums
from .kprofile import KProfile
from .svfun import SvExpr
from .tails import TailModel, ZERO_TAIL, tail_mass, sup_tail_behaviour

__all__ = [
    "GridFn",
    "NormResult",
    "power_fn",
    "weight_fn",
    "profile_fn",
    "const_fn",
    "combine",
    "sum_fns",
    "scale_fn",
    "cum_as_fn",
    "as_values",
    "full_norm",
    "prefix_norms",
    "suffix_norms",
    "window_norm",
    "weighted_norm",
    "cumulative_norms",
    "middle_lower",
    "middle_upper",
    "refine_check",
]


@dataclass
class GridFn:
    """Nonnegative function sampled on grid nodes with end models.

    ``edges`` optionally holds (left, right) per-panel values for functions
    with jumps at inserted breakpoints; when present, panel integration uses
    these instead of the nodal values.
    """

    vals: np.ndarray
    lo: TailModel
    hi: TailModel
    edges: tuple[np.ndarray, np.ndarray] | None = None
    divergent: bool = False
    uncertain: bool = False

    def power(self, p: float) -> "GridFn":
        edges = None if self.edges is None else (self.edges[0] ** p, self.edges[1] ** p)
        return GridFn(self.vals ** p, self.lo.scaled(p), self.hi.scaled(p),
                      edges, self.divergent, self.uncertain)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if self.edges is not None:
            return self.edges
        return self.vals[:-1], self.vals[1:]


@dataclass
class NormResult:
    value: float
    divergent: bool = False
    uncertain: bool = False

    def __float__(self) -> float:
        return self.value

    @property
    def finite(self) -> bool:
        return not self.divergent and math.isfinite(self.value)


def _fold(res, flag: str) -> None:
    if flag == "divergent":
        res.divergent = True
        if isinstance(res, NormResult):
            res.value = math.inf
    elif flag == "uncertain":
        res.uncertain = True


def power_fn(grid: Grid, lam: float) -> GridFn:
    if lam == 0.0:
        ones = np.ones_like(grid.x)
        return GridFn(ones, TailModel(exact=True), TailModel(exact=True))
    return GridFn(np.exp(lam * grid.x),
                  TailModel(c=-lam, exact=True),
                  TailModel(c=lam, exact=True))


def const_fn(grid: Grid, value: float) -> GridFn:
    return GridFn(np.full_like(grid.x, value), TailModel(exact=True),
                  TailModel(exact=True))


def weight_fn(grid: Grid, expr: SvExpr) -> GridFn:
    vals = expr.eval_log(grid.x)
    return GridFn(np.asarray(vals, dtype=float), expr.model("lo"), expr.model("hi"))


def profile_fn(grid: Grid, profile: KProfile) -> GridFn:
    """K as a grid function; exact linear/constant models outside the core."""
    vals = profile.eval_log(grid.x)
    bl = profile.breakpoints_log
    lo_exact = bl.size == 0 or float(np.min(bl)) > grid.x_lo
    hi_exact = bl.size == 0 or float(np.max(bl)) < grid.x_hi
    lo = TailModel(c=-1.0, exact=lo_exact)     # K ~ slope0 * t
    hi = TailModel(c=0.0, exact=hi_exact)      # K ~ limit_inf
    return GridFn(np.asarray(vals, dtype=float), lo, hi)


def step_fn(grid: Grid, breaks_log: np.ndarray, values: np.ndarray) -> GridFn:
    """Compactly supported step function: values[j] on the j-th interval.

    ``breaks_log`` holds the m+1 log-breakpoints of m intervals; the
    function vanishes outside [breaks_log[0], breaks_log[-1]].  Breakpoints
    should be inserted into the grid for exact panel integration.
    """
    breaks_log = np.asarray(breaks_log, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values < 0.0):
        raise ValueError("negative sample in g")

    def at(xq: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(breaks_log, xq, side="right") - 1
        ok = (idx >= 0) & (idx < len(values))
        out = np.zeros_like(xq)
        out[ok] = values[idx[ok]]
        return out

    mids = 0.5 * (grid.x[:-1] + grid.x[1:])
    pv = at(mids)
    return GridFn(at(grid.x), ZERO_TAIL, ZERO_TAIL, edges=(pv, pv))


def combine(*fns: GridFn) -> GridFn:
    """Pointwise product of grid functions."""
    vals = fns[0].vals.copy()
    lo, hi = fns[0].lo, fns[0].hi
    edges = fns[0].edges
    div = fns[0].divergent
    unc = fns[0].uncertain
    any_edges = any(f.edges is not None for f in fns)
    if any_edges:
        el, er = fns[0].edge_arrays()
        el, er = el.copy(), er.copy()
    for f in fns[1:]:
        vals *= f.vals
        lo = lo.times(f.lo)
        hi = hi.times(f.hi)
        if any_edges:
            fl, fr = f.edge_arrays()
            el *= fl
            er *= fr
        div = div or f.divergent
        unc = unc or f.uncertain
    edges = (el, er) if any_edges else None
    return GridFn(vals, lo, hi, edges, div, unc)


def _dominant(m1: TailModel, m2: TailModel) -> TailModel:
    if not (m1.known and m2.known):
        return TailModel(known=False)
    if m1.zero:
        return m2
    if m2.zero:
        return m1
    key1 = (m1.c, m1.a, m1.b)
    key2 = (m2.c, m2.a, m2.b)
    out = m1 if key1 >= key2 else m2
    return replace(out, exact=False)


def sum_fns(*fns: GridFn) -> GridFn:
    """Pointwise sum; end models take the dominant term."""
    vals = fns[0].vals.copy()
    lo, hi = fns[0].lo, fns[0].hi
    div = fns[0].divergent
    unc = fns[0].uncertain
    any_edges = any(f.edges is not None for f in fns)
    if any_edges:
        el, er = fns[0].edge_arrays()
        el, er = el.copy(), er.copy()
    for f in fns[1:]:
        vals += f.vals
        lo = _dominant(lo, f.lo)
        hi = _dominant(hi, f.hi)
        if any_edges:
            fl, fr = f.edge_arrays()
            el += fl
            er += fr
        div = div or f.divergent
        unc = unc or f.uncertain
    edges = (el, er) if any_edges else None
    return GridFn(vals, lo, hi, edges, div, unc)


def scale_fn(f: GridFn, c: float) -> GridFn:
    edges = None if f.edges is None else (c * f.edges[0], c * f.edges[1])
    return GridFn(c * f.vals, f.lo, f.hi, edges, f.divergent, f.uncertain)


def _panels(grid: Grid, z: GridFn, q: float) -> np.ndarray:
    if z.edges is None:
        return panel_integrals(grid.h, z.vals ** q)
    el, er = z.edges
    yl = el ** q
    yr = er ** q
    # exponential-fit rule on per-panel endpoint values
    out = 0.5 * grid.h * (yl + yr)
    both = (yl > 0.0) & (yr > 0.0)
    if np.any(both):
        dl = np.log(np.where(both, yr, 1.0)) - np.log(np.where(both, yl, 1.0))
        use = both & (np.abs(dl) > 1e-9)
        out[use] = grid.h[use] * (yr[use] - yl[use]) / dl[use]
    return out


def _sup_vals(z: GridFn) -> np.ndarray:
    """Nodal sup-relevant values (steps contribute their panel plateaus)."""
    if z.edges is None:
        return z.vals
    el, er = z.edges
    v = z.vals.copy()
    v[:-1] = np.maximum(v[:-1], el)
    v[1:] = np.maximum(v[1:], er)
    return v


def full_norm(grid: Grid, z: GridFn, q: float) -> NormResult:
    """|| z ||_q over all of (0, inf), including both un-gridded tails."""
    res = NormResult(0.0, z.divergent, z.uncertain)
    if z.divergent:
        res.value = math.inf
        return res
    if math.isinf(q):
        vals = _sup_vals(z)
        peak = float(np.max(vals))
        for model, edge in ((z.lo, float(vals[0])), (z.hi, float(vals[-1]))):
            sup, st = sup_tail_behaviour(model, edge)
            _fold(res, st)
            if math.isfinite(sup):
                peak = max(peak, sup)
        if not res.divergent:
            res.value = peak
        return res
    total = float(np.sum(_panels(grid, z, q)))
    y_lo = float(z.vals[0] ** q)
    y_hi = float(z.vals[-1] ** q)
    mass_lo, st_lo = tail_mass(z.lo.scaled(q), y_lo, abs(grid.x_lo))
    mass_hi, st_hi = tail_mass(z.hi.scaled(q), y_hi, abs(grid.x_hi))
    _fold(res, st_lo)
    _fold(res, st_hi)
    if res.divergent:
        return res
    res.value = (total + mass_lo + mass_hi) ** (1.0 / q)
    return res


def prefix_norms(grid: Grid, z: GridFn, q: float) -> GridFn:
    """Cumulative norms from zero: entry k holds || z ||_{q,(0,t_k)}.

    For q < inf the returned GridFn carries the q-th power of the norms
    (callers compose powers explicitly); for q = inf it carries the running
    sup itself.  The lower tail mass is included; divergence there poisons
    every entry.
    """
    if math.isinf(q):
        vals = _sup_vals(z)
        out = GridFn(np.maximum.accumulate(vals), z.lo, TailModel(c=0.0),
                     None, z.divergent, z.uncertain)
        _, st = sup_tail_behaviour(z.lo, float(vals[0]))
        _fold(out, st)
        if out.divergent:
            out.vals = np.full_like(out.vals, math.inf)
        return out
    mq = z.lo.scaled(q)
    mass_lo, st = tail_mass(mq, float(z.vals[0] ** q), abs(grid.x_lo))
    head = mass_lo if math.isfinite(mass_lo) else 0.0
    out_vals = prefix_sums(_panels(grid, z, q), head)
    out = GridFn(out_vals, _primitive_model(mq), TailModel(known=False),
                 None, z.divergent, z.uncertain)
    _fold(out, st)
    if out.divergent:
        out.vals = np.full_like(out_vals, math.inf)
    hi_q = z.hi.scaled(q)
    if hi_q.zero:
        out.hi = TailModel(c=0.0, exact=True)
    elif hi_q.integrable() == "yes":
        out.hi = TailModel(c=0.0, exact=False)
    else:
        out.hi = _growth_model(hi_q)
    return out


def suffix_norms(grid: Grid, z: GridFn, q: float) -> GridFn:
    """Cumulative norms from infinity: entry k holds || z ||_{q,(t_k, inf)}."""
    if math.isinf(q):
        vals = _sup_vals(z)
        out = GridFn(np.maximum.accumulate(vals[::-1])[::-1], TailModel(c=0.0),
                     z.hi, None, z.divergent, z.uncertain)
        _, st = sup_tail_behaviour(z.hi, float(vals[-1]))
        _fold(out, st)
        if out.divergent:
            out.vals = np.full_like(out.vals, math.inf)
        return out
    mq = z.hi.scaled(q)
    mass_hi, st = tail_mass(mq, float(z.vals[-1] ** q), abs(grid.x_hi))
    head = mass_hi if math.isfinite(mass_hi) else 0.0
    out_vals = suffix_sums(_panels(grid, z, q), head)
    out = GridFn(out_vals, TailModel(known=False), _primitive_model(mq),
                 None, z.divergent, z.uncertain)
    _fold(out, st)
    if out.divergent:
        out.vals = np.full_like(out_vals, math.inf)
    lo_q = z.lo.scaled(q)
    if lo_q.zero:
        out.lo = TailModel(c=0.0, exact=True)
    elif lo_q.integrable() == "yes":
        out.lo = TailModel(c=0.0, exact=False)
    else:
        out.lo = _growth_model(lo_q)
    return out


def _primitive_model(m: TailModel) -> TailModel:
    """Model of the running integral toward an end where m is integrable."""
    if m.zero:
        return ZERO_TAIL
    if not m.known:
        return TailModel(known=False)
    if m.c < 0.0:
        exact = m.exact and m.a == 0.0 and m.b == 0.0
        return replace(m, exact=exact)
    # c == 0, a < -1 (integrable): primitive gains one power of (1+|x|)
    return TailModel(c=0.0, a=m.a + 1.0, b=m.b, exact=m.exact and m.b == 0.0)


def _growth_model(m: TailModel) -> TailModel:
    """Model of the running integral toward an end where m diverges."""
    if not m.known:
        return TailModel(known=False)
    if m.c > 0.0:
        exact = m.exact and m.a == 0.0 and m.b == 0.0
        return replace(m, exact=exact)
    if m.a > -1.0:
        return TailModel(c=0.0, a=m.a + 1.0, b=m.b, exact=False)
    if m.a == -1.0 and m.b > -1.0:
        return TailModel(c=0.0, a=0.0, b=m.b + 1.0, exact=False)
    return TailModel(known=False)


def interp_cum(x_bound: float, xs: np.ndarray, vals: np.ndarray) -> float:
    """Interpolate a cumulative array at an off-node boundary.

    Interpolates the logarithm when both neighbors are positive (exact for
    pure-power integrands whose cumulative is exponential in x), falling
    back to linear interpolation around zeros.
    """
    k = int(np.searchsorted(xs, x_bound))
    if k <= 0:
        return float(vals[0])
    if k >= len(xs):
        return float(vals[-1])
    v0, v1 = float(vals[k - 1]), float(vals[k])
    if v0 > 0.0 and v1 > 0.0 and math.isfinite(v0) and math.isfinite(v1):
        w = (x_bound - xs[k - 1]) / (xs[k] - xs[k - 1])
        return math.exp((1.0 - w) * math.log(v0) + w * math.log(v1))
    return float(np.interp(x_bound, xs, vals))


def cum_as_fn(cum: GridFn, q: float) -> GridFn:
    """Convert a cumulative pass (q-power convention) to a value-scale GridFn."""
    if math.isinf(q):
        return cum
    inv = 1.0 / q
    return GridFn(cum.vals ** inv, cum.lo.scaled(inv), cum.hi.scaled(inv),
                  None, cum.divergent, cum.uncertain)


def as_values(cum: GridFn, q: float) -> np.ndarray:
    return cum.vals if math.isinf(q) else cum.vals ** (1.0 / q)


def window_norm(grid: Grid, z: GridFn, q: float, x_a: float, x_b: float) -> float:
    """|| z ||_{q,(a,b)} for a window inside the grid range (log bounds)."""
    if math.isinf(q):
        sel = (grid.x >= x_a - 1e-12) & (grid.x <= x_b + 1e-12)
        return float(np.max(_sup_vals(z)[sel])) if np.any(sel) else 0.0
    cum = prefix_sums(_panels(grid, z, q))
    ia = interp_cum(x_a, grid.x, cum)
    ib = interp_cum(x_b, grid.x, cum)
    return max(ib - ia, 0.0) ** (1.0 / q)


def weighted_norm(grid: Grid, g: GridFn, lam: float, q: float, weight: SvExpr | None,
                  interval: str = "full", x_bound: float | None = None,
                  x_window: tuple[float, float] | None = None) -> NormResult:
    """|| u^{lam-1/q} w(u) g(u) ||_{q, interval} with tail analysis.

    interval: 'full' for (0, inf); 'lower' for (0, t); 'upper' for (t, inf)
    with t = exp(x_bound); 'window' for (a, b) given as x_window log bounds.
    """
    if np.any(g.vals < 0.0):
        raise ValueError("negative sample in g")
    parts = [power_fn(grid, lam), g]
    if weight is not None:
        parts.insert(1, weight_fn(grid, weight))
    z = combine(*parts)
    if interval == "full":
        return full_norm(grid, z, q)
    if interval == "window":
        return NormResult(window_norm(grid, z, q, *x_window))
    if interval == "lower":
        cum = prefix_norms(grid, z, q)
    elif interval == "upper":
        cum = suffix_norms(grid, z, q)
    else:
        raise ValueError(f"unknown interval kind {interval!r}")
    res = NormResult(0.0, cum.divergent, cum.uncertain)
    if cum.divergent:
        res.value = math.inf
        return res
    v = interp_cum(x_bound, grid.x, cum.vals)
    res.value = v if math.isinf(q) else v ** (1.0 / q)
    return res


def cumulative_norms(grid: Grid, g: GridFn, lam: float, q: float,
                     weight: SvExpr | None, direction: str) -> GridFn:
    """Norm at every grid boundary in one pass ('from-zero'|'from-infinity')."""
    if np.any(g.vals < 0.0):
        raise ValueError("negative sample in g")
    parts = [power_fn(grid, lam), g]
    if weight is not None:
        parts.insert(1, weight_fn(grid, weight))
    z = combine(*parts)
    if direction == "from-zero":
        return prefix_norms(grid, z, q)
    if direction == "from-infinity":
        return suffix_norms(grid, z, q)
    raise ValueError(f"unknown direction {direction!r}")


def _monotone_kind(vals: np.ndarray) -> str:
    d = np.diff(vals)
    tol = 1e-12 * np.maximum(vals[:-1], 1e-300)
    if np.all(d >= -tol):
        return "nondecreasing"
    if np.all(d <= tol):
        return "nonincreasing"
    return "none"


def middle_lower(grid: Grid, inner_z: GridFn, q: float, mid_z: GridFn, r: float) -> GridFn:
    """M(t) = || mid(s) * || inner ||_{q,(s,t)} ||_{r,(0,t)} at every node.

    The inner interval couples s to the boundary t.  Returns the r-th power
    array (or the sup itself for r = inf) with end models.
    """
    n = grid.n
    h = grid.h
    div = inner_z.divergent or mid_z.divergent
    unc = inner_z.uncertain or mid_z.uncertain

    if math.isinf(q):
        mono = _monotone_kind(inner_z.vals)
        if mono == "nondecreasing":
            # window sup = inner(t): constant inside the s-integral
            mid_cum = prefix_norms(grid, mid_z, r)
            p = 1.0 if math.isinf(r) else r
            vals = mid_cum.vals * inner_z.vals ** p
            lo = mid_cum.lo.times(inner_z.lo.scaled(p))
            hi = mid_cum.hi.times(inner_z.hi.scaled(p))
            return GridFn(vals, lo, hi, None, div or mid_cum.divergent,
                          unc or mid_cum.uncertain)
        if mono == "nonincreasing":
            # window sup = inner(s): fold it into the s-integrand
            out = prefix_norms(grid, combine(mid_z, inner_z), r)
            out.divergent = out.divergent or div
            out.uncertain = out.uncertain or unc
            return out
        vals = np.empty(n)
        mr = mid_z.vals if math.isinf(r) else mid_z.vals ** r
        for k in range(n):
            w = np.maximum.accumulate(inner_z.vals[k::-1])[::-1]
            if math.isinf(r):
                vals[k] = float(np.max(mr[:k + 1] * w))
            else:
                integ = mr[:k + 1] * w ** r
                vals[k] = float(np.sum(panel_integrals(h[:k], integ))) if k else 0.0
        return GridFn(vals, TailModel(known=False), TailModel(known=False),
                      None, div, True)

    iq = prefix_norms(grid, inner_z, q)
    if iq.divergent:
        return GridFn(np.full(n, math.inf), TailModel(known=False),
                      TailModel(known=False), None, True, unc)
    Iq = iq.vals
    win = np.maximum(Iq - Iq[0], 0.0)

    def head_mass(window_pow_r: np.ndarray) -> tuple[np.ndarray, bool, bool]:
        """Mass of the s-integral below the grid (window frozen at the edge)."""
        mq = mid_z.lo.scaled(r)
        edge = float(mid_z.vals[0] ** r)
        base, st = tail_mass(mq, edge, abs(grid.x_lo))
        d = st == "divergent"
        u = st == "uncertain" or inner_z.lo.scaled(q).integrable() != "yes"
        if math.isinf(base):
            return np.full(n, math.inf), d, u
        return base * window_pow_r, d, u

    if math.isinf(r):
        vals = np.empty(n)
        for k in range(n):
            w = np.maximum(Iq[k] - Iq[:k + 1], 0.0) ** (1.0 / q)
            vals[k] = float(np.max(mid_z.vals[:k + 1] * w))
        lo = TailModel(known=False)
        hi = TailModel(known=False)
        return GridFn(vals, lo, hi, None, div, unc)

    if abs(q - r) < 1e-12:
        mr = mid_z.vals ** r
        P0 = prefix_sums(panel_integrals(h, mr))
        P1 = prefix_sums(panel_integrals(h, mr * Iq))
        body = np.maximum(Iq * P0 - P1, 0.0)
        head, d, u = head_mass(win)
        vals = body + head
        div, unc = div or d, unc or u
    else:
        mr = mid_z.vals ** r
        vals = np.empty(n)
        head, d, u = head_mass(win ** (r / q))
        div, unc = div or d, unc or u
        for k in range(n):
            w = np.maximum(Iq[k] - Iq[:k + 1], 0.0) ** (1.0 / q)
            integ = mr[:k + 1] * w ** r
            body = float(np.sum(panel_integrals(h[:k], integ))) if k else 0.0
            vals[k] = body + head[k]
    if div:
        vals = np.full(n, math.inf)
    lo = replace(_primitive_model(mid_z.lo.scaled(r).times(iq.lo.scaled(r / q))),
                 exact=False)
    hi_g = mid_z.hi.scaled(r).times(iq.hi.scaled(r / q))
    hi = TailModel(c=0.0, exact=False) if hi_g.integrable() == "yes" else _growth_model(hi_g)
    return GridFn(vals, lo, hi, None, div, unc)


def middle_upper(grid: Grid, inner_z: GridFn, q: float, mid_z: GridFn, r: float) -> GridFn:
    """M(t) = || mid(s) * || inner ||_{q,(t,s)} ||_{r,(t,inf)} at every node.

    Mirror image of :func:`middle_lower`.
    """
    n = grid.n
    h = grid.h
    div = inner_z.divergent or mid_z.divergent
    unc = inner_z.uncertain or mid_z.uncertain

    if math.isinf(q):
        mono = _monotone_kind(inner_z.vals)
        if mono == "nonincreasing":
            mid_cum = suffix_norms(grid, mid_z, r)
            p = 1.0 if math.isinf(r) else r
            vals = mid_cum.vals * inner_z.vals ** p
            lo = mid_cum.lo.times(inner_z.lo.scaled(p))
            hi = mid_cum.hi.times(inner_z.hi.scaled(p))
            return GridFn(vals, lo, hi, None, div or mid_cum.divergent,
                          unc or mid_cum.uncertain)
        if mono == "nondecreasing":
            out = suffix_norms(grid, combine(mid_z, inner_z), r)
            out.divergent = out.divergent or div
            out.uncertain = out.uncertain or unc
            return out
        vals = np.empty(n)
        mr = mid_z.vals if math.isinf(r) else mid_z.vals ** r
        for k in range(n):
            w = np.maximum.accumulate(inner_z.vals[k:])
            if math.isinf(r):
                vals[k] = float(np.max(mr[k:] * w))
            else:
                integ = mr[k:] * w ** r
                vals[k] = float(np.sum(panel_integrals(h[k:], integ))) if k < n - 1 else 0.0
        return GridFn(vals, TailModel(known=False), TailModel(known=False),
                      None, div, True)

    sq = suffix_norms(grid, inner_z, q)
    if sq.divergent:
        return GridFn(np.full(n, math.inf), TailModel(known=False),
                      TailModel(known=False), None, True, unc)
    Sq = sq.vals
    win = np.maximum(Sq - Sq[-1], 0.0)

    def tail_mass_hi(window_pow_r: np.ndarray) -> tuple[np.ndarray, bool, bool]:
        mq = mid_z.hi.scaled(r)
        edge = float(mid_z.vals[-1] ** r)
        base, st = tail_mass(mq, edge, abs(grid.x_hi))
        d = st == "divergent"
        u = st == "uncertain" or inner_z.hi.scaled(q).integrable() != "yes"
        if math.isinf(base):
            return np.full(n, math.inf), d, u
        return base * window_pow_r, d, u

    if math.isinf(r):
        vals = np.empty(n)
        for k in range(n):
            w = np.maximum(Sq[k] - Sq[k:], 0.0) ** (1.0 / q)
            vals[k] = float(np.max(mid_z.vals[k:] * w))
        return GridFn(vals, TailModel(known=False), TailModel(known=False),
                      None, div, unc)

    if abs(q - r) < 1e-12:
        mr = mid_z.vals ** r
        S0 = suffix_sums(panel_integrals(h, mr))
        S1 = suffix_sums(panel_integrals(h, mr * Sq))
        body = np.maximum(Sq * S0 - S1, 0.0)
        head, d, u = tail_mass_hi(win)
        vals = body + head
        div, unc = div or d, unc or u
    else:
        mr = mid_z.vals ** r
        vals = np.empty(n)
        head, d, u = tail_mass_hi(win ** (r / q))
        div, unc = div or d, unc or u
        for k in range(n):
            w = np.maximum(Sq[k] - Sq[k:], 0.0) ** (1.0 / q)
            integ = mr[k:] * w ** r
            body = float(np.sum(panel_integrals(h[k:], integ))) if k < n - 1 else 0.0
            vals[k] = body + head[k]
    if div:
        vals = np.full(n, math.inf)
    hi = replace(_primitive_model(mid_z.hi.scaled(r).times(sq.hi.scaled(r / q))),
                 exact=False)
    lo_g = mid_z.lo.scaled(r).times(sq.lo.scaled(r / q))
    lo = TailModel(c=0.0, exact=False) if lo_g.integrable() == "yes" else _growth_model(lo_g)
    return GridFn(vals, lo, hi, None, div, unc)


def refine_check(compute, grid: Grid) -> tuple[NormResult, float | str]:
    """Recompute on a doubled grid; return (refined value, relative delta).

    ``compute`` maps a Grid to a NormResult (or float).  Divergent results
    return the string flag 'divergent' in place of a delta.
    """
    v1 = compute(grid)
    v2 = compute(grid.refined())
    a = v1.value if isinstance(v1, NormResult) else float(v1)
    b = v2.value if isinstance(v2, NormResult) else float(v2)
    div1 = isinstance(v1, NormResult) and v1.divergent
    div2 = isinstance(v2, NormResult) and v2.divergent
    if div1 or div2 or not (math.isfinite(a) and math.isfinite(b)):
        return v2 if isinstance(v2, NormResult) else NormResult(b), "divergent"
    delta = abs(b - a) / max(abs(b), 1e-300)
    return v2 if isinstance(v2, NormResult) else NormResult(b), delta
