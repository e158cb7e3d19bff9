"""K-functional profiles.

For the couple (L1, Linf) the K-functional of a simple function is the
integral of its non-increasing rearrangement, an exact piecewise-linear
concave function; no quadrature is involved.  Synthetic quasi-concave
profiles extend coverage beyond that couple.

Profiles are exact outside their breakpoint range: linear (K = c*t) below
the first breakpoint and constant above the last.  These two constants are
what the tail machinery of the norm engine consumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, GridSpec

__all__ = [
    "SimpleFunction",
    "StepStar",
    "KProfile",
    "rearrange",
    "k_l1_linf",
    "f_star_star",
    "synthetic_k",
    "quasi_concave_check",
    "random_simple_functions",
]


@dataclass(frozen=True)
class SimpleFunction:
    """A mu-simple function: finitely many positive values on finite measure."""

    pairs: tuple[tuple[float, float], ...]  # (value, measure)

    def __post_init__(self) -> None:
        if not self.pairs:
            raise ValueError("simple function needs at least one (value, measure) pair")
        for v, m in self.pairs:
            if not (v > 0.0 and np.isfinite(v) and m > 0.0 and np.isfinite(m)):
                raise ValueError("values and measures must be positive and finite")

    def scaled(self, lam: float) -> "SimpleFunction":
        return SimpleFunction(tuple((lam * v, m) for v, m in self.pairs))


@dataclass(frozen=True)
class StepStar:
    """Non-increasing rearrangement as a right-continuous step function.

    f*(s) = values[k] on (breaks[k], breaks[k+1]] with breaks[0] = 0; zero
    beyond the final breakpoint.
    """

    breaks: np.ndarray   # strictly increasing, breaks[0] > 0 is the first jump
    values: np.ndarray   # strictly decreasing positive step heights

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=float)
        idx = np.searchsorted(self.breaks, s_arr, side="left")
        padded = np.concatenate((self.values, [0.0]))
        out = padded[idx]
        return float(out) if np.isscalar(s) else out

    @property
    def total_mass(self) -> float:
        widths = np.diff(np.concatenate(([0.0], self.breaks)))
        return float(np.sum(widths * self.values))


def rearrange(f: SimpleFunction) -> StepStar:
    """Sort by value descending, merge equal values, accumulate measures."""
    vals = np.array([v for v, _ in f.pairs])
    meas = np.array([m for _, m in f.pairs])
    order = np.argsort(-vals, kind="stable")
    vals, meas = vals[order], meas[order]
    out_v, out_m = [], []
    for v, m in zip(vals, meas):
        if out_v and v == out_v[-1]:
            out_m[-1] += m
        else:
            out_v.append(v)
            out_m.append(m)
    breaks = np.cumsum(out_m)
    return StepStar(breaks=breaks, values=np.array(out_v))


class KProfile:
    """A quasi-concave map t -> K(t) with exact behavior outside its core.

    ``slope0``: the exact limit of K(t)/t as t -> 0 (may be inf for
    synthetic profiles unbounded there, never for rearrangement profiles).
    ``limit_inf``: the exact limit of K(t) as t -> inf.
    """

    def __init__(self, eval_log, slope0: float, limit_inf: float,
                 breakpoints_log: np.ndarray, provenance: str):
        self._eval_log = eval_log
        self.slope0 = float(slope0)
        self.limit_inf = float(limit_inf)
        self.breakpoints_log = np.asarray(breakpoints_log, dtype=float)
        self.provenance = provenance

    def eval_log(self, x):
        return self._eval_log(np.asarray(x, dtype=float))

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = self.eval_log(np.log(t_arr))
        return float(out) if np.isscalar(t) else out

    def scaled(self, lam: float) -> "KProfile":
        if not lam > 0.0:
            raise ValueError("profile scaling must be positive")
        base = self._eval_log
        return KProfile(lambda x: lam * base(x), lam * self.slope0,
                        lam * self.limit_inf, self.breakpoints_log,
                        self.provenance)

    def reflected(self) -> "KProfile":
        """The profile t -> t * K(1/t) (the reversed-couple K-functional)."""
        base = self._eval_log

        def ev(x):
            return np.exp(x) * base(-x)

        return KProfile(ev, slope0=self.limit_inf, limit_inf=self.slope0,
                        breakpoints_log=np.sort(-self.breakpoints_log),
                        provenance=self.provenance + "-reflected")


def k_l1_linf(star: StepStar, t=None):
    """K(t) for the couple (L1, Linf): the running integral of f*.

    With ``t`` given, evaluates there (exact piecewise-linear form); without
    it, returns the KProfile object.
    """
    breaks = np.concatenate(([0.0], star.breaks))
    seg = np.diff(breaks) * star.values
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    total = float(cum[-1])
    padded_vals = np.concatenate((star.values, [0.0]))

    def val(tt):
        tt = np.asarray(tt, dtype=float)
        idx = np.clip(np.searchsorted(breaks, tt, side="right") - 1, 0, len(seg))
        base = cum[idx]
        width = tt - breaks[idx]
        slope = padded_vals[np.minimum(idx, len(padded_vals) - 1)]
        return np.minimum(base + width * slope, total)

    if t is not None:
        out = val(t)
        return float(out) if np.isscalar(t) else out

    def ev_log(x):
        return val(np.exp(x))

    return KProfile(ev_log, slope0=float(star.values[0]), limit_inf=total,
                    breakpoints_log=np.log(star.breaks),
                    provenance="exact-L1-Linf")


def f_star_star(star: StepStar, t):
    """Maximal function: the running average of f*, i.e. K(t)/t."""
    k = k_l1_linf(star, t)
    t_arr = np.asarray(t, dtype=float)
    out = np.asarray(k) / t_arr
    return float(out) if np.isscalar(t) else out


def synthetic_k(theta: float = None, weight=None, breakpoint_profile=None,
                spec: GridSpec | None = None) -> KProfile:
    """Quasi-concave profile from a shape candidate t^theta * a(t).

    The candidate is swept into the quasi-concave envelope on the grid (one
    pass enforcing monotonicity of K, one enforcing monotonicity of K/t)
    and extended exactly by a linear piece below and a constant above.
    """
    spec = spec or GridSpec()
    grid = spec.build()
    x = grid.x
    if breakpoint_profile is not None:
        pts = np.asarray(breakpoint_profile, dtype=float)
        cand = np.interp(x, np.log(pts[:, 0]), pts[:, 1])
    else:
        if not 0.0 <= theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        w = np.ones_like(x) if weight is None else weight.eval_log(x)
        cand = np.exp(theta * x) * w
    if not np.all(cand > 0.0):
        raise ValueError("degenerate profile: candidate must be positive")
    k = np.maximum.accumulate(cand)
    ratio = np.minimum.accumulate(k / np.exp(x))
    k = ratio * np.exp(x)
    xs, ks = x.copy(), k.copy()
    slope0 = float(ks[0] / np.exp(xs[0]))
    limit_inf = float(ks[-1])

    def ev(xx):
        xx = np.asarray(xx, dtype=float)
        out = np.interp(xx, xs, ks)
        lo = xx < xs[0]
        hi = xx > xs[-1]
        if np.any(lo):
            out = np.where(lo, slope0 * np.exp(xx), out)
        if np.any(hi):
            out = np.where(hi, limit_inf, out)
        return out

    return KProfile(ev, slope0=slope0, limit_inf=limit_inf,
                    breakpoints_log=np.array([]), provenance="synthetic")


@dataclass
class QuasiConcaveReport:
    passed: bool
    worst_monotone: float      # most negative forward step of K (relative)
    worst_ratio: float         # most positive forward step of K/t (relative)
    doubling: float            # max K(2t)/K(t) observed

    def __repr__(self):
        return (f"QuasiConcaveReport(passed={self.passed}, "
                f"worst_monotone={self.worst_monotone:.3g}, "
                f"worst_ratio={self.worst_ratio:.3g}, doubling={self.doubling:.3g})")


def quasi_concave_check(profile: KProfile, spec: GridSpec | None = None,
                        tol: float = 1e-9) -> QuasiConcaveReport:
    """Grid check of K nondecreasing, K/t nonincreasing, K(2t) <= 2 K(t)."""
    spec = spec or GridSpec()
    grid = spec.build(tuple(profile.breakpoints_log))
    k = profile.eval_log(grid.x)
    if np.any(k < 0.0):
        return QuasiConcaveReport(False, -np.inf, np.inf, np.inf)
    dk = np.diff(k) / np.maximum(k[:-1], 1e-300)
    ratio = k / grid.t
    dr = np.diff(ratio) / np.maximum(ratio[:-1], 1e-300)
    k2 = profile.eval_log(grid.x + np.log(2.0))
    doubling = float(np.max(k2 / np.maximum(k, 1e-300)))
    worst_m = float(np.min(dk)) if len(dk) else 0.0
    worst_r = float(np.max(dr)) if len(dr) else 0.0
    passed = worst_m >= -tol and worst_r <= tol and doubling <= 2.0 + 1e-9
    return QuasiConcaveReport(passed, worst_m, worst_r, doubling)


def random_simple_functions(seed: int, count: int, min_steps: int = 3,
                            max_steps: int = 40) -> list[SimpleFunction]:
    """Seeded test family: values and measures log-uniform in [1e-4, 1e4]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(min_steps, max_steps + 1))
        vals = 10.0 ** rng.uniform(-4.0, 4.0, size=n)
        meas = 10.0 ** rng.uniform(-4.0, 4.0, size=n)
        out.append(SimpleFunction(tuple(zip(vals.tolist(), meas.tolist()))))
    return out
