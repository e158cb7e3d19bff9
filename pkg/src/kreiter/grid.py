"""Geometric evaluation grids and composite quadrature in log coordinates.

All integrals in this package are of the form ``int (t^lam w(t) g(t))^q dt/t``
over subintervals of (0, inf).  Substituting ``x = ln t`` turns them into
plain integrals over the log axis, where the integrands are exponentials
times slowly varying factors.  The grid is uniform in x (plus inserted
breakpoints), and panels are integrated with an exponential-fit rule that is
exact on pure exponentials, i.e. on every monomial integrand.

Grids with a log-range symmetric about t = 1 are built exactly
antisymmetric in x, so that computations mirror bit-for-bit under the
substitution t -> 1/t.  Suffix (from-infinity) passes are defined as the
mirror image of prefix passes for the same reason.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["GridSpec", "Grid", "panel_integrals", "LN10"]

LN10 = float(np.log(10.0))


@dataclass(frozen=True)
class GridSpec:
    """Parameters of the evaluation grid.

    The range is given as powers of ten: the grid spans [10**eps_exp,
    10**t_exp] with ``n`` geometrically spaced points.
    """

    eps_exp: float = -8.0
    t_exp: float = 8.0
    n: int = 4096

    def __post_init__(self) -> None:
        if not self.eps_exp < 0.0 < self.t_exp:
            raise ValueError("grid must satisfy eps < 1 < T")
        if self.n < 64:
            raise ValueError("grid needs at least 64 points")

    def build(self, extra_log_points: tuple[float, ...] = ()) -> "Grid":
        lo = self.eps_exp * LN10
        hi = self.t_exp * LN10
        mid = 0.5 * (lo + hi)
        half_step = (hi - lo) / (self.n - 1)
        # Centered construction: exactly antisymmetric when lo == -hi.
        offsets = (np.arange(self.n) - (self.n - 1) / 2.0) * half_step
        backbone = mid + offsets
        return Grid(backbone=backbone, extras=tuple(sorted(extra_log_points)), spec=self)


@dataclass(frozen=True)
class Grid:
    backbone: np.ndarray
    extras: tuple[float, ...]
    spec: GridSpec
    x: np.ndarray = field(init=False)
    t: np.ndarray = field(init=False)
    h: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        lo, hi = self.backbone[0], self.backbone[-1]
        keep = [p for p in self.extras if lo < p < hi]
        x = np.union1d(self.backbone, np.asarray(keep, dtype=float))
        # Drop points that collide with backbone nodes up to rounding:
        # zero-width panels break the panel rule.
        dx = np.diff(x)
        mask = np.concatenate(([True], dx > 1e-12))
        x = x[mask]
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", np.exp(x))
        object.__setattr__(self, "h", np.diff(x))

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def x_lo(self) -> float:
        return float(self.x[0])

    @property
    def x_hi(self) -> float:
        return float(self.x[-1])

    def with_points(self, pts_log) -> "Grid":
        merged = tuple(sorted(set(self.extras) | {float(p) for p in pts_log}))
        return Grid(backbone=self.backbone, extras=merged, spec=self.spec)

    def refined(self) -> "Grid":
        """Same range and inserted points, doubled backbone density."""
        n2 = 2 * len(self.backbone) - 1
        spec2 = GridSpec(self.spec.eps_exp, self.spec.t_exp, n2)
        return spec2.build(self.extras)

    def index_of(self, x_val: float) -> int:
        k = int(np.searchsorted(self.x, x_val))
        if k < self.n and abs(self.x[k] - x_val) <= 1e-9:
            return k
        if k > 0 and abs(self.x[k - 1] - x_val) <= 1e-9:
            return k - 1
        raise KeyError(f"log-point {x_val} not on grid")


def panel_integrals(h: np.ndarray, y: np.ndarray, panel_const: np.ndarray | None = None) -> np.ndarray:
    """Per-panel integrals of a nonnegative integrand sampled at nodes.

    Uses the exponential-fit rule h*(y1-y0)/(ln y1 - ln y0), which is exact
    when the integrand is a pure exponential in x (every power of t), and
    second order otherwise.  Panels touching a zero value fall back to the
    trapezoid rule.  ``panel_const`` multiplies each panel by a constant
    (used for step-function factors that are constant between inserted
    breakpoints).
    """
    y0 = y[:-1]
    y1 = y[1:]
    both_pos = (y0 > 0.0) & (y1 > 0.0)
    out = np.empty_like(h)
    # Trapezoid fallback (also used when values are equal to rounding).
    out[:] = 0.5 * h * (y0 + y1)
    if np.any(both_pos):
        ly0 = np.log(np.where(both_pos, y0, 1.0))
        ly1 = np.log(np.where(both_pos, y1, 1.0))
        dl = ly1 - ly0
        use = both_pos & (np.abs(dl) > 1e-9)
        if np.any(use):
            out[use] = h[use] * (y1[use] - y0[use]) / dl[use]
    if panel_const is not None:
        out = out * panel_const
    return out


def prefix_sums(panels: np.ndarray, head: float = 0.0) -> np.ndarray:
    """Nodal cumulative integrals from the lower edge (head = tail mass)."""
    out = np.empty(len(panels) + 1)
    out[0] = head
    np.cumsum(panels, out=out[1:])
    if head != 0.0:
        out[1:] += head
    return out


def suffix_sums(panels: np.ndarray, head: float = 0.0) -> np.ndarray:
    """Nodal cumulative integrals from the upper edge, mirror of prefix."""
    return prefix_sums(panels[::-1], head)[::-1]
