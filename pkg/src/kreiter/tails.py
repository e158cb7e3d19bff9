"""Asymptotic tail models for integrands on the logarithmic axis.

Every integrand handled by the quadrature engine is, near either end of the
log axis, of the shape

    phi(x) ~ C * exp(c*x) * (1 + |x|)**a * (1 + log(1 + |x|))**b,

where x = ln t.  Power weights contribute to c, slowly varying weights and
cumulative norms contribute to (a, b).  A ``TailModel`` records the triple
for one end together with whether the shape is exact (true for the basis
weights, which equal their model identically, and for K-profiles outside
their breakpoint range) or only asymptotic.

``tail_mass`` turns a model plus the integrand value at the grid edge into
the integral over the un-gridded tail; ``sup_tail_behaviour`` does the same
for sup-norms.  Divergent tails are reported, never silently truncated.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
import math

from scipy.integrate import quad

__all__ = [
    "TailModel",
    "UNKNOWN_TAIL",
    "ZERO_TAIL",
    "tail_mass",
    "sup_tail_behaviour",
    "tail_factor",
]


@dataclass(frozen=True)
class TailModel:
    """Shape of an integrand toward one end of the log axis.

    ``c`` is the exponential rate *outward* (into the tail): c < 0 means the
    integrand decays as the tail is entered, regardless of which end it is.
    ``a`` and ``b`` are the (1+|x|) and iterated-log exponents.  ``exact``
    marks shapes that hold identically, not just asymptotically.  ``known``
    is False when asymptotics could not be determined (opaque integrand).
    ``zero`` marks integrands that vanish identically in the tail.
    """

    c: float = 0.0
    a: float = 0.0
    b: float = 0.0
    exact: bool = False
    known: bool = True
    zero: bool = False

    def scaled(self, q: float) -> "TailModel":
        """Model of phi**q."""
        if not self.known or self.zero:
            return self
        return replace(self, c=q * self.c, a=q * self.a, b=q * self.b)

    def times(self, other: "TailModel") -> "TailModel":
        if self.zero or other.zero:
            return ZERO_TAIL
        if not (self.known and other.known):
            return UNKNOWN_TAIL
        return TailModel(
            c=self.c + other.c,
            a=self.a + other.a,
            b=self.b + other.b,
            exact=self.exact and other.exact,
        )

    # Convergence of the integral of this shape over the infinite tail.
    def integrable(self) -> str:
        """'yes' | 'no' | 'unknown' for the tail integral of this shape."""
        if self.zero:
            return "yes"
        if not self.known:
            return "unknown"
        if self.c < 0.0:
            return "yes"
        if self.c > 0.0:
            return "no"
        if self.a < -1.0:
            return "yes"
        if self.a > -1.0:
            return "no"
        # a == -1 exactly: the iterated-log exponent decides
        if self.b < -1.0:
            return "yes"
        return "no"

    def sup_bounded(self) -> str:
        """'yes' | 'no' | 'unknown' for sup of the shape over the tail."""
        if self.zero:
            return "yes"
        if not self.known:
            return "unknown"
        if self.c < 0.0:
            return "yes"
        if self.c > 0.0:
            return "no"
        if self.a < 0.0:
            return "yes"
        if self.a > 0.0:
            return "no"
        return "yes" if self.b <= 0.0 else "no"


UNKNOWN_TAIL = TailModel(known=False)
ZERO_TAIL = TailModel(zero=True, exact=True)


@lru_cache(maxsize=65536)
def tail_factor(c: float, a: float, b: float, absx0: float) -> float:
    """Integral of the normalized model shape over the tail.

    Computes ``int_0^inf exp(c*s) * R(s)**a * L(s)**b ds`` with
    ``R(s) = (1+absx0+s)/(1+absx0)`` and
    ``L(s) = (1+log(1+absx0+s))/(1+log(1+absx0))``,
    so that (tail integral) = phi(edge) * tail_factor.  Requires a
    convergent shape; callers must check ``integrable()`` first.
    """
    if c > 0.0 or (c == 0.0 and a >= -1.0):
        raise ValueError("divergent tail shape")
    u0 = 1.0 + absx0
    l0 = 1.0 + math.log(u0)

    def shape(s: float) -> float:
        u = u0 + s
        val = c * s + a * (math.log(u) - math.log(u0))
        if b != 0.0:
            val += b * (math.log1p(math.log(u)) - math.log(l0))
        return math.exp(val)

    if c < 0.0:
        # Exponential decay: integrate on a few e-folding windows.
        scale = 1.0 / -c
        total = 0.0
        lo = 0.0
        for k in range(1, 40):
            hi = k * 8.0 * scale
            part, _ = quad(shape, lo, hi, limit=200)
            total += part
            if abs(part) <= 1e-14 * max(total, 1e-300):
                break
            lo = hi
        return total
    # c == 0, a < -1: polynomial decay in (1+x); substitute u = u0 + s.
    # int_{u0}^inf (u/u0)**a * (L(u)/l0)**b du
    def shape_u(u: float) -> float:
        val = a * (math.log(u) - math.log(u0))
        if b != 0.0:
            val += b * (math.log1p(math.log(u)) - math.log(l0))
        return math.exp(val)

    total = 0.0
    lo = u0
    for _ in range(200):
        hi = lo * 4.0
        part, _ = quad(shape_u, lo, hi, limit=200)
        total += part
        if part <= 1e-13 * max(total, 1e-300):
            break
        lo = hi
    return total


def tail_mass(model: TailModel, edge_value: float, absx0: float) -> tuple[float, str]:
    """Integral of the integrand over the un-gridded tail.

    Returns ``(mass, status)`` with status one of 'ok', 'divergent',
    'uncertain'.  'uncertain' masses are still returned (best effort) but a
    caller should surface the flag.
    """
    if model.zero or edge_value == 0.0:
        return 0.0, "ok"
    verdict = model.integrable()
    if verdict == "no":
        return math.inf, "divergent"
    if verdict == "unknown":
        return 0.0, "uncertain"
    mass = edge_value * tail_factor(model.c, model.a, model.b, absx0)
    return mass, "ok" if model.exact else "inexact"


def sup_tail_behaviour(model: TailModel, edge_value: float) -> tuple[float, str]:
    """Sup of the integrand over the un-gridded tail (for q = infinity).

    For bounded non-growing shapes the sup is attained at (or before) the
    edge, so the edge value is an upper bound already counted by the grid
    maximum; only growth matters here.
    """
    if model.zero or edge_value == 0.0:
        return 0.0, "ok"
    verdict = model.sup_bounded()
    if verdict == "no":
        return math.inf, "divergent"
    if verdict == "unknown":
        return edge_value, "uncertain"
    return edge_value, "ok" if model.exact else "inexact"
