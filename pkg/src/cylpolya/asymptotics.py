"""Closed-form results away from the single strip: the geodesic disk's
critical radius on the cylinder, first-eigenvalue thresholds for
S^n x I_h and S^1 x hypercube products, the product necessary/sufficient
conditions, and the isoperimetric area ranges."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .exact import (
    PI,
    Ball,
    DomainError,
    ExactValue,
    atan,
    compare,
    eval_ball,
    gamma_half_integer,
    nth_root_ball,
    rational,
    sign,
    sqrt,
    value_json,
)

__all__ = [
    "BracketError",
    "ArityError",
    "DiskBoundParts",
    "disk_bound_parts",
    "disk_rayleigh_bound",
    "disk_numerator",
    "disk_critical_radius",
    "Threshold",
    "eta1",
    "hypercube_threshold",
    "product_necessary_condition",
    "product_sufficient_condition",
    "AreaRange",
    "isoperimetric_ranges",
]


class BracketError(RuntimeError):
    """The bisection bracket did not have certified opposite signs."""


class ArityError(ValueError):
    """The Cartesian-product sufficient condition needs at least 3 heights."""


# ---------------------------------------------------------------------------
# Geodesic disk D_R on the infinite cylinder (R > pi wraps around)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiskBoundParts:
    """Pieces of the first-eigenvalue test-function bound at radius R."""

    R: ExactValue
    w: ExactValue  # sqrt(R^2 - pi^2)
    numerator: ExactValue  # of the sign expression deciding the conjecture
    denominator: ExactValue  # of the Rayleigh quotient bound
    c1: ExactValue  # 12 pi
    c2: ExactValue  # pi^3 + 6 pi
    c3: ExactValue  # 2 (pi^2 - 3)


def disk_bound_parts(R: ExactValue) -> DiskBoundParts:
    if compare(R, PI) <= 0:
        raise DomainError("the wrapped-disk bound needs R > pi")
    w = sqrt(R * R - PI ** 2)
    arct = atan(PI / w)
    c1 = 12 * PI
    c2 = PI ** 3 + 6 * PI
    c3 = 2 * (PI ** 2 - 3)
    numerator = c1 * w - c2 - c3 * w * arct
    denominator = 6 * (PI * w + R * R * arct)
    return DiskBoundParts(R, w, numerator, denominator, c1, c2, c3)


def disk_rayleigh_bound(R: ExactValue) -> ExactValue:
    """Upper bound on the first Dirichlet eigenvalue of the geodesic disk:
    [pi(6+pi^2)/w + 2(pi^2-3) atan(pi/w)] / (6 [pi w + R^2 atan(pi/w)])."""
    if compare(R, PI) <= 0:
        raise DomainError("the wrapped-disk bound needs R > pi")
    w = sqrt(R * R - PI ** 2)
    arct = atan(PI / w)
    num = PI * (6 + PI ** 2) / w + 2 * (PI ** 2 - 3) * arct
    den = 6 * (PI * w + R * R * arct)
    return num / den


def disk_numerator(R: ExactValue) -> ExactValue:
    """Sign expression whose positivity makes the conjecture fail at D_R:
    pi (12 w - pi^2 - 6) - 2 (pi^2 - 3) w atan(pi/w), w = sqrt(R^2-pi^2)."""
    return disk_bound_parts(R).numerator


def disk_critical_radius(
    tol: Fraction = Fraction(1, 100000),
    bracket: Tuple[Fraction, Fraction] = (Fraction(16, 5), Fraction(9, 2)),
) -> Tuple[ExactValue, ExactValue]:
    """Certified bisection enclosure of the radius where the disk bound
    changes sign; above it the conjecture fails via the first eigenvalue.

    The bracket's opposite signs are certified at runtime, not assumed.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = bracket
    s_lo = sign(disk_numerator(rational(lo)))
    s_hi = sign(disk_numerator(rational(hi)))
    if not (s_lo < 0 < s_hi):
        raise BracketError(
            f"bracket [{lo}, {hi}] signs ({s_lo}, {s_hi}) do not oppose"
        )
    while hi - lo > tol:
        mid = (lo + hi) / 2
        s = sign(disk_numerator(rational(mid)))
        if s == 0:  # pragma: no cover - rational root would be a miracle
            return rational(mid), rational(mid)
        if s < 0:
            lo = mid
        else:
            hi = mid
    return rational(lo), rational(hi)


# ---------------------------------------------------------------------------
# First-eigenvalue thresholds in higher dimensions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Threshold:
    """Height threshold above which the conjecture fails via lambda_1.

    ``exact`` is populated whenever the closed form stays inside the
    expression grammar (always for the hypercube, n <= 2 for the sphere);
    otherwise ``enclosure`` delivers the certified value: the n-th root is
    taken in ball arithmetic from the exact inner value (pi/2)^n * base.
    """

    n: int
    expression: str
    exact: Optional[ExactValue] = None
    _root_inner: Optional[ExactValue] = None
    _root_degree: int = 1

    def enclosure(self, precision_bits: int = 128) -> Ball:
        if self.exact is not None:
            return eval_ball(self.exact, precision_bits)
        return nth_root_ball(self._root_inner, self._root_degree, precision_bits)

    def to_json(self, precision_bits: int = 128) -> dict:
        ball = self.enclosure(precision_bits)
        out = {"n": self.n, "expression": self.expression}
        if self.exact is not None:
            out.update(value_json(self.exact))
        else:
            out["decimal30"] = None
        out["enclosure_center"] = str(ball.center)
        out["enclosure_radius"] = str(ball.radius)
        return out


def eta1(n: int) -> Threshold:
    """(pi/2) (pi (n+1) / (2 Gamma((n+3)/2)^2))^(1/n) for S^n x I_h."""
    if n < 1:
        raise ValueError("n must be >= 1")
    gamma = gamma_half_integer(n + 3)
    base = PI * (n + 1) / (2 * gamma * gamma)
    expression = f"(pi/2) * (pi*(n+1)/(2*Gamma((n+3)/2)^2))^(1/{n}) at n={n}"
    if n == 1:
        return Threshold(1, expression, exact=(PI / 2) * base)
    if n == 2:
        return Threshold(2, expression, exact=(PI / 2) * sqrt(base))
    inner = (PI / 2) ** n * base
    return Threshold(n, expression, _root_inner=inner, _root_degree=n)


def hypercube_threshold(n: int) -> Threshold:
    """n^((n+1)/2) pi^((n+3)/2) / (2^n Gamma((n+3)/2)) for S^1 x (I_h)^n;
    always exact (half powers are square roots of integer powers)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    gamma = gamma_half_integer(n + 3)
    if n % 2 == 1:
        n_pow = rational(Fraction(n) ** ((n + 1) // 2))
        pi_pow = PI ** ((n + 3) // 2)
    else:
        n_pow = rational(Fraction(n) ** (n // 2)) * sqrt(rational(n))
        pi_pow = PI ** ((n + 2) // 2) * sqrt(PI)
    value = n_pow * pi_pow / (rational(Fraction(2) ** n) * gamma)
    expression = f"n^((n+1)/2) pi^((n+3)/2) / (2^n Gamma((n+3)/2)) at n={n}"
    return Threshold(n, expression, exact=value)


def product_necessary_condition(heights: Sequence[ExactValue]) -> bool:
    """Whether (sqrt(pi)/2)(2 pi / Gamma((n+3)/2))^(1/(n+1)) >=
    (sum h_i^-2)^(-1/2) (prod h_i)^(-1/(n+1)); False certifies failure of
    the conjecture via the first eigenvalue.

    Decided exactly by comparing the 2(n+1)-th powers, which stay inside
    the expression grammar (so boundary equality is handled, not
    Undecided)."""
    n = len(heights)
    if n < 1:
        raise ValueError("need at least one height")
    for h in heights:
        if sign(h) <= 0:
            raise ValueError("heights must be positive")
    gamma = gamma_half_integer(n + 3)
    # lhs^(2(n+1)) = (pi/4)^(n+1) (2 pi / Gamma)^2
    lhs_pow = (PI / 4) ** (n + 1) * (2 * PI / gamma) ** 2
    inv_sq_sum = rational(0)
    prod = rational(1)
    for h in heights:
        inv_sq_sum = inv_sq_sum + 1 / (h * h)
        prod = prod * h
    # rhs^(2(n+1)) = (sum h^-2)^-(n+1) (prod h)^-2
    rhs_pow = 1 / (inv_sq_sum ** (n + 1) * prod ** 2)
    return compare(lhs_pow, rhs_pow) >= 0


def product_sufficient_condition(heights: Sequence[ExactValue]) -> bool:
    """True iff min(h_i) <= pi^2, which (for n >= 3 factors) settles the
    conjecture for S^1 x prod I_{h_i} by the Cartesian-product argument
    from the averaged inequalities; False asserts nothing."""
    if len(heights) < 3:
        raise ArityError("the product argument needs at least 3 heights")
    smallest = heights[0]
    for h in heights[1:]:
        if compare(h, smallest) < 0:
            smallest = h
    return compare(smallest, PI ** 2) <= 0


# ---------------------------------------------------------------------------
# Isoperimetric area ranges on the infinite cylinder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AreaRange:
    lo: ExactValue
    hi: ExactValue
    lo_closed: bool
    hi_closed: bool

    def to_json(self) -> dict:
        return {
            "lo": value_json(self.lo),
            "hi": value_json(self.hi),
            "lo_closed": self.lo_closed,
            "hi_closed": self.hi_closed,
        }


def isoperimetric_ranges() -> List[AreaRange]:
    """Area ranges whose isoperimetric domains satisfy the conjecture:
    the strip windows scaled by the circumference 2 pi, capped at pi^3."""
    two_pi = 2 * PI
    lo8 = rational(8) - sqrt(rational(64) - 4 * PI ** 2)
    hi8 = rational(2) + sqrt(rational(4) - PI ** 2 / 4)
    lo13 = rational(13) - sqrt(rational(169) - 9 * PI ** 2)
    hi13 = rational(Fraction(13, 4)) + sqrt(rational(Fraction(169, 16)) - PI ** 2)
    return [
        AreaRange(rational(0), two_pi * lo8, False, True),
        AreaRange(two_pi * hi8, two_pi * lo13, True, True),
        AreaRange(two_pi * hi13, PI ** 3, True, True),
    ]
