"""Exact-value expression kernel with certified enclosure arithmetic.

Every numeric decision in the package routes through this module.  Values
are closed-form expressions over arbitrary-precision rationals, pi, square
roots and arctangents, kept in a normal form (sums of monomials over
irrational atoms, divided by a like denominator when a quotient cannot be
rationalized away).  Decisions come in two flavours:

* structural -- two values with equal normal forms are equal, full stop;
* certified numeric -- an adaptive-precision ladder of rigorous interval
  enclosures (MPFR with directed rounding, via gmpy2) refines until the
  enclosures separate.

A comparison that neither separates under the precision ladder nor closes
structurally raises ``Undecided`` instead of guessing.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Union

import gmpy2
from gmpy2 import mpfr, mpq

__all__ = [
    "Ball",
    "DomainError",
    "Undecided",
    "CertificateFailure",
    "ExactValue",
    "PI",
    "ZERO",
    "ONE",
    "rational",
    "sqrt",
    "atan",
    "compare",
    "sign",
    "canonicalize",
    "eval_ball",
    "quadratic_pi_surd",
    "gamma_half_integer",
    "parse_exact",
    "decimal_str",
    "to_prefix",
    "value_json",
    "nth_root_ball",
    "exp_ball",
    "DEFAULT_PRECISION_CAP",
]

DEFAULT_PRECISION_CAP = 4096
_precision_cap = DEFAULT_PRECISION_CAP

Rat = Union[int, Fraction]


def configure_precision_cap(bits: int) -> None:
    """Set the process-wide comparison-ladder cap (>= 256 bits)."""
    global _precision_cap
    if bits < 256:
        raise ValueError("precision cap must be >= 256 bits")
    _precision_cap = bits


def precision_cap() -> int:
    return _precision_cap


class DomainError(ValueError):
    """Construction would leave the supported domain (sqrt of a negative
    value, division by zero, arctan of a non-positive argument)."""


class Undecided(ArithmeticError):
    """The comparison ladder hit the precision cap without separating and
    without structural equality.  Signals a potential algebraic coincidence
    that needs manual review; never silently tie-broken."""


class CertificateFailure(RuntimeError):
    """A runtime certification that the verification logic relies on did
    not hold; the computation must abort loudly."""


# ---------------------------------------------------------------------------
# Directed-rounding interval layer (private)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _ctx_pair(prec: int):
    down = gmpy2.context(precision=prec, round=gmpy2.RoundDown)
    up = gmpy2.context(precision=prec, round=gmpy2.RoundUp)
    return down, up


def _iv_const(q: Fraction, prec: int):
    d, u = _ctx_pair(prec)
    m = mpq(q.numerator, q.denominator)
    return d.add(mpfr(0), m), u.add(mpfr(0), m)


def _iv_pi(prec: int):
    d, u = _ctx_pair(prec)
    return d.const_pi(), u.const_pi()


def _iv_add(x, y, prec: int):
    d, u = _ctx_pair(prec)
    return d.add(x[0], y[0]), u.add(x[1], y[1])


def _iv_sub(x, y, prec: int):
    d, u = _ctx_pair(prec)
    return d.sub(x[0], y[1]), u.sub(x[1], y[0])


def _iv_neg(x):
    return -x[1], -x[0]


def _iv_finite(x) -> bool:
    return gmpy2.is_finite(x[0]) and gmpy2.is_finite(x[1])


def _iv_full_line():
    return mpfr("-inf"), mpfr("inf")


def _iv_mul(x, y, prec: int):
    if not (_iv_finite(x) and _iv_finite(y)):
        return _iv_full_line()
    d, u = _ctx_pair(prec)
    xl, xh = x
    yl, yh = y
    lo = min(d.mul(xl, yl), d.mul(xl, yh), d.mul(xh, yl), d.mul(xh, yh))
    hi = max(u.mul(xl, yl), u.mul(xl, yh), u.mul(xh, yl), u.mul(xh, yh))
    return lo, hi


def _iv_mul_rat(x, q: Fraction, prec: int):
    d, u = _ctx_pair(prec)
    m = mpq(q.numerator, q.denominator)
    if q >= 0:
        return d.mul(x[0], m), u.mul(x[1], m)
    return d.mul(x[1], m), u.mul(x[0], m)


def _iv_div(x, y, prec: int):
    if not (_iv_finite(x) and _iv_finite(y)):
        return _iv_full_line()
    d, u = _ctx_pair(prec)
    yl, yh = y
    if yl <= 0 <= yh:
        # Denominator enclosure straddles zero: the enclosure degenerates to
        # the whole line (eval must always succeed; the ladder refines).
        return _iv_full_line()
    xl, xh = x
    lo = min(d.div(xl, yl), d.div(xl, yh), d.div(xh, yl), d.div(xh, yh))
    hi = max(u.div(xl, yl), u.div(xl, yh), u.div(xh, yl), u.div(xh, yh))
    return lo, hi


def _iv_sqrt(x, prec: int):
    d, u = _ctx_pair(prec)
    xl, xh = x
    if xh < 0:
        raise DomainError("sqrt of an enclosure that is entirely negative")
    if xl < 0:
        xl = mpfr(0)
    return d.sqrt(xl), u.sqrt(xh)


def _iv_atan(x, prec: int):
    d, u = _ctx_pair(prec)
    return d.atan(x[0]), u.atan(x[1])


def _iv_pow(x, e: int, prec: int):
    if e == 0:
        return mpfr(1), mpfr(1)
    if not _iv_finite(x):
        return _iv_full_line()
    if e < 0:
        return _iv_div((mpfr(1), mpfr(1)), _iv_pow(x, -e, prec), prec)
    d, u = _ctx_pair(prec)
    xl, xh = x
    if e % 2 == 1 or xl >= 0:
        return d.pow(xl, e), u.pow(xh, e)
    if xh <= 0:
        return d.pow(xh, e), u.pow(xl, e)
    # even power of an interval straddling zero
    return mpfr(0), max(u.pow(-xl, e), u.pow(xh, e))


# ---------------------------------------------------------------------------
# Ball: the public enclosure object
# ---------------------------------------------------------------------------


class Ball:
    """Certified enclosure: the true value lies in [center-radius, center+radius]."""

    __slots__ = ("center", "radius", "precision_bits", "_lo", "_hi")

    def __init__(self, lo, hi, precision_bits: int):
        d, u = _ctx_pair(precision_bits)
        if not (gmpy2.is_finite(lo) and gmpy2.is_finite(hi)):
            mid = mpfr(0)
            rad = mpfr("inf")
        else:
            mid = d.div(d.add(lo, hi), mpfr(2))
            rad = max(u.sub(mid, lo), u.sub(hi, mid))
        self.center = mid
        self.radius = rad
        self.precision_bits = precision_bits
        self._lo = lo
        self._hi = hi

    @property
    def lower(self):
        return self._lo

    @property
    def upper(self):
        return self._hi

    def contains(self, q: Rat) -> bool:
        m = mpq(Fraction(q).numerator, Fraction(q).denominator)
        return self._lo <= m <= self._hi

    def __repr__(self):
        return f"Ball({self.center!r} +/- {self.radius!r} @{self.precision_bits}b)"


# ---------------------------------------------------------------------------
# Atoms and monomials
#
# Normal form: an ExactValue is a quotient num/den of "combos".  A combo is
# a finite sum  sum_i c_i * prod_j atom_j^{e_ij}  with rational c_i and
# atoms drawn from {pi, sqrt(combo), atan(value)}.  Keys are content-derived
# so structurally identical values collide regardless of construction route.
# ---------------------------------------------------------------------------

_PI_KEY = ("pi",)

_ATOMS: dict = {}  # key -> _Atom; append-only registry


class _Atom:
    __slots__ = ("key", "kind", "payload", "_iv_cache")

    def __init__(self, key, kind, payload):
        self.key = key
        self.kind = kind  # "pi" | "sqrt" | "atan"
        self.payload = payload  # None | combo | ExactValue
        self._iv_cache = {}

    def interval(self, prec: int):
        got = self._iv_cache.get(prec)
        if got is not None:
            return got
        if self.kind == "pi":
            iv = _iv_pi(prec)
        elif self.kind == "sqrt":
            iv = _iv_sqrt(_combo_interval(self.payload, prec), prec)
        else:  # atan
            iv = _iv_atan(self.payload._interval(prec), prec)
        self._iv_cache[prec] = iv
        return iv


def _get_atom(key, kind, payload) -> _Atom:
    atom = _ATOMS.get(key)
    if atom is None:
        atom = _Atom(key, kind, payload)
        _ATOMS[key] = atom
    return atom


_PI_ATOM = _get_atom(_PI_KEY, "pi", None)

# A combo is a dict {monomial: Fraction}; a monomial is a sorted tuple of
# (atom_key, exponent) pairs.  The empty monomial is the rational term.

_ONE_MONO = ()


def _combo_rat(q: Fraction) -> dict:
    return {} if q == 0 else {_ONE_MONO: q}


_C_ZERO: dict = {}
_C_ONE = _combo_rat(Fraction(1))


def _combo_key(c: dict):
    return tuple(
        sorted((m, (f.numerator, f.denominator)) for m, f in c.items())
    )


def _combo_add(a: dict, b: dict) -> dict:
    if not a:
        return dict(b)
    out = dict(a)
    for m, f in b.items():
        g = out.get(m)
        if g is None:
            out[m] = f
        else:
            s = g + f
            if s:
                out[m] = s
            else:
                del out[m]
    return out


def _combo_neg(a: dict) -> dict:
    return {m: -f for m, f in a.items()}


def _combo_scale(a: dict, q: Fraction) -> dict:
    if q == 0:
        return {}
    return {m: f * q for m, f in a.items()}


def _mono_mul(m1, m2):
    """Multiply two monomials; fold (sqrt R)^2 -> R multiplications out."""
    powers: dict = {}
    for mono in (m1, m2):
        for k, e in mono:
            powers[k] = powers.get(k, 0) + e
    extra: list = []  # combos to multiply in, from even sqrt powers
    items = []
    for k, e in sorted(powers.items()):
        if e == 0:
            continue
        if k[0] == "sqrt" and abs(e) >= 2:
            q, r = divmod(e, 2)
            # (sqrt R)^(2q+r) = R^q * (sqrt R)^r
            extra.append((k, q))
            if r:
                items.append((k, r))
        else:
            items.append((k, e))
    return tuple(items), extra


def _combo_mul(a: dict, b: dict) -> dict:
    if not a or not b:
        return {}
    out: dict = {}
    pending: list = []  # (combo_power_key, q_exponent, partial_combo)
    for m1, f1 in a.items():
        for m2, f2 in b.items():
            mono, extra = _mono_mul(m1, m2)
            coeff = f1 * f2
            if extra:
                # rebuild the term as coeff * mono * prod R^q
                term = {mono: coeff}
                for k, q in extra:
                    radic = _ATOMS[k].payload
                    pw = _combo_pow_int(radic, q)
                    term = _combo_mul(term, pw)
                for m, f in term.items():
                    g = out.get(m)
                    s = f if g is None else g + f
                    if s:
                        out[m] = s
                    elif g is not None:
                        del out[m]
            else:
                g = out.get(mono)
                s = coeff if g is None else g + coeff
                if s:
                    out[mono] = s
                elif g is not None:
                    del out[mono]
    return out


def _combo_pow_int(a: dict, e: int) -> dict:
    if e == 0:
        return dict(_C_ONE)
    if e < 0:
        raise ValueError("negative combo power")
    out = dict(_C_ONE)
    base = a
    while e:
        if e & 1:
            out = _combo_mul(out, base)
        e >>= 1
        if e:
            base = _combo_mul(base, base)
    return out


def _combo_interval(c: dict, prec: int):
    total = _iv_const(Fraction(0), prec)
    for mono, coeff in sorted(c.items()):
        term = None
        for k, e in mono:
            atom_iv = _ATOMS[k].interval(prec)
            piece = _iv_pow(atom_iv, e, prec) if e != 1 else atom_iv
            term = piece if term is None else _iv_mul(term, piece, prec)
        if term is None:
            term = _iv_const(coeff, prec)
        else:
            term = _iv_mul_rat(term, coeff, prec)
        total = _iv_add(total, term, prec)
    return total


def _combo_content(c: dict) -> Fraction:
    """Positive rational g with c = g * (primitive integer combo)."""
    if not c:
        return Fraction(1)
    num_gcd = 0
    den_lcm = 1
    for f in c.values():
        num_gcd = math.gcd(num_gcd, abs(f.numerator))
        den_lcm = den_lcm * f.denominator // math.gcd(den_lcm, f.denominator)
    return Fraction(num_gcd, den_lcm)


def _leading_sign(c: dict) -> int:
    if not c:
        return 0
    key = min(c)
    return 1 if c[key] > 0 else -1


@lru_cache(maxsize=4096)
def _square_free_split(n: int):
    """n = s^2 * t with t squarefree.  Trial division; bails out (s=1) for
    inputs too large to factor cheaply -- uniqueness of the canonical form
    is only needed for the small radicands the searches produce."""
    if n <= 0:
        raise ValueError("positive integer required")
    if n > 10**14:
        return 1, n
    s, t = 1, 1
    m = n
    p = 2
    while p * p <= m:
        if p > 10**6:
            return s, t * m
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            s *= p ** (e // 2)
            if e % 2:
                t *= p
        p += 1 if p == 2 else 2
    return s, t * m


def _sqrt_rational(q: Fraction):
    """sqrt(q) for q > 0 -> (coeff, radicand) with radicand squarefree int
    fraction; radicand == 1 means the root is exact."""
    sn, tn = _square_free_split(q.numerator)
    sd, td = _square_free_split(q.denominator)
    # sqrt(num/den) = sqrt(num*den)/den
    coeff = Fraction(sn * sd, q.denominator * 1)
    rad = Fraction(tn * td)
    # recombine: sqrt(q) = (sn*sd/den) * sqrt(tn*td)
    return coeff, rad


# ---------------------------------------------------------------------------
# ExactValue
# ---------------------------------------------------------------------------


class ExactValue:
    """Immutable exact closed-form value (see module docstring).

    Arithmetic operators build new values; construction-time certification
    guards sqrt domains, arctan positivity and division by (certified)
    nonzero denominators.
    """

    __slots__ = ("_num", "_den", "_key", "_iv_cache")

    def __init__(self, num: dict, den: dict, _normalized: bool = False):
        if not _normalized:
            num, den = _normalize(num, den)
        self._num = num
        self._den = den
        self._key = None
        self._iv_cache = {}

    # -- identity ----------------------------------------------------------

    @property
    def key(self):
        if self._key is None:
            self._key = (_combo_key(self._num), _combo_key(self._den))
        return self._key

    def __hash__(self):
        return hash(self.key)

    def __eq__(self, other):
        """Equality of the canonical representation (hash-consistent; use
        :func:`compare` or :meth:`structurally_equal` for value equality)."""
        if not isinstance(other, ExactValue):
            return NotImplemented
        return self.key == other.key

    def structurally_equal(self, other: "ExactValue") -> bool:
        """True iff cross-multiplied normal forms coincide (a proof of
        value equality; False proves nothing)."""
        if self.key == other.key:
            return True
        lhs = _combo_mul(self._num, other._den)
        rhs = _combo_mul(other._num, self._den)
        return _combo_key(lhs) == _combo_key(rhs)

    def is_zero(self) -> bool:
        return not self._num

    def is_rational(self) -> bool:
        return self._den == _C_ONE and (
            not self._num or set(self._num) == {_ONE_MONO}
        )

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational value")
        return self._num.get(_ONE_MONO, Fraction(0))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if self._den == other._den:
            return ExactValue(_combo_add(self._num, other._num), self._den)
        num = _combo_add(
            _combo_mul(self._num, other._den), _combo_mul(other._num, self._den)
        )
        return ExactValue(num, _combo_mul(self._den, other._den))

    __radd__ = __add__

    def __neg__(self):
        return ExactValue(_combo_neg(self._num), self._den, _normalized=True)

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return ExactValue(
            _combo_mul(self._num, other._num), _combo_mul(self._den, other._den)
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            raise DomainError("division by zero")
        if not other.is_rational():
            # the sign of a non-rational denominator must be certifiable
            if sign(other) == 0:  # pragma: no cover - sign 0 implies is_zero
                raise DomainError("division by zero")
        return ExactValue(
            _combo_mul(self._num, other._den), _combo_mul(self._den, other._num)
        )

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return rational(1) / (self ** (-e))
        return ExactValue(
            _combo_pow_int(self._num, e), _combo_pow_int(self._den, e)
        )

    # -- enclosure ----------------------------------------------------------

    def _interval(self, prec: int):
        got = self._iv_cache.get(prec)
        if got is not None:
            return got
        ivn = _combo_interval(self._num, prec)
        if self._den == _C_ONE:
            iv = ivn
        else:
            iv = _iv_div(ivn, _combo_interval(self._den, prec), prec)
        self._iv_cache[prec] = iv
        return iv

    def ball(self, precision_bits: int = 64) -> Ball:
        return eval_ball(self, precision_bits)

    def compare(self, other, cap: int = DEFAULT_PRECISION_CAP) -> int:
        return compare(self, _coerce_strict(other), cap)

    def __repr__(self):
        return f"ExactValue({to_prefix(self)})"

    def __float__(self):
        lo, hi = self._interval(64)
        return float(lo + (hi - lo) / 2)


def _coerce(x) -> Optional[ExactValue]:
    if isinstance(x, ExactValue):
        return x
    if isinstance(x, (int, Fraction)):
        return rational(x)
    return None


def _coerce_strict(x) -> ExactValue:
    v = _coerce(x)
    if v is None:
        raise TypeError(f"cannot interpret {x!r} as an ExactValue")
    return v


# -- normalization ----------------------------------------------------------


def _normalize(num: dict, den: dict):
    if not den:
        raise DomainError("zero denominator")
    if not num:
        return {}, dict(_C_ONE)
    if den == _C_ONE:
        return num, dict(_C_ONE)
    # single-monomial denominator: invert what is invertible
    if len(den) == 1:
        (mono, coeff), = den.items()
        num = _combo_scale(num, 1 / coeff)
        residual: dict = dict(_C_ONE)
        factor = dict(_C_ONE)
        for k, e in mono:
            kind = k[0]
            if kind == "pi":
                factor = _combo_mul(factor, {((k, -e),): Fraction(1)})
            elif kind == "sqrt":
                # 1/sqrt(R)^e with e in {-1, 1} after mono folding
                if e == 1:
                    factor = _combo_mul(factor, {((k, 1),): Fraction(1)})
                    residual = _combo_mul(residual, _ATOMS[k].payload)
                else:  # e == -1: 1/(sqrt R)^-1 = sqrt R
                    factor = _combo_mul(factor, {((k, 1),): Fraction(1)})
            else:  # atan: not structurally invertible, keep in denominator
                residual = _combo_mul(residual, {((k, e),): Fraction(1)})
        num = _combo_mul(num, factor)
        if residual == _C_ONE:
            return num, dict(_C_ONE)
        return _normalize(num, residual)
    # multi-term denominator: peel square-root atoms by conjugation
    root = _linear_sqrt_atom(den)
    if root is not None:
        conj = _conjugate(den, root)
        new_den = _combo_mul(den, conj)
        if new_den:  # conjugate may coincide with a root of the denominator
            return _normalize(_combo_mul(num, conj), new_den)
    # stabilize representation: primitive, positive-leading denominator
    content = _combo_content(den) * _leading_sign(den)
    if content != 1:
        den = _combo_scale(den, 1 / content)
        num = _combo_scale(num, 1 / content)
    return num, den


def _atom_depth(key) -> int:
    atom = _ATOMS[key]
    if atom.kind != "sqrt":
        return 1
    inner = 0
    for mono, _ in atom.payload.items():
        for k, _e in mono:
            if k != _PI_KEY:
                inner = max(inner, _atom_depth(k))
    return 1 + inner


def _linear_sqrt_atom(c: dict):
    """A sqrt atom occurring only linearly in c, of maximal nesting depth.

    Conjugating with respect to a maximal-depth atom is what makes the
    elimination terminate: squaring it yields its radicand, which only
    contains strictly shallower atoms, so the chosen atom cannot sneak
    back in.
    """
    seen = set()
    for mono in c:
        for k, e in mono:
            if k[0] == "sqrt" and e == 1:
                seen.add(k)
    best = None
    best_depth = -1
    for k in sorted(seen):
        ok = all(
            e == 1 for mono in c for kk, e in mono if kk == k
        )
        if not ok:
            continue
        d = _atom_depth(k)
        if d > best_depth:
            best, best_depth = k, d
    return best


def _conjugate(c: dict, root_key) -> dict:
    """c = E + F*sqrt(R)  ->  E - F*sqrt(R)."""
    out: dict = {}
    for mono, coeff in c.items():
        has = any(k == root_key for k, _ in mono)
        out[mono] = -coeff if has else coeff
    return out


# -- constructors ------------------------------------------------------------


def rational(q: Rat) -> ExactValue:
    return ExactValue(_combo_rat(Fraction(q)), dict(_C_ONE), _normalized=True)


ZERO = rational(0)
ONE = rational(1)
PI = ExactValue({((_PI_KEY, 1),): Fraction(1)}, dict(_C_ONE), _normalized=True)
PI2 = PI * PI


def sqrt(x: Union[ExactValue, Rat]) -> ExactValue:
    """Certified square root; the argument must be certifiably >= 0."""
    x = _coerce_strict(x)
    if x.is_zero():
        return ZERO
    if x.is_rational():
        q = x.as_rational()
        if q < 0:
            raise DomainError("sqrt of a negative rational")
        coeff, rad = _sqrt_rational(q)
        if rad == 1:
            return rational(coeff)
        return rational(coeff) * _sqrt_combo(_combo_rat(rad))
    s = sign(x)
    if s < 0:
        raise DomainError("sqrt argument certified negative")
    if s == 0:
        return ZERO
    # sqrt(num/den) = sqrt(num*den)/den  (num*den carries the sign of x)
    root = _sqrt_combo(_combo_mul(x._num, x._den))
    if x._den == _C_ONE:
        return root
    return root / ExactValue(x._den, dict(_C_ONE))


def _sqrt_combo(c: dict) -> ExactValue:
    """sqrt of a combo certified >= 0, in canonical atom form."""
    if not c:
        return ZERO
    if len(c) == 1:
        (mono, coeff), = c.items()
        if coeff < 0 and not mono:
            raise DomainError("sqrt of a negative rational")
        out_mono: dict = {}
        rem: dict = {}
        for k, e in mono:
            q, r = divmod(e, 2)
            if q:
                out_mono[k] = q
            if r:
                rem[k] = r
        s, rad = _sqrt_rational(coeff) if coeff > 0 else (None, None)
        if s is None:
            # negative single monomial: value >= 0 certified by caller means
            # the atoms flip the sign; no structural split exists -- keep
            # the whole combo under one sqrt atom.
            return _sqrt_atom_value(c)
        inner: dict = _combo_rat(rad)
        for k, e in rem.items():
            inner = _combo_mul(inner, {((k, e),): Fraction(1)})
        head = {tuple(sorted(out_mono.items())): s} if out_mono else _combo_rat(s)
        if inner == _C_ONE:
            return ExactValue(head, dict(_C_ONE))
        tail = _sqrt_atom_value(inner)
        return ExactValue(head, dict(_C_ONE)) * tail
    # multi-term: first pull out the largest even common monomial factor
    # (so e.g. 16 pi^-2 - 1 and pi^-2 (16 - pi^2) share one radicand)
    common: dict = {}
    first = True
    for mono in c:
        exps = dict(mono)
        if first:
            common = exps
            first = False
        else:
            common = {
                k: min(e, exps.get(k, 0)) for k, e in common.items()
            }
            for k, e in exps.items():
                if k not in common:
                    common[k] = min(0, e)
        common = {k: e for k, e in common.items() if e != 0}
    extract = {k: e - (e % 2) for k, e in common.items() if e - (e % 2) != 0}
    if extract:
        shift = {
            tuple(sorted({k: -e for k, e in extract.items()}.items())): Fraction(1)
        }
        c = _combo_mul(c, shift)
        half = {
            tuple(sorted({k: e // 2 for k, e in extract.items()}.items())): Fraction(1)
        }
        head_value = ExactValue(half, dict(_C_ONE), _normalized=True)
    else:
        head_value = ONE
    # then pull out the squarefree part of the rational content
    content = _combo_content(c)
    s_num, t_num = _square_free_split(content.numerator)
    s_den, t_den = _square_free_split(content.denominator)
    # sqrt(content) = (s_num/(s_den * t_den)) * sqrt(t_num * t_den)
    prim = _combo_scale(c, 1 / content)
    coeff = Fraction(s_num, s_den * t_den)
    inner_rat = Fraction(t_num * t_den)
    inner = _combo_scale(prim, inner_rat)
    return head_value * rational(coeff) * _sqrt_atom_value(inner)


def _sqrt_atom_value(radic: dict) -> ExactValue:
    key = ("sqrt", _combo_key(radic))
    _get_atom(key, "sqrt", radic)
    return ExactValue({((key, 1),): Fraction(1)}, dict(_C_ONE), _normalized=True)


def atan(x: Union[ExactValue, Rat]) -> ExactValue:
    """Arctangent, supported on certifiably positive arguments only."""
    x = _coerce_strict(x)
    if sign(x) <= 0:
        raise DomainError("atan requires a certifiably positive argument")
    key = ("atan", x.key)
    _get_atom(key, "atan", x)
    return ExactValue({((key, 1),): Fraction(1)}, dict(_C_ONE), _normalized=True)


# ---------------------------------------------------------------------------
# Evaluation, comparison, rendering
# ---------------------------------------------------------------------------


def eval_ball(x: ExactValue, precision_bits: int) -> Ball:
    """Rigorous enclosure of x at the given working precision (>= 32)."""
    if precision_bits < 32:
        raise ValueError("precision_bits must be >= 32")
    lo, hi = x._interval(precision_bits)
    return Ball(lo, hi, precision_bits)


def compare(x: ExactValue, y: ExactValue, cap: int = DEFAULT_PRECISION_CAP) -> int:
    """Certified three-way comparison: -1, 0 or +1.

    Tries the enclosure ladder (64 bits, doubling); falls back to structural
    equality once enclosures keep overlapping; raises ``Undecided`` at the
    precision cap.
    """
    x = _coerce_strict(x)
    y = _coerce_strict(y)
    if x is y:
        return 0
    checked_structural = False
    prec = 64
    while prec <= cap:
        xl, xh = x._interval(prec)
        yl, yh = y._interval(prec)
        if xh < yl:
            return -1
        if yh < xl:
            return 1
        if prec >= 256 and not checked_structural:
            if x.structurally_equal(y):
                return 0
            checked_structural = True
        prec *= 2
    if not checked_structural and x.structurally_equal(y):
        return 0
    raise Undecided(
        f"comparison did not separate below {cap} bits: "
        f"{to_prefix(x)} vs {to_prefix(y)}"
    )


def sign(x: ExactValue, cap: int = DEFAULT_PRECISION_CAP) -> int:
    x = _coerce_strict(x)
    if x.is_zero():
        return 0
    if x.is_rational():
        q = x.as_rational()
        return -1 if q < 0 else (1 if q > 0 else 0)
    return compare(x, ZERO, cap)


def canonicalize(x: ExactValue) -> ExactValue:
    """Values are normalized on construction; canonicalize is the identity
    on the canonical representation (idempotent by construction)."""
    return _coerce_strict(x)


def quadratic_pi_surd(x: ExactValue):
    """The canonical (a, b, c, d) with x = a + b*sqrt(c + d*pi^2), b in
    {-1, 0, +1} and |b| absorbed into the radicand, or None if x is not of
    that shape.  Negative-b forms are genuinely needed (left endpoints of
    the failure windows), so b's sign is preserved rather than forced >= 0.
    """
    x = _coerce_strict(x)
    if x._den != _C_ONE:
        return None
    a = Fraction(0)
    s = None
    root_key = None
    for mono, coeff in x._num.items():
        if mono == _ONE_MONO:
            a = coeff
        elif (
            len(mono) == 1
            and mono[0][1] == 1
            and mono[0][0][0] == "sqrt"
            and s is None
        ):
            root_key, s = mono[0][0], coeff
        else:
            return None
    if s is None:
        return (a, Fraction(0), Fraction(0), Fraction(0))
    radic = _ATOMS[root_key].payload
    c = Fraction(0)
    d = Fraction(0)
    for mono, coeff in radic.items():
        if mono == _ONE_MONO:
            c = coeff
        elif mono == ((_PI_KEY, 2),):
            d = coeff
        else:
            return None
    b = Fraction(1) if s > 0 else Fraction(-1)
    return (a, b, c * s * s, d * s * s)


def gamma_half_integer(twice_z: int) -> ExactValue:
    """Gamma(twice_z / 2) for positive integer twice_z, exactly: a rational
    for integer arguments, a rational multiple of sqrt(pi) for half-integer
    arguments (recurrence Gamma(z+1) = z Gamma(z) from Gamma(1/2) = sqrt(pi))."""
    if twice_z < 1:
        raise ValueError("argument must be a positive half-integer")
    if twice_z % 2 == 0:
        return rational(math.factorial(twice_z // 2 - 1))
    coeff = Fraction(1)
    z = Fraction(twice_z, 2)
    while z > Fraction(1, 2):
        z -= 1
        coeff *= z
    return rational(coeff) * sqrt(PI)


# -- rendering ----------------------------------------------------------------


def _frac_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _atom_prefix(key) -> str:
    atom = _ATOMS[key]
    if atom.kind == "pi":
        return "pi"
    if atom.kind == "sqrt":
        return f"(sqrt {_combo_prefix(atom.payload)})"
    return f"(atan {to_prefix(atom.payload)})"


def _mono_prefix(mono, coeff: Fraction) -> str:
    parts = []
    for k, e in mono:
        base = _atom_prefix(k)
        parts.append(base if e == 1 else f"(pow {base} {e})")
    if not parts:
        return _frac_str(coeff)
    if coeff == 1 and len(parts) == 1:
        return parts[0]
    items = ([] if coeff == 1 else [_frac_str(coeff)]) + parts
    if len(items) == 1:
        return items[0]
    return "(* " + " ".join(items) + ")"


def _combo_prefix(c: dict) -> str:
    if not c:
        return "0"
    terms = [_mono_prefix(m, f) for m, f in sorted(c.items())]
    if len(terms) == 1:
        return terms[0]
    return "(+ " + " ".join(terms) + ")"


def to_prefix(x: ExactValue) -> str:
    """Stable prefix-syntax rendering of the canonical form."""
    x = _coerce_strict(x)
    if x._den == _C_ONE:
        return _combo_prefix(x._num)
    return f"(/ {_combo_prefix(x._num)} {_combo_prefix(x._den)})"


def _format_scientific(value, sig_digits: int) -> str:
    digits, exp, _ = gmpy2.digits(value, 10, sig_digits)
    neg = digits.startswith("-")
    if neg:
        digits = digits[1:]
    mantissa = digits[0] + "." + digits[1:]
    return f"{'-' if neg else ''}{mantissa}e{exp - 1:+03d}"


def decimal_str(x: ExactValue, sig_digits: int = 30) -> str:
    """Decimal rendering, correct to the displayed number of significant
    digits (the enclosure is refined until it pins them down)."""
    x = _coerce_strict(x)
    if x.is_zero():
        return "0"
    prec = max(64, int(sig_digits * 3.33) + 32)
    while prec <= DEFAULT_PRECISION_CAP * 4:
        lo, hi = x._interval(prec)
        if gmpy2.is_finite(lo) and gmpy2.is_finite(hi) and (lo > 0 or hi < 0):
            ctx = gmpy2.context(precision=prec)
            mid = ctx.div(ctx.add(lo, hi), mpfr(2))
            rad = ctx.div(ctx.sub(hi, lo), mpfr(2))
            if rad == 0 or abs(mid) > rad * mpfr(10) ** (sig_digits + 2):
                return _format_scientific(mid, sig_digits)
        prec *= 2
    raise Undecided(f"decimal rendering did not stabilize: {to_prefix(x)}")


def value_json(x: ExactValue) -> dict:
    """The shared JSON rendering: exact prefix text + 30-digit decimal."""
    return {"exact": to_prefix(x), "decimal30": decimal_str(x, 30)}


# ---------------------------------------------------------------------------
# Non-structural enclosures (n-th roots, e) for the closed-form asymptotics
# ---------------------------------------------------------------------------


def nth_root_ball(x: ExactValue, n: int, precision_bits: int) -> Ball:
    """Certified x^(1/n) for x certified positive (Ball arithmetic only;
    n-th roots deliberately stay outside the structural grammar)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lo, hi = _coerce_strict(x)._interval(precision_bits)
    if lo < 0:
        if hi < 0:
            raise DomainError("n-th root of a negative enclosure")
        lo = mpfr(0)
    d, u = _ctx_pair(precision_bits)
    return Ball(d.rootn(lo, n), u.rootn(hi, n), precision_bits)


def exp_ball(x: ExactValue, precision_bits: int) -> Ball:
    lo, hi = _coerce_strict(x)._interval(precision_bits)
    d, u = _ctx_pair(precision_bits)
    return Ball(d.exp(lo), u.exp(hi), precision_bits)


# ---------------------------------------------------------------------------
# Infix expression parser (the CLI input grammar)
# ---------------------------------------------------------------------------

_TOKEN_CHARS = set("+-*/^(),")


def _tokenize(s: str):
    tokens = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch.isspace():
            i += 1
        elif ch in _TOKEN_CHARS:
            tokens.append(ch)
            i += 1
        elif ch.isdigit() or ch == ".":
            j = i
            while j < len(s) and (s[j].isdigit() or s[j] == "."):
                j += 1
            tokens.append(s[i:j])
            i = j
        elif ch.isalpha():
            j = i
            while j < len(s) and s[j].isalpha():
                j += 1
            tokens.append(s[i:j].lower())
            i = j
        else:
            raise ValueError(f"unexpected character {ch!r} in expression")
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None:
            raise ValueError("unexpected end of expression")
        if expected is not None and tok != expected:
            raise ValueError(f"expected {expected!r}, found {tok!r}")
        self.pos += 1
        return tok

    def parse(self) -> ExactValue:
        v = self.expr()
        if self.peek() is not None:
            raise ValueError(f"trailing input at {self.peek()!r}")
        return v

    def expr(self) -> ExactValue:
        v = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            v = v + rhs if op == "+" else v - rhs
        return v

    def term(self) -> ExactValue:
        v = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            v = v * rhs if op == "*" else v / rhs
        return v

    def unary(self) -> ExactValue:
        if self.peek() == "-":
            self.take()
            return -self.unary()
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> ExactValue:
        base = self.atom()
        if self.peek() == "^":
            self.take()
            neg = False
            if self.peek() == "-":
                self.take()
                neg = True
            tok = self.take()
            if not tok.isdigit():
                raise ValueError(f"integer exponent expected, found {tok!r}")
            e = int(tok)
            return base ** (-e if neg else e)
        return base

    def atom(self) -> ExactValue:
        tok = self.take()
        if tok == "(":
            v = self.expr()
            self.take(")")
            return v
        if tok == "pi":
            return PI
        if tok in ("sqrt", "atan"):
            self.take("(")
            arg = self.expr()
            self.take(")")
            return sqrt(arg) if tok == "sqrt" else atan(arg)
        if tok and (tok[0].isdigit() or tok[0] == "."):
            if "." in tok:
                return rational(Fraction(tok))
            return rational(int(tok))
        raise ValueError(f"unexpected token {tok!r}")


def parse_exact(s: str) -> ExactValue:
    """Parse the CLI expression grammar: rationals ``p/q`` (and decimal
    literals, read exactly), ``pi``, ``sqrt(...)``, ``+ - * / ( )`` and
    ``^`` with integer exponents."""
    return _Parser(_tokenize(s)).parse()
