"""Exact arithmetic in real quadratic fields Q(sqrt(D)).

Elements are (a + b*sqrt(D))/den with integer a, b and positive integer den,
always kept canonical (gcd(a, b, den) = 1).  Every predicate (sign at an
embedding, integrality, dominance) is decided with integer arithmetic only;
no floating point enters any decision.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from .errors import (
    DivisionByZero,
    DTooSmall,
    MixedFields,
    NotSquareFree,
    ParseError,
)

# ---------------------------------------------------------------------------
# integer / surd primitives
# ---------------------------------------------------------------------------


def is_square_free(n: int) -> bool:
    if n < 1:
        return False
    if n % 4 == 0:
        return False
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        if n % p == 0:
            n //= p
        p += 1 if p == 2 else 2
    return True


def sign_surd(A: int, B: int, D: int) -> int:
    """Exact sign of A + B*sqrt(D) for integers A, B (D > 1 square-free)."""
    if B == 0:
        return (A > 0) - (A < 0)
    if A == 0:
        return 1 if B > 0 else -1
    if A > 0 and B > 0:
        return 1
    if A < 0 and B < 0:
        return -1
    lhs, rhs = A * A, B * B * D
    if lhs == rhs:
        return 0
    return (1 if lhs > rhs else -1) * (1 if A > 0 else -1)


def floor_surd(A: int, B: int, den: int, D: int) -> int:
    """floor((A + B*sqrt(D))/den) with den > 0, exactly."""
    if B >= 0:
        f = isqrt(B * B * D)
    else:
        t = isqrt(B * B * D)
        f = -t - (0 if t * t == B * B * D else 1)
    n = (A + f) // den
    while sign_surd(A - (n + 1) * den, B, D) >= 0:
        n += 1
    while sign_surd(A - n * den, B, D) < 0:
        n -= 1
    return n


def surd_is_int(A: int, B: int, den: int, D: int, n: int) -> bool:
    return B == 0 and A == n * den


def int_least_geq(A: int, B: int, den: int, D: int, strict: bool) -> int:
    """Least integer n with n > value (strict) or n >= value."""
    fl = floor_surd(A, B, den, D)
    if sign_surd(A - fl * den, B, D) == 0:
        return fl + 1 if strict else fl
    return fl + 1


def int_greatest_leq(A: int, B: int, den: int, D: int, strict: bool) -> int:
    """Greatest integer n with n < value (strict) or n <= value."""
    fl = floor_surd(A, B, den, D)
    if strict and sign_surd(A - fl * den, B, D) == 0:
        return fl - 1
    return fl


def sqrt_fraction(x: Fraction):
    """Exact square root of a non-negative rational, or None."""
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


_SQRT_PREC = 1 << 32


def sqrt_upper(x: Fraction) -> Fraction:
    """Rational upper bound for sqrt(x), x >= 0, within 1/2^32."""
    if x < 0:
        raise ValueError("sqrt of negative")
    n, d = x.numerator, x.denominator
    return Fraction(isqrt(n * d * _SQRT_PREC * _SQRT_PREC) + 1, d * _SQRT_PREC)


def sqrt_lower(x: Fraction) -> Fraction:
    if x < 0:
        raise ValueError("sqrt of negative")
    n, d = x.numerator, x.denominator
    return Fraction(isqrt(n * d * _SQRT_PREC * _SQRT_PREC), d * _SQRT_PREC)


class SurdVal:
    """Exact value a + b*sqrt(m) with rational a, b (used for gamma^2).

    m = 0 encodes a plain rational.  Supports the comparisons and the exact
    floor the bound computations need.
    """

    __slots__ = ("a", "b", "m")

    def __init__(self, a, b=0, m=0):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.m = int(m)
        if self.b == 0:
            self.m = 0

    def _sign_of_diff(self, other: Fraction) -> int:
        # sign of (self - other)
        A = self.a - other
        B = self.b
        if B == 0:
            return (A > 0) - (A < 0)
        if A == 0:
            return 1 if B > 0 else -1
        if A > 0 and B > 0:
            return 1
        if A < 0 and B < 0:
            return -1
        lhs, rhs = A * A, B * B * self.m
        if lhs == rhs:
            return 0
        return (1 if lhs > rhs else -1) * (1 if A > 0 else -1)

    def cmp(self, other) -> int:
        return self._sign_of_diff(Fraction(other))

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def times(self, fr) -> "SurdVal":
        fr = Fraction(fr)
        return SurdVal(self.a * fr, self.b * fr, self.m)

    def floor(self) -> int:
        num_a, num_b = self.a, self.b
        den = num_a.denominator * num_b.denominator
        A = int(num_a * den)
        B = int(num_b * den)
        if B == 0:
            return A // den
        return floor_surd(A, B, den, self.m)

    def ceil_fraction(self) -> Fraction:
        """A rational >= the value (floor + 1 is always safe)."""
        if self.b == 0:
            return self.a
        return Fraction(self.floor() + 1)

    def __float__(self):
        return float(self.a) + float(self.b) * (self.m**0.5)

    def __repr__(self):
        if self.b == 0:
            return f"SurdVal({self.a})"
        return f"SurdVal({self.a}+{self.b}*sqrt({self.m}))"


# ---------------------------------------------------------------------------
# field elements
# ---------------------------------------------------------------------------


class QNum:
    """Canonical element (a + b*sqrt(D))/den of Q(sqrt(D))."""

    __slots__ = ("a", "b", "den", "ctx")

    def __init__(self, ctx: "FieldContext", a: int, b: int = 0, den: int = 1):
        if den == 0:
            raise DivisionByZero("zero denominator")
        if den < 0:
            a, b, den = -a, -b, -den
        g = gcd(gcd(abs(a), abs(b)), den)
        if g > 1:
            a //= g
            b //= g
            den //= g
        self.a = a
        self.b = b
        self.den = den
        self.ctx = ctx

    # -- basic protocol ----------------------------------------------------

    def __repr__(self):
        return f"QNum({format_qnum(self)!r}, D={self.ctx.D})"

    def __eq__(self, other):
        if isinstance(other, int):
            return self.b == 0 and self.den == 1 and self.a == other
        if not isinstance(other, QNum):
            return NotImplemented
        return (
            self.ctx.D == other.ctx.D
            and self.a == other.a
            and self.b == other.b
            and self.den == other.den
        )

    def __hash__(self):
        return hash((self.a, self.b, self.den, self.ctx.D))

    def _coerce(self, other) -> "QNum":
        if isinstance(other, QNum):
            if other.ctx.D != self.ctx.D:
                raise MixedFields(f"D={self.ctx.D} vs D={other.ctx.D}")
            return other
        if isinstance(other, int):
            return QNum(self.ctx, other)
        if isinstance(other, Fraction):
            return QNum(self.ctx, other.numerator, 0, other.denominator)
        raise TypeError(f"cannot coerce {other!r}")

    def __add__(self, other):
        o = self._coerce(other)
        return QNum(
            self.ctx,
            self.a * o.den + o.a * self.den,
            self.b * o.den + o.b * self.den,
            self.den * o.den,
        )

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return QNum(
            self.ctx,
            self.a * o.den - o.a * self.den,
            self.b * o.den - o.b * self.den,
            self.den * o.den,
        )

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return QNum(self.ctx, -self.a, -self.b, self.den)

    def __mul__(self, other):
        o = self._coerce(other)
        D = self.ctx.D
        return QNum(
            self.ctx,
            self.a * o.a + self.b * o.b * D,
            self.a * o.b + self.b * o.a,
            self.den * o.den,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.is_zero():
            raise DivisionByZero("division by zero element")
        n = self * o.conj()
        nn = o.norm()
        return QNum(
            self.ctx,
            n.a * nn.denominator,
            n.b * nn.denominator,
            n.den * nn.numerator,
        )

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def conj(self) -> "QNum":
        return QNum(self.ctx, self.a, -self.b, self.den)

    def norm(self) -> Fraction:
        return Fraction(self.a * self.a - self.b * self.b * self.ctx.D, self.den * self.den)

    def trace(self) -> Fraction:
        return Fraction(2 * self.a, self.den)

    def is_integral(self) -> bool:
        if self.den == 1:
            return True
        if self.ctx.D % 4 == 1 and self.den == 2:
            return (self.a - self.b) % 2 == 0
        return False

    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if self.b != 0:
            raise ValueError("not rational")
        return Fraction(self.a, self.den)

    def sign_at(self, emb: int) -> int:
        b = self.b if emb == 1 else -self.b
        return sign_surd(self.a, b, self.ctx.D)

    def is_totally_positive(self) -> bool:
        return self.sign_at(1) > 0 and self.sign_at(2) > 0

    def is_totally_nonnegative(self) -> bool:
        return self.sign_at(1) >= 0 and self.sign_at(2) >= 0

    def dominates(self, other) -> bool:
        """self >= other in both embeddings."""
        return (self - self._coerce(other)).is_totally_nonnegative()

    def coords(self) -> tuple[int, int]:
        """(p, q) with self = p + q*omega_D; requires integrality."""
        D = self.ctx.D
        if D % 4 != 1:
            if self.den != 1:
                raise ValueError("not integral")
            return self.a, self.b
        if self.den == 1:
            return self.a - self.b, 2 * self.b
        if self.den == 2 and (self.a - self.b) % 2 == 0:
            return (self.a - self.b) // 2, self.b
        raise ValueError("not integral")

    def half_pair(self) -> tuple[int, int]:
        """(A, B) with self = (A + B*sqrt(D))/2; requires den | 2."""
        if self.den == 1:
            return 2 * self.a, 2 * self.b
        if self.den == 2:
            return self.a, self.b
        raise ValueError("denominator exceeds 2")

    def emb_floor(self, emb: int) -> int:
        b = self.b if emb == 1 else -self.b
        return floor_surd(self.a, b, self.den, self.ctx.D)

    def emb_surd(self, emb: int) -> tuple[int, int, int]:
        """(A, B, den) with sigma_emb(self) = (A + B*sqrt(D))/den."""
        return self.a, (self.b if emb == 1 else -self.b), self.den


def qnum_sqrt(x: QNum):
    """Exact square root of x in Q(sqrt(D)) if one exists, else None."""
    ctx = x.ctx
    if x.is_zero():
        return ctx.zero
    if not x.is_totally_nonnegative():
        return None
    ny = sqrt_fraction(x.norm())
    if ny is None:
        return None
    for s in (ny, -ny) if ny != 0 else (ny,):
        t2 = x.trace() + 2 * s
        if t2 < 0:
            continue
        t = sqrt_fraction(t2)
        if t is None:
            continue
        # a root y has trace t and norm s, i.e. y = (t + f*sqrt(D))/2 with
        # f^2*D = t^2 - 4s
        disc = t * t - 4 * s
        if disc < 0:
            continue
        if disc == 0:
            y = ctx.qnum_fraction(t / 2)
        else:
            f = sqrt_fraction(disc / ctx.D)
            if f is None:
                continue
            L = t.denominator * f.denominator
            y = QNum(ctx, int(t * L), int(f * L), 2 * L)
        for cand in (y, y.conj()):
            if cand * cand == x:
                return cand if cand.sign_at(1) > 0 else -cand
    return None


# ---------------------------------------------------------------------------
# field context
# ---------------------------------------------------------------------------

# exact generalised Hermite constants gamma_{K,2} for the fields the source
# tables cover; stored squared so every comparison stays in Q(sqrt(m)).
_HERMITE2_SQ = {
    2: (SurdVal(Fraction(528, 225), Fraction(192, 225), 6), "4/(2*sqrt(6)-3)"),
    3: (SurdVal(16), "4"),
    5: (SurdVal(Fraction(16, 5)), "4/sqrt(5)"),
    6: (SurdVal(25), "5"),
    21: (SurdVal(Fraction(256, 9)), "16/3"),
}


class FieldContext:
    """Everything derived from a square-free D > 1; immutable after build."""

    def __init__(self, D: int):
        self.D = D
        self._cache: dict = {}

    # populated by make_context:
    omega: QNum
    discriminant: int
    fund_unit: QNum
    fund_unit_norm: int
    eps_plus: QNum
    dominance_C: Fraction
    dominance_eta: QNum | None
    hermite2_sq: SurdVal
    hermite2_exact: bool
    hermite2_display: str

    def __repr__(self):
        return f"FieldContext(D={self.D})"

    def __reduce__(self):
        return (make_context, (self.D,))

    @property
    def zero(self) -> QNum:
        return QNum(self, 0)

    @property
    def one(self) -> QNum:
        return QNum(self, 1)

    @property
    def sqrtD(self) -> QNum:
        return QNum(self, 0, 1)

    def qnum(self, a: int, b: int = 0, den: int = 1) -> QNum:
        return QNum(self, a, b, den)

    def qnum_fraction(self, fr: Fraction) -> QNum:
        fr = Fraction(fr)
        return QNum(self, fr.numerator, 0, fr.denominator)

    def from_coords(self, p: int, q: int) -> QNum:
        """p + q*omega_D."""
        if self.D % 4 == 1:
            return QNum(self, 2 * p + q, q, 2)
        return QNum(self, p, q)

    def omega_emb_surd(self, emb: int) -> tuple[int, int, int]:
        if self.D % 4 == 1:
            return (1, 1 if emb == 1 else -1, 2)
        return (0, 1 if emb == 1 else -1, 1)


def divides(a: QNum, b: QNum):
    """Exact quotient b/a when it lies in O_K, else None."""
    if a.is_zero():
        raise DivisionByZero("divisor is zero")
    q = b / a
    return q if q.is_integral() else None


@lru_cache(maxsize=None)
def make_context(D: int) -> FieldContext:
    """Build the FieldContext for square-free D > 1."""
    if not isinstance(D, int) or D <= 1:
        raise DTooSmall(f"D must be an integer > 1, got {D}")
    if not is_square_free(D):
        raise NotSquareFree(f"D={D} is not square-free")
    ctx = FieldContext(D)
    if D % 4 == 1:
        ctx.omega = QNum(ctx, 1, 1, 2)
        ctx.discriminant = D
    else:
        ctx.omega = QNum(ctx, 0, 1)
        ctx.discriminant = 4 * D

    from . import indec  # deferred: indec builds on QNum

    cf = indec.continued_fraction(ctx)
    ctx._cache["cf"] = cf
    unit = indec.unit_from_cf(ctx, cf)
    nu = unit.norm()
    if nu not in (1, -1) or not (unit.sign_at(1) > 0 and unit.emb_floor(1) >= 1):
        raise AssertionError(f"fundamental unit computation failed for D={D}: {unit}")
    ctx.fund_unit = unit
    ctx.fund_unit_norm = int(nu)
    ctx.eps_plus = unit if nu == 1 else unit * unit

    if D in _HERMITE2_SQ:
        ctx.hermite2_sq, ctx.hermite2_display = _HERMITE2_SQ[D]
        ctx.hermite2_exact = True
    else:
        half_disc = Fraction(ctx.discriminant, 2)
        ctx.hermite2_sq = SurdVal(half_disc * half_disc)
        ctx.hermite2_display = f"{half_disc} (bound Delta_K/2)"
        ctx.hermite2_exact = False

    C, eta = indec.dominance_constant_with_eta(ctx)
    ctx.dominance_C = C
    ctx.dominance_eta = eta
    return ctx


# ---------------------------------------------------------------------------
# literal syntax
# ---------------------------------------------------------------------------


def format_qnum(x: QNum) -> str:
    """Element literal: "(a+b*sqrt(D))/den", den omitted when 1, b-term when 0."""
    D = x.ctx.D
    if x.b == 0:
        return f"{x.a}" if x.den == 1 else f"{x.a}/{x.den}"
    if x.a == 0:
        core = f"{x.b}*sqrt({D})"
    elif x.b > 0:
        core = f"{x.a}+{x.b}*sqrt({D})"
    else:
        core = f"{x.a}-{-x.b}*sqrt({D})"
    if x.den == 1:
        return core
    return f"({core})/{x.den}"


_TERM_RE = re.compile(
    r"""^(?P<sign>[+-]?)
        (?:
            (?P<coef>\d+)\*?sqrt\((?P<d1>\d+)\)
          | sqrt\((?P<d2>\d+)\)
          | (?P<int>\d+)
        )$""",
    re.VERBOSE,
)


def parse_qnum(ctx: FieldContext, s: str) -> QNum:
    """Parse the element literal syntax; accepts whitespace and leading sign."""
    t = re.sub(r"\s+", "", s)
    if not t:
        raise ParseError("empty element literal")
    den = 1
    if t.startswith("("):
        close = t.rfind(")")
        if close < 0:
            raise ParseError(f"unbalanced parentheses in {s!r}")
        body, rest = t[1:close], t[close + 1 :]
        if rest:
            if not rest.startswith("/"):
                raise ParseError(f"trailing junk in {s!r}")
            den = int(rest[1:])
    else:
        if "/" in t:
            body, dstr = t.rsplit("/", 1)
            if "sqrt" in dstr:
                raise ParseError(f"denominator must be an integer in {s!r}")
            den = int(dstr)
        else:
            body = t
    if den <= 0:
        raise ParseError(f"denominator must be positive in {s!r}")
    # split into signed terms
    parts = re.split(r"(?=[+-])", body)
    a = b = 0
    for part in parts:
        if not part:
            continue
        m = _TERM_RE.match(part)
        if not m:
            raise ParseError(f"cannot parse term {part!r} in {s!r}")
        sgn = -1 if m.group("sign") == "-" else 1
        if m.group("int") is not None:
            a += sgn * int(m.group("int"))
        else:
            dd = int(m.group("d1") or m.group("d2"))
            if dd != ctx.D:
                raise ParseError(f"sqrt({dd}) does not match field D={ctx.D}")
            b += sgn * int(m.group("coef") or 1)
    return QNum(ctx, a, b, den)


def format_fraction(fr: Fraction) -> str:
    return str(fr.numerator) if fr.denominator == 1 else f"{fr.numerator}/{fr.denominator}"


def parse_fraction(s: str) -> Fraction:
    return Fraction(s.strip())
