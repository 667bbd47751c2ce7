"""Continued fractions, fundamental units, and indecomposable integers.

The expansion of -omega_D' (which is sqrt(D) for D = 2,3 mod 4 and
(sqrt(D)-1)/2 for D = 1 mod 4) has a purely periodic tail; its convergents
alpha_i = p_i + q_i*omega parametrize the indecomposable totally positive
integers through the odd-index semiconvergents alpha_i + r*alpha_{i+1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import isqrt

from .errors import NotIntegral, NotTotallyPositive
from .field import FieldContext, QNum


@dataclass
class PeriodicCF:
    """[head; period repeating] expansion of the target quadratic irrational."""

    head: int
    period: list[int]
    target: str
    D: int

    def quotient(self, i: int) -> int:
        """Partial quotient u_i (i >= 0)."""
        if i == 0:
            return self.head
        return self.period[(i - 1) % len(self.period)]

    def convergents(self, n: int) -> list[tuple[int, int]]:
        """[(p_i, q_i)] for i = -1 .. n, with p_-1 = 1, q_-1 = 0."""
        out = [(1, 0)]
        p_prev, q_prev = 1, 0
        p, q = self.head, 1
        out.append((p, q))
        for i in range(1, n + 1):
            u = self.quotient(i)
            p, p_prev = u * p + p_prev, p
            q, q_prev = u * q + q_prev, q
            out.append((p, q))
        return out


def _cf_expand(D: int) -> tuple[int, list[int]]:
    """PQa expansion of (P0 + sqrt(D))/Q0 for the -omega' target."""
    if D % 4 == 1:
        P, Q = -1, 2
    else:
        P, Q = 0, 1
    s = isqrt(D)
    a0 = (P + s) // Q
    P = a0 * Q - P
    Q = (D - P * P) // Q
    period = []
    seen: dict[tuple[int, int], int] = {}
    while (P, Q) not in seen:
        seen[(P, Q)] = len(period)
        a = (P + s) // Q
        period.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
    if seen[(P, Q)] != 0:
        raise AssertionError(f"tail of CF for D={D} is not purely periodic")
    return a0, period


def continued_fraction(ctx: FieldContext) -> PeriodicCF:
    cf = ctx._cache.get("cf")
    if cf is None:
        head, period = _cf_expand(ctx.D)
        target = "sqrt(D)" if ctx.D % 4 != 1 else "(sqrt(D)-1)/2"
        cf = PeriodicCF(head, period, target, ctx.D)
        _verify_cf(ctx, cf)
        ctx._cache["cf"] = cf
    return cf


def _verify_cf(ctx: FieldContext, cf: PeriodicCF) -> None:
    """Algebraic re-expansion check: the periodic tail tau satisfies its own
    recurrence and head + 1/tau equals the target exactly."""
    # tau = [period repeating]: tau = (p*tau + p') / (q*tau + q'')
    p_prev, q_prev = 1, 0
    p, q = cf.period[0], 1
    for u in cf.period[1:]:
        p, p_prev = u * p + p_prev, p
        q, q_prev = u * q + q_prev, q
    # tau is the positive root of q*t^2 + (q' - p)*t - p' = 0
    A, B, C = q, q_prev - p, -p_prev
    disc = B * B - 4 * A * C
    target = ctx.sqrtD if ctx.D % 4 != 1 else (ctx.sqrtD - 1) / 2
    tau = (target - cf.head) if cf.head else target
    tau = ctx.one / tau
    lhs = A * tau * tau + B * tau + C
    if not lhs.is_zero() or disc <= 0:
        raise AssertionError(f"CF verification failed for D={ctx.D}")


def unit_from_cf(ctx: FieldContext, cf: PeriodicCF) -> QNum:
    """Fundamental unit eps_D = p_{s-1} + q_{s-1}*omega, s the period length."""
    s = len(cf.period)
    p, q = cf.convergents(s - 1)[s]  # index s in list == convergent s-1
    return ctx.from_coords(p, q)


def fundamental_unit(ctx: FieldContext) -> QNum:
    return ctx.fund_unit


@dataclass
class IndecEntry:
    rep: QNum
    tag: str

    def norm(self) -> Fraction:
        return self.rep.norm()


@dataclass
class IndecSet:
    representatives: list[IndecEntry]
    modulus: str = "squares of units"

    def elements(self) -> list[QNum]:
        return [e.rep for e in self.representatives]

    def __len__(self):
        return len(self.representatives)


def canonical_mod_unit_squares(ctx: FieldContext, x: QNum) -> QNum:
    """Trace-minimal element of {x * eps^(2k)}, ties broken by lex (a, b)."""
    g = ctx.fund_unit * ctx.fund_unit
    ginv = g.conj() if ctx.fund_unit_norm == 1 else (ctx.fund_unit.conj() * ctx.fund_unit.conj())
    if (g * ginv) != 1:
        ginv = ctx.one / g
    y = x
    while (y * g).trace() < y.trace():
        y = y * g
    while (y * ginv).trace() < y.trace():
        y = y * ginv
    best = y
    for cand in (y * g, y * ginv):
        if cand.trace() == best.trace() and (cand.a, cand.b) < (best.a, best.b):
            best = cand
    return best


def cone_representative(ctx: FieldContext, x: QNum) -> QNum:
    """The eps_plus-multiple of totally positive x in the half-open cone
    {u1 + u2*eps_plus : u1 > 0, u2 >= 0} (ratio window [1, eps_plus^2))."""
    ep = ctx.eps_plus
    ep_inv = ep.conj()  # norm 1
    y = x
    while y.b < 0:
        y = y * ep
    while (y * ep_inv).b >= 0:
        y = y * ep_inv
    return y


def cone_coordinates(ctx: FieldContext, x: QNum) -> tuple[Fraction, Fraction]:
    """(s1, s2) with x = s1 + s2*eps_plus."""
    ep = ctx.eps_plus
    s2 = Fraction(x.b, x.den) / Fraction(ep.b, ep.den)
    s1 = Fraction(x.a, x.den) - s2 * Fraction(ep.a, ep.den)
    return s1, s2


def indecomposables(ctx: FieldContext) -> IndecSet:
    """Representatives of the indecomposable integers mod squares of units."""
    cached = ctx._cache.get("indec_set")
    if cached is not None:
        return cached
    cf = continued_fraction(ctx)
    s = len(cf.period)
    conv = cf.convergents(2 * s + 1)

    def alpha(i: int) -> QNum:
        p, q = conv[i + 1]
        return ctx.from_coords(p, q)

    found: dict[tuple[int, int, int], IndecEntry] = {}

    def add(x: QNum, tag: str) -> None:
        rep = canonical_mod_unit_squares(ctx, x)
        key = (rep.a, rep.b, rep.den)
        if key not in found:
            found[key] = IndecEntry(rep, tag)

    for i in range(-1, 2 * s - 2, 2):
        a_i = alpha(i)
        a_next = alpha(i + 1)
        u_cap = cf.quotient(i + 2)
        for r in range(u_cap + 1):
            x = a_i + r * a_next
            tag = f"({i},{r})"
            if abs(x.norm()) == 1:
                tag = "unit"
            add(x, tag)
            add(x.conj(), tag if tag == "unit" else f"({i},{r})'")

    from .lattice import box_between

    entries = sorted(
        found.values(), key=lambda e: (e.rep.norm(), e.rep.trace(), e.rep.a, e.rep.b)
    )
    for e in entries:
        if not (e.rep.is_integral() and e.rep.is_totally_positive()):
            raise AssertionError(f"bad indecomposable representative {e.rep}")
        if box_between(ctx, ctx.zero, e.rep, True, True):
            raise AssertionError(f"{e.rep} is decomposable; enumeration is wrong")
    result = IndecSet(entries)
    ctx._cache["indec_set"] = result
    return result


def decompose_integer(ctx: FieldContext, x: QNum):
    """A splitting x = y + z into totally positive integers, or None.

    The search is a direct lattice scan of {y integral : 0 < y < x in both
    embeddings}, independent of the semiconvergent description.
    """
    if not x.is_integral():
        raise NotIntegral(f"{x} is not an algebraic integer")
    if not x.is_totally_positive():
        raise NotTotallyPositive(f"{x} is not totally positive")
    from .lattice import box_between

    inner = box_between(ctx, ctx.zero, x, True, True)
    if not inner:
        return None
    y = min(inner, key=lambda z: (z.trace(), z.a, z.b))
    return y, x - y


def dominance_constant_with_eta(ctx: FieldContext) -> tuple[Fraction, QNum | None]:
    """Best dominance constant C from the unit-cone bound.

    Baseline C = N(1 + eps_plus); improved by an integral eta = s1 + s2*eps_plus
    with s1, s2 in [0,1) to min over eta of max(N(1+s2*eps_plus), N(s1+eps_plus)).
    Candidate eta are searched among the indecomposables (cone-translated).
    """
    ep = ctx.eps_plus
    t = ep.trace()  # N(eps_plus) = 1

    def norm_combo(u: Fraction, v: Fraction) -> Fraction:
        # N(u + v*eps_plus) with rational u, v
        return u * u + u * v * t + v * v

    best = (ctx.one + ep).norm()
    best_eta = None
    for entry in indecomposables(ctx).representatives:
        y = cone_representative(ctx, entry.rep)
        s1, s2 = cone_coordinates(ctx, y)
        if 0 <= s1 < 1 and 0 <= s2 < 1:
            c_eta = max(norm_combo(Fraction(1), s2), norm_combo(s1, Fraction(1)))
            if c_eta < best:
                best = c_eta
                best_eta = y
    return best, best_eta


def dominance_constant(ctx: FieldContext) -> Fraction:
    return ctx.dominance_C
