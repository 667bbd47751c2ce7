"""Finite lattice-point enumerations: dominated boxes, cone representatives
of totally positive integers up to unit action, and trace-form ellipsoids.

All interval endpoints are quadratic surds (A + B*sqrt(D))/den handled with
integer arithmetic; floating point never decides membership.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import NotDefinite
from .field import (
    FieldContext,
    QNum,
    int_greatest_leq,
    int_least_geq,
    sqrt_lower,
    sqrt_upper,
)

Triple = tuple[int, int, int]  # (A, B, den): value (A + B*sqrt(D))/den, den > 0


def _t_sub(t1: Triple, t2: Triple) -> Triple:
    a1, b1, d1 = t1
    a2, b2, d2 = t2
    return (a1 * d2 - a2 * d1, b1 * d2 - b2 * d1, d1 * d2)


def _t_scale_int(t: Triple, k: int) -> Triple:
    a, b, d = t
    return (a * k, b * k, d)


def _t_div_sqrtD(t: Triple, D: int) -> Triple:
    # (A + B*sqrt(D)) / (den*sqrt(D)) = (B*D + A*sqrt(D)) / (den*D)
    a, b, d = t
    return (b * D, a, d * D)


def _frac_triple(fr: Fraction) -> Triple:
    return (fr.numerator, 0, fr.denominator)


def box_q_range(ctx: FieldContext, lo: QNum, hi: QNum) -> tuple[int, int]:
    """Padded integer range for the omega-coordinate q of lattice points in
    the embedding box (exactness is restored by the per-q p-ranges)."""
    D = ctx.D
    top = _t_div_sqrtD(_t_sub(hi.emb_surd(1), lo.emb_surd(2)), D)
    bot = _t_div_sqrtD(_t_sub(lo.emb_surd(1), hi.emb_surd(2)), D)
    q_hi = int_greatest_leq(*top, D, strict=False)
    q_lo = int_least_geq(*bot, D, strict=False)
    return q_lo - 1, q_hi + 1


def _p_range(
    ctx: FieldContext,
    lo: QNum,
    hi: QNum,
    q: int,
    lo_strict: bool,
    hi_strict: bool,
) -> tuple[int, int]:
    D = ctx.D
    p_lo = None
    p_hi = None
    for emb in (1, 2):
        w = _t_scale_int(ctx.omega_emb_surd(emb), q)
        lo_t = _t_sub(lo.emb_surd(emb), w)
        hi_t = _t_sub(hi.emb_surd(emb), w)
        a = int_least_geq(*lo_t, D, strict=lo_strict)
        b = int_greatest_leq(*hi_t, D, strict=hi_strict)
        p_lo = a if p_lo is None else max(p_lo, a)
        p_hi = b if p_hi is None else min(p_hi, b)
    return p_lo, p_hi


def box_between(
    ctx: FieldContext,
    lo: QNum,
    hi: QNum,
    lo_strict: bool = True,
    hi_strict: bool = True,
) -> list[QNum]:
    """All integral z with lo < z < hi in both embeddings (< or <= per flags)."""
    q_lo, q_hi = box_q_range(ctx, lo, hi)
    out = []
    for q in range(q_lo, q_hi + 1):
        p_lo, p_hi = _p_range(ctx, lo, hi, q, lo_strict, hi_strict)
        for p in range(p_lo, p_hi + 1):
            out.append(ctx.from_coords(p, q))
    return out


def box_nonempty(
    ctx: FieldContext,
    lo: QNum,
    hi: QNum,
    lo_strict: bool = True,
    hi_strict: bool = True,
) -> bool:
    q_lo, q_hi = box_q_range(ctx, lo, hi)
    for q in range(q_lo, q_hi + 1):
        p_lo, p_hi = _p_range(ctx, lo, hi, q, lo_strict, hi_strict)
        if p_lo <= p_hi:
            return True
    return False


def _eps_plus_bounds(ctx: FieldContext) -> tuple[Fraction, Fraction]:
    """Rational lower/upper bounds for sigma_1(eps_plus)."""
    key = "eps_plus_bounds"
    if key not in ctx._cache:
        ep = ctx.eps_plus
        sD_lo, sD_hi = sqrt_lower(Fraction(ctx.D)), sqrt_upper(Fraction(ctx.D))
        lo = (ep.a + ep.b * sD_lo) / ep.den
        hi = (ep.a + ep.b * sD_hi) / ep.den
        ctx._cache[key] = (lo, hi)
    return ctx._cache[key]


def tp_reps_up_to_norm(ctx: FieldContext, B, den: int = 1) -> list[QNum]:
    """One representative per orbit of multiplication by totally positive
    units, over {x in (1/den)O_K : x totally positive, N(x) <= B}.

    Representatives live in the half-open cone {u1 + u2*eps_plus, u1 > 0,
    u2 >= 0}, i.e. embedding ratio in [1, eps_plus^2).
    """
    B = Fraction(B)
    B2 = B * den * den
    if B2 < 1:
        return []
    D = ctx.D
    S = sqrt_upper(B2)
    _, ep_hi = _eps_plus_bounds(ctx)
    sD_lo = sqrt_lower(Fraction(D))
    q_max = int((ep_hi * S) / sD_lo) + 1
    ep_conj = ctx.eps_plus.conj()
    out = []
    zero = ctx.zero
    s_hi = ctx.qnum_fraction(S)
    for q in range(0, q_max + 1):
        # sigma_2(y) in (0, S]
        p_lo, p_hi = _p_range(ctx, zero, s_hi, q, True, False)
        for p in range(p_lo, p_hi + 1):
            y = ctx.from_coords(p, q)
            if y.sign_at(2) <= 0:
                continue
            if y.norm() > B2:
                continue
            if (y * ep_conj).b >= 0:
                continue  # on/above the eps_plus ray: not the cone rep
            out.append(QNum(ctx, y.a, y.b, y.den * den))
    out.sort(key=lambda x: (x.norm(), x.trace(), x.a, x.b))
    return out


# ---------------------------------------------------------------------------
# trace-form ellipsoid enumeration (Fincke-Pohst with exact rationals)
# ---------------------------------------------------------------------------


class TraceForm:
    """tr(Q(x1 + x2*w, y1 + y2*w)) as a positive definite rational quadratic
    form in (x1, x2, y1, y2), with its exact LDL^T decomposition."""

    def __init__(self, Q):
        ctx = Q.alpha.ctx
        self.ctx = ctx
        w = ctx.omega
        basis = [(ctx.one, ctx.zero), (w, ctx.zero), (ctx.zero, ctx.one), (ctx.zero, w)]
        half_c = Q.c / 2

        def bil(u, v):
            return Q.alpha * u[0] * v[0] + half_c * (u[0] * v[1] + u[1] * v[0]) + Q.eta * u[1] * v[1]

        n = 4
        G = [[bil(basis[i], basis[j]).trace() for j in range(n)] for i in range(n)]
        self.G = G
        L = [[Fraction(0)] * n for _ in range(n)]
        d = [Fraction(0)] * n
        for i in range(n):
            L[i][i] = Fraction(1)
            acc = G[i][i] - sum(L[i][k] * L[i][k] * d[k] for k in range(i))
            d[i] = acc
            if acc <= 0:
                raise NotDefinite("trace form is not positive definite")
            for j in range(i + 1, n):
                L[j][i] = (G[j][i] - sum(L[j][k] * L[i][k] * d[k] for k in range(i))) / d[i]
        self.L = L
        self.d = d

    def value(self, z) -> Fraction:
        total = Fraction(0)
        for i in range(4):
            s = z[i] + sum(self.L[j][i] * z[j] for j in range(i + 1, 4))
            total += self.d[i] * s * s
        return total

    def enumerate(self, T: Fraction):
        """All nonzero integer z with value(z) <= T, one per +/- pair."""
        L, d = self.L, self.d
        out = []
        z = [0, 0, 0, 0]

        def rec(i: int, rem: Fraction):
            if i < 0:
                if any(z):
                    for c in z:
                        if c:
                            if c > 0:
                                out.append(tuple(z))
                            return
                return
            center = sum(L[j][i] * z[j] for j in range(i + 1, 4))
            r = sqrt_upper(rem / d[i])
            lo = int(-center - r) - 1
            hi = int(-center + r) + 1
            for zi in range(lo, hi + 1):
                s = zi + center
                term = d[i] * s * s
                if term <= rem:
                    z[i] = zi
                    rec(i - 1, rem - term)
            z[i] = 0

        rec(3, Fraction(T))
        return out


def vectors_by_trace(Q, T, mode: str = "<=") -> list[tuple[QNum, QNum]]:
    """Nonzero v in O_K^2 with tr(Q(v)) <= T (or == T), one per +/- pair."""
    T = Fraction(T)
    if T <= 0:
        return []
    tf = Q.trace_form()
    ctx = tf.ctx
    out = []
    for z in tf.enumerate(T):
        if mode == "=" and tf.value(z) != T:
            continue
        out.append((ctx.from_coords(z[0], z[1]), ctx.from_coords(z[2], z[3])))
    return out


def _value_scale_bound(ctx: FieldContext) -> Fraction:
    """Upper bound for sqrt(g) + 1/sqrt(g), g the generator of the scaling
    group {eps^2k} acting on form values (eps_plus, or its square when
    N(eps) = +1)."""
    key = "value_scale_bound"
    if key not in ctx._cache:
        lo, hi = _eps_plus_bounds(ctx)
        if ctx.fund_unit_norm == 1:
            lo, hi = lo * lo, hi * hi
        ctx._cache[key] = sqrt_upper(hi) + sqrt_upper(Fraction(1) / lo)
    return ctx._cache[key]


def min_norm_with_certificate(Q):
    """(min(Q), witness vector, certified trace ceiling T)."""
    ctx = Q.alpha.ctx
    a_n, e_n = Q.alpha.norm(), Q.eta.norm()
    if a_n <= e_n:
        best_n, best_v = a_n, (ctx.one, ctx.zero)
    else:
        best_n, best_v = e_n, (ctx.zero, ctx.one)
    best_key = None
    T = _value_scale_bound(ctx) * sqrt_upper(best_n)
    for v in vectors_by_trace(Q, T, "<="):
        val = Q.value(v[0], v[1])
        n = val.norm()
        key = (n, val.trace(), v[0].a, v[0].b, v[1].a, v[1].b)
        if n < best_n or (n == best_n and (best_key is None or key < best_key)):
            best_n, best_v, best_key = n, v, key
    return best_n, best_v, T


def min_norm(Q):
    """Exact minimum of N(Q(v)) over nonzero integral vectors, with witness."""
    n, v, _ = min_norm_with_certificate(Q)
    return n, v
