"""Binary quadratic forms over O_K: definiteness, decomposability shortcuts,
and the complete additive-indecomposability decision.

The decision engine works on integer "half pairs" (A, B) meaning
(A + B*sqrt(D))/2, so the inner loops never allocate field elements.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetExceeded, MixedFields, NotClassical, NotDefinite
from .field import FieldContext, QNum, format_qnum, qnum_sqrt, sign_surd, sqrt_lower, sqrt_upper
from .indec import decompose_integer
from .lattice import TraceForm, box_between, box_nonempty, min_norm_with_certificate

CLASSICAL = "classical"
NONCLASSICAL = "nonclassical"


def _check_mode(mode: str) -> str:
    if mode not in (CLASSICAL, NONCLASSICAL):
        raise ValueError(f"mode must be {CLASSICAL!r} or {NONCLASSICAL!r}")
    return mode


class BinaryForm:
    """alpha*x^2 + c*xy + eta*y^2 with integral coefficients."""

    __slots__ = ("alpha", "c", "eta", "_det", "_tf", "_min")

    def __init__(self, alpha: QNum, c: QNum, eta: QNum):
        if not (alpha.ctx.D == c.ctx.D == eta.ctx.D):
            raise MixedFields("form coefficients from different fields")
        for z in (alpha, c, eta):
            if not z.is_integral():
                raise ValueError(f"coefficient {format_qnum(z)} is not integral")
        self.alpha = alpha
        self.c = c
        self.eta = eta
        self._det = None
        self._tf = None
        self._min = None

    @property
    def ctx(self) -> FieldContext:
        return self.alpha.ctx

    def __repr__(self):
        return f"BinaryForm({self.literal()!r}, D={self.ctx.D})"

    def literal(self) -> str:
        return f"{format_qnum(self.alpha)}|{format_qnum(self.c)}|{format_qnum(self.eta)}"

    def __eq__(self, other):
        return (
            isinstance(other, BinaryForm)
            and self.alpha == other.alpha
            and self.c == other.c
            and self.eta == other.eta
        )

    def __hash__(self):
        return hash((self.alpha, self.c, self.eta))

    def det(self) -> QNum:
        if self._det is None:
            self._det = self.alpha * self.eta - self.c * self.c / 4
        return self._det

    def is_classical(self) -> bool:
        return (self.c / 2).is_integral()

    def value(self, x: QNum, y: QNum) -> QNum:
        return self.alpha * x * x + self.c * x * y + self.eta * y * y

    def bilinear(self, v: tuple[QNum, QNum], w: tuple[QNum, QNum]) -> QNum:
        half_c = self.c / 2
        return (
            self.alpha * v[0] * w[0]
            + half_c * (v[0] * w[1] + v[1] * w[0])
            + self.eta * v[1] * w[1]
        )

    def transform(self, U) -> "BinaryForm":
        """Form with Gram U * M * U^T; U = ((u11, u12), (u21, u22)) acts by rows."""
        r1 = (U[0][0], U[0][1])
        r2 = (U[1][0], U[1][1])
        return BinaryForm(self.value(*r1), 2 * self.bilinear(r1, r2), self.value(*r2))

    def swap_xy(self) -> "BinaryForm":
        return BinaryForm(self.eta, self.c, self.alpha)

    def trace_form(self) -> TraceForm:
        if self._tf is None:
            self._tf = TraceForm(self)
        return self._tf

    def min_norm(self) -> tuple[Fraction, tuple[QNum, QNum]]:
        if self._min is None:
            n, v, _ = min_norm_with_certificate(self)
            self._min = (n, v)
        return self._min


def form_from_literal(ctx: FieldContext, s: str) -> BinaryForm:
    from .field import parse_qnum

    parts = s.split("|")
    if len(parts) != 3:
        raise ValueError("form literal must be '<alpha>|<c>|<eta>'")
    return BinaryForm(*(parse_qnum(ctx, p) for p in parts))


# ---------------------------------------------------------------------------
# definiteness
# ---------------------------------------------------------------------------


def is_tpsd(Q: BinaryForm) -> bool:
    """Totally positive semi-definite, exactly (Sylvester per embedding)."""
    a, c, e = Q.alpha, Q.c, Q.eta
    if not (a.is_totally_nonnegative() and e.is_totally_nonnegative()):
        return False
    d4 = 4 * a * e - c * c
    return d4.is_totally_nonnegative()


def is_tpd(Q: BinaryForm) -> bool:
    a, c, e = Q.alpha, Q.c, Q.eta
    if not a.is_totally_positive():
        return False
    d4 = 4 * a * e - c * c
    return d4.is_totally_positive()


# ---------------------------------------------------------------------------
# decision engine (half-pair kernels)
# ---------------------------------------------------------------------------


def _pair_mul4(a: tuple[int, int], b: tuple[int, int], D: int) -> tuple[int, int]:
    """Integer pair of 4*x*y given half pairs of x and y."""
    return (a[0] * b[0] + a[1] * b[1] * D, a[0] * b[1] + a[1] * b[0])


def _pair_sq4(c: tuple[int, int], D: int) -> tuple[int, int]:
    """Integer pair of 4*c^2 given the half pair of c."""
    return (c[0] * c[0] + c[1] * c[1] * D, 2 * c[0] * c[1])


def _full_mul(x: tuple[int, int], y: tuple[int, int], D: int) -> tuple[int, int]:
    return (x[0] * y[0] + x[1] * y[1] * D, x[0] * y[1] + x[1] * y[0])


def _ge0_both(p: tuple[int, int], D: int) -> bool:
    A, B = p
    return sign_surd(A, B, D) >= 0 and sign_surd(A, -B, D) >= 0


def _gt0_both(p: tuple[int, int], D: int) -> bool:
    A, B = p
    return sign_surd(A, B, D) > 0 and sign_surd(A, -B, D) > 0


def _rem_tpsd(a: tuple[int, int], c: tuple[int, int], e: tuple[int, int], D: int) -> bool:
    """tpsd test for (a, c, e) half pairs with a, e already >= 0 totally."""
    X, Y = _pair_mul4(a, e, D)
    CX, CY = _pair_sq4(c, D)
    return _ge0_both((4 * X - CX, 4 * Y - CY), D)


@dataclass
class DecompositionWitness:
    parts: tuple[BinaryForm, BinaryForm]
    kind: str  # "rank1-split" | "general"

    def verify(self, Q: BinaryForm, mode: str) -> bool:
        p1, p2 = self.parts
        coeffs_ok = (
            p1.alpha + p2.alpha == Q.alpha
            and p1.c + p2.c == Q.c
            and p1.eta + p2.eta == Q.eta
        )
        mode_ok = mode == NONCLASSICAL or (p1.is_classical() and p2.is_classical())
        nonzero = not (p1.alpha.is_zero() and p1.c.is_zero() and p1.eta.is_zero())
        nonzero = nonzero and not (p2.alpha.is_zero() and p2.c.is_zero() and p2.eta.is_zero())
        return coeffs_ok and mode_ok and nonzero and is_tpsd(p1) and is_tpsd(p2)


def _box_pairs(ctx: FieldContext, upper: QNum, inclusive: bool):
    """Strictly positive integral points below `upper`, as (QNum, half pair),
    sorted by trace; cached per (upper, inclusive)."""
    key = ("boxp", upper.a, upper.b, upper.den, inclusive)
    got = ctx._cache.get(key)
    if got is None:
        pts = box_between(ctx, ctx.zero, upper, True, not inclusive)
        pts.sort(key=lambda z: (z.trace(), z.a, z.b))
        got = [(z, z.half_pair()) for z in pts]
        if len(ctx._cache) > 40000:
            ctx._cache.clear()
        ctx._cache[key] = got
    return got


def _sqrt_pair_upper(ctx: FieldContext, pair: tuple[int, int], emb: int) -> Fraction:
    """Rational upper bound for sqrt(max(0, sigma_emb(X + Y*sqrt(D))))."""
    X, Y = pair
    if emb == 2:
        Y = -Y
    sD = sqrt_upper(Fraction(ctx.D)) if Y > 0 else sqrt_lower(Fraction(ctx.D))
    v = Fraction(X) + Y * sD
    if v <= 0:
        return Fraction(0)
    return sqrt_upper(v)


def _omega_bounds(ctx: FieldContext) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
    key = "omega_bounds"
    if key not in ctx._cache:
        sD_lo, sD_hi = sqrt_lower(Fraction(ctx.D)), sqrt_upper(Fraction(ctx.D))
        if ctx.D % 4 == 1:
            w1 = ((1 + sD_lo) / 2, (1 + sD_hi) / 2)
            w2 = ((1 - sD_hi) / 2, (1 - sD_lo) / 2)
        else:
            w1 = (sD_lo, sD_hi)
            w2 = (-sD_hi, -sD_lo)
        ctx._cache[key] = (w1, w2)
    return ctx._cache[key]


def _enum_lattice_in_embedding_box(ctx: FieldContext, lo1, hi1, lo2, hi2):
    """Integral z with sigma_i(z) in [lo_i, hi_i] (rational outer bounds);
    callers re-check exactly."""
    sD_lo = sqrt_lower(Fraction(ctx.D))
    (w1_lo, w1_hi), (w2_lo, w2_hi) = _omega_bounds(ctx)
    q_min = int((lo1 - hi2) / sD_lo) - 1
    q_max = int((hi1 - lo2) / sD_lo) + 1
    for q in range(q_min, q_max + 1):
        p_lo1 = lo1 - q * (w1_hi if q >= 0 else w1_lo)
        p_hi1 = hi1 - q * (w1_lo if q >= 0 else w1_hi)
        p_lo2 = lo2 - q * (w2_hi if q >= 0 else w2_lo)
        p_hi2 = hi2 - q * (w2_lo if q >= 0 else w2_hi)
        p_lo = int(max(p_lo1, p_lo2)) - 1
        p_hi = int(min(p_hi1, p_hi2)) + 1
        for p in range(p_lo, p_hi + 1):
            yield ctx.from_coords(p, q)


def _find_splits(Q: BinaryForm, mode: str, first_only: bool, definite_only: bool = False):
    """Yield decompositions Q = part1 + part2 (both tpsd, mode-valid).

    Complete for totally positive definite Q: a part with a zero diagonal
    entry forces its xy coefficient to vanish, so every decomposition is
    either a diagonal split, a rank-1 subtraction (steps 1/2), or has all
    four diagonal entries totally positive (step 3).
    With definite_only=True only splits with both parts definite are
    emitted (used for the census refinement, where rank-1 splits are absent).
    """
    ctx = Q.ctx
    D = ctx.D
    alpha, c, eta = Q.alpha, Q.c, Q.eta
    pa, pc, pe = alpha.half_pair(), c.half_pair(), eta.half_pair()

    def mk(abar: QNum, cbar: QNum, ebar: QNum) -> DecompositionWitness:
        p1 = BinaryForm(abar, cbar, ebar)
        p2 = BinaryForm(alpha - abar, c - cbar, eta - ebar)
        kind = "rank1-split" if (p1.det().is_zero() or p2.det().is_zero()) else "general"
        return DecompositionWitness((p1, p2), kind)

    # diagonal forms split immediately
    if pc == (0, 0):
        if not definite_only:
            yield mk(alpha, ctx.zero, ctx.zero)
            if first_only:
                return

    box_a = _box_pairs(ctx, alpha, False)
    box_e = _box_pairs(ctx, eta, False)

    if not definite_only and pc != (0, 0):
        # step 1: subtract abar*x^2
        for z, pz in box_a:
            ra = (pa[0] - pz[0], pa[1] - pz[1])
            if _rem_tpsd(ra, pc, pe, D):
                yield mk(z, ctx.zero, ctx.zero)
                if first_only:
                    return
        # step 2: subtract ebar*y^2
        for z, pz in box_e:
            re = (pe[0] - pz[0], pe[1] - pz[1])
            if _rem_tpsd(pa, pc, re, D):
                yield mk(ctx.zero, ctx.zero, z)
                if first_only:
                    return

    # step 3: general parts with positive diagonals
    scale = 2 if mode == CLASSICAL else 1
    seen_splits = set()
    for za, ha in box_a:
        ra = (pa[0] - ha[0], pa[1] - ha[1])
        for ze, he in box_e:
            re = (pe[0] - he[0], pe[1] - he[1])
            P4 = _pair_mul4(ha, he, D)  # 4*abar*ebar
            R4 = _pair_mul4(ra, re, D)  # 4*(alpha-abar)*(eta-ebar)
            C4 = _pair_sq4(pc, D)  # 4*c^2
            T4 = (C4[0] - 4 * P4[0] - 4 * R4[0], C4[1] - 4 * P4[1] - 4 * R4[1])
            feasible = True
            U = None
            for emb in (1, 2):
                sT = sign_surd(T4[0], T4[1] if emb == 1 else -T4[1], D)
                if sT <= 0:
                    continue
                if U is None:
                    TT = _full_mul(T4, T4, D)
                    PR = _full_mul(P4, R4, D)
                    U = (TT[0] - 64 * PR[0], TT[1] - 64 * PR[1])
                if sign_surd(U[0], U[1] if emb == 1 else -U[1], D) > 0:
                    feasible = False
                    break
            if not feasible:
                continue
            # enumerate cbar = scale * z with sigma(cbar)^2 <= sigma(4*abar*ebar)
            r1 = _sqrt_pair_upper(ctx, P4, 1) / scale
            r2 = _sqrt_pair_upper(ctx, P4, 2) / scale
            for z in _enum_lattice_in_embedding_box(ctx, -r1, r1, -r2, r2):
                hz = z.half_pair()
                hc = (scale * hz[0], scale * hz[1])
                # part tpsd: 4*abar*ebar - cbar^2 >= 0
                CB = _pair_sq4(hc, D)
                det1 = (4 * P4[0] - CB[0], 4 * P4[1] - CB[1])
                if not _ge0_both(det1, D):
                    continue
                rc = (pc[0] - hc[0], pc[1] - hc[1])
                RB = _pair_sq4(rc, D)
                det2 = (4 * R4[0] - RB[0], 4 * R4[1] - RB[1])
                if not _ge0_both(det2, D):
                    continue
                if definite_only:
                    if not (_gt0_both(det1, D) and _gt0_both(det2, D)):
                        continue
                    cb = scale * z
                    k1 = (za.a, za.b, za.den, cb.a, cb.b, cb.den, ze.a, ze.b, ze.den)
                    a2, c2, e2 = alpha - za, c - cb, eta - ze
                    k2 = (a2.a, a2.b, a2.den, c2.a, c2.b, c2.den, e2.a, e2.b, e2.den)
                    key = (k1, k2) if k1 <= k2 else (k2, k1)
                    if key in seen_splits:
                        continue
                    seen_splits.add(key)
                yield mk(za, scale * z, ze)
                if first_only:
                    return


def find_decomposition(Q: BinaryForm, mode: str):
    """A witness decomposition of Q into two tpsd mode-valid forms, or None."""
    _check_mode(mode)
    if not is_tpd(Q):
        raise NotDefinite(f"{Q.literal()} is not totally positive definite")
    if mode == CLASSICAL and not Q.is_classical():
        raise NotClassical(f"{Q.literal()} is not classical")
    for w in _find_splits(Q, mode, first_only=True):
        return w
    return None


def is_additively_indecomposable(Q: BinaryForm, mode: str) -> bool:
    return find_decomposition(Q, mode) is None


def iter_definite_splits(Q: BinaryForm, mode: str):
    """All splits Q = Q1 + Q2 with both parts totally positive definite."""
    _check_mode(mode)
    yield from _find_splits(Q, mode, first_only=False, definite_only=True)


def rank1_reducible(Q: BinaryForm, mode: str):
    """A witness Q = S + R with S of determinant zero (S, R tpsd), or None."""
    _check_mode(mode)
    if not is_tpd(Q):
        raise NotDefinite(f"{Q.literal()} is not totally positive definite")
    ctx = Q.ctx
    D = ctx.D
    alpha, c, eta = Q.alpha, Q.c, Q.eta
    pa, pc, pe = alpha.half_pair(), c.half_pair(), eta.half_pair()
    if pc == (0, 0):
        return DecompositionWitness(
            (BinaryForm(alpha, ctx.zero, ctx.zero), BinaryForm(ctx.zero, ctx.zero, eta)),
            "rank1-split",
        )
    # subtract abar*x^2 / ebar*y^2 (inclusive: abar = alpha needs c = 0, skip)
    for z, pz in _box_pairs(ctx, alpha, False):
        ra = (pa[0] - pz[0], pa[1] - pz[1])
        if _rem_tpsd(ra, pc, pe, D):
            return DecompositionWitness(
                (BinaryForm(z, ctx.zero, ctx.zero), BinaryForm(alpha - z, c, eta)),
                "rank1-split",
            )
    for z, pz in _box_pairs(ctx, eta, False):
        re = (pe[0] - pz[0], pe[1] - pz[1])
        if _rem_tpsd(pa, pc, re, D):
            return DecompositionWitness(
                (BinaryForm(ctx.zero, ctx.zero, z), BinaryForm(alpha, c, eta - z)),
                "rank1-split",
            )
    # general rank-1 part (abar, cbar, ebar) with cbar^2 = 4*abar*ebar;
    # inclusive boxes: the remainder may itself be rank <= 1
    for za, ha in _box_pairs(ctx, alpha, True):
        for ze, he in _box_pairs(ctx, eta, True):
            t = qnum_sqrt(4 * za * ze)
            if t is None or not t.is_integral():
                continue
            if mode == CLASSICAL and not (t / 2).is_integral():
                continue
            for cb in (t, -t):
                rem = BinaryForm(alpha - za, c - cb, eta - ze)
                if rem.alpha.is_zero() and rem.c.is_zero() and rem.eta.is_zero():
                    continue
                if is_tpsd(rem):
                    return DecompositionWitness((BinaryForm(za, cb, ze), rem), "rank1-split")
    return None


def inde_from_inde_check(Q: BinaryForm) -> bool:
    """Sufficient fast path: both diagonal entries indecomposable, c != 0."""
    if Q.c.is_zero():
        return False
    ctx = Q.ctx
    return (
        decompose_integer(ctx, Q.alpha) is None and decompose_integer(ctx, Q.eta) is None
    )


# ---------------------------------------------------------------------------
# Lemma 5.3 shortcuts
# ---------------------------------------------------------------------------


def _ok_round_div(a: QNum, b: QNum) -> QNum:
    """Nearest-integer quotient of a/b in O_K coordinates."""
    ctx = a.ctx
    x = a / b
    if ctx.D % 4 == 1:
        # x = (p + q*omega) with rational p, q
        q2 = Fraction(2 * x.b, x.den)
        p2 = Fraction(x.a - x.b, x.den)
    else:
        p2 = Fraction(x.a, x.den)
        q2 = Fraction(x.b, x.den)
    rp = (2 * p2 + 1) // 2  # round half up
    rq = (2 * q2 + 1) // 2
    return ctx.from_coords(int(rp), int(rq))


def ok_gcd_bezout(a: QNum, b: QNum, cap: int = 256):
    """(g, s, t) with s*a + t*b = g via Euclid with nearest rounding.

    Works in the norm-Euclidean fields this engine targets; raises after
    `cap` steps otherwise.
    """
    ctx = a.ctx
    r0, r1 = a, b
    s0, s1 = ctx.one, ctx.zero
    t0, t1 = ctx.zero, ctx.one
    for _ in range(cap):
        if r1.is_zero():
            return r0, s0, t0
        q = _ok_round_div(r0, r1)
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    raise BudgetExceeded("O_K gcd did not terminate (field not norm-Euclidean?)")


def extend_to_unimodular(v: tuple[QNum, QNum]):
    """U in GL2(O_K) with first row v (v primitive up to a unit factor)."""
    x, y = v
    ctx = x.ctx
    if y.is_zero():
        g = x
        U = ((x / g, ctx.zero), (ctx.zero, ctx.one))
        return US_check(U, ctx)
    if x.is_zero():
        g = y
        U = ((ctx.zero, y / g), (-ctx.one, ctx.zero))
        return US_check(U, ctx)
    g, s, t = ok_gcd_bezout(x, y)
    # (x/g)*s + (y/g)*t = 1 ; rows (x/g, y/g), (-t, s) have determinant 1
    U = ((x / g, y / g), (-t, s))
    return US_check(U, ctx)


def US_check(U, ctx: FieldContext):
    det = U[0][0] * U[1][1] - U[0][1] * U[1][0]
    if not (det.is_integral() and abs(det.norm()) == 1):
        raise AssertionError("basis extension failed")
    for row in U:
        for el in row:
            if not el.is_integral():
                raise AssertionError("basis extension not integral")
    return U


def _strip_content(v: tuple[QNum, QNum]) -> tuple[QNum, QNum]:
    x, y = v
    if x.is_zero() or y.is_zero():
        return v
    g, _, _ = ok_gcd_bezout(x, y)
    if abs(g.norm()) == 1:
        return v
    return (x / g, y / g)


def quick_decomposable(Q: BinaryForm, mode: str = CLASSICAL):
    """Lemma 5.3 shortcuts; a witness or None (None means only that the
    shortcuts failed, not indecomposability)."""
    _check_mode(mode)
    if not is_tpd(Q):
        raise NotDefinite(f"{Q.literal()} is not totally positive definite")
    ctx = Q.ctx
    m, v = Q.min_norm()
    v = _strip_content(v)
    det = Q.det()
    C = ctx.dominance_C

    # clause 1: min(Q) <= N(det)/C  ->  split off abar*(linear form)^2
    if m <= det.norm() / C:
        U = extend_to_unimodular(v)
        W = (U[1], U[0])  # min value on the y-coordinate
        QT = Q.transform(W)
        xi = QT.det() / QT.eta
        cands = box_between(ctx, ctx.zero, xi, True, False)
        if cands:
            abar = min(cands, key=lambda z: (z.trace(), z.a, z.b))
            part1 = BinaryForm(abar, ctx.zero, ctx.zero)
            rem = BinaryForm(QT.alpha - abar, QT.c, QT.eta)
            Winv = _inv_unimodular(W)
            w1, w2 = part1.transform(Winv), rem.transform(Winv)
            wit = DecompositionWitness((w1, w2), "rank1-split")
            if wit.verify(Q, mode):
                return wit
    # clause 2: some 0 < delta <= det divisible by alpha (alpha attaining min)
    U = extend_to_unimodular(v)
    QT = Q.transform(U)
    mu_box = box_between(ctx, ctx.zero, QT.det() / QT.alpha, True, False)
    if mu_box:
        mu = min(mu_box, key=lambda z: (z.trace(), z.a, z.b))
        part2 = BinaryForm(ctx.zero, ctx.zero, mu)
        rem = BinaryForm(QT.alpha, QT.c, QT.eta - mu)
        Uinv = _inv_unimodular(U)
        wit = DecompositionWitness((rem.transform(Uinv), part2.transform(Uinv)), "rank1-split")
        if wit.verify(Q, mode):
            return wit
    return None


def _inv_unimodular(U):
    a, b = U[0]
    c, d = U[1]
    det = a * d - b * c
    return ((d / det, -b / det), (-c / det, a / det))


# ---------------------------------------------------------------------------
# sums of squares
# ---------------------------------------------------------------------------


def sum_of_squares(ctx: FieldContext, xi: QNum, max_nodes: int = 500_000):
    """sigma_1, ..., sigma_k with xi = sum sigma_i^2, or None.

    Depth-first over squares s^2 <= xi ordered by descending trace; memoizes
    unrepresentable remainders.
    """
    if not xi.is_integral():
        raise ValueError("xi must be integral")
    if xi.is_zero():
        return []
    if not xi.is_totally_positive():
        return None
    memo_fail: set[tuple[int, int, int]] = set()
    nodes = 0

    def squares_below(y: QNum):
        r1 = _sqrt_pair_upper(ctx, y.half_pair(), 1) if y.den <= 2 else None
        if r1 is None:
            # y may have a larger denominator only transiently; bound via embeddings
            raise AssertionError("unexpected denominator in sum_of_squares")
        r2 = _sqrt_pair_upper(ctx, y.half_pair(), 2)
        out = []
        for s in _enum_lattice_in_embedding_box(ctx, -r1, r1, -r2, r2):
            if s.is_zero():
                continue
            if (s.b, s.a) < (0, 0) or (s.b == 0 and s.a < 0):
                continue  # one per +/- pair
            sq = s * s
            if (y - sq).is_totally_nonnegative():
                out.append((s, sq))
        out.sort(key=lambda t: (-t[1].trace(), t[0].a, t[0].b))
        return out

    def rec(y: QNum):
        nonlocal nodes
        if y.is_zero():
            return []
        key = (y.a, y.b, y.den)
        if key in memo_fail:
            return None
        nodes += 1
        if nodes > max_nodes:
            raise BudgetExceeded("sum_of_squares search budget exhausted")
        for s, sq in squares_below(y):
            sub = rec(y - sq)
            if sub is not None:
                return [s] + sub
        memo_fail.add(key)
        return None

    return rec(xi)
