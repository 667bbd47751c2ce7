"""Rank bounds for n-universal forms: the raw and refined upper bounds from
the determinant census, and lower bounds from trace-one sets U(delta)."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import product as iproduct
from math import factorial, gcd

from .classify import ClassificationReport, are_equivalent, det_bound_full
from .errors import (
    CountTooSmall,
    MissingCensus,
    NotCodifferent,
    NotTotallyPositive,
    PartialClassification,
)
from .field import FieldContext, QNum, format_fraction, sqrt_lower, sqrt_upper
from .forms import BinaryForm, _enum_lattice_in_embedding_box, iter_definite_splits
from .indec import continued_fraction, decompose_integer, indecomposables

# g-invariant configuration: known exact values, else the quadratic-field bound
_G_INVARIANT = {2: (5, "He-Hu"), 5: (5, "Sasaki")}
_G_DEFAULT = (7, "Icaza bound")


def g_invariant(D: int) -> tuple[int, str]:
    return _G_INVARIANT.get(D, _G_DEFAULT)


@dataclass
class BoundReport:
    kind: str
    value: object  # int | Fraction
    audit: dict = dc_field(default_factory=dict)
    flags: list = dc_field(default_factory=list)

    def to_json(self) -> dict:
        v = self.value
        if isinstance(v, Fraction):
            v = format_fraction(v)
        return {"kind": self.kind, "value": v, "audit": self.audit, "flags": self.flags}


# ---------------------------------------------------------------------------
# upper bounds
# ---------------------------------------------------------------------------


def upper_bound_41(
    ctx: FieldContext,
    n: int,
    census_count_gamma: int | None,
    census_count_cbi: int | None = None,
    g: int | None = None,
) -> BoundReport:
    """min(g + n*#Q*(C_BI, n), g*#I + n*#Q*(gamma^n C^n, n)); the C_BI branch
    only when a census at the user-supplied C_BI is given."""
    if census_count_gamma is None:
        raise MissingCensus("need a bounded-determinant form census")
    gv, gsrc = (g, "user") if g is not None else g_invariant(ctx.D)
    n_indec = len(indecomposables(ctx))
    branch2 = gv * n_indec + n * census_count_gamma
    audit = {
        "g": gv,
        "g_source": gsrc,
        "indec_count": n_indec,
        "census_gamma": census_count_gamma,
        "branch_gamma": branch2,
    }
    value = branch2
    if census_count_cbi is not None:
        branch1 = gv + n * census_count_cbi
        audit["census_cbi"] = census_count_cbi
        audit["branch_cbi"] = branch1
        value = min(branch1, branch2)
    return BoundReport("upper-4.1", value, audit)


def upper_bound_42(
    ctx: FieldContext,
    classification: ClassificationReport,
    n: int = 2,
    g: int | None = None,
) -> BoundReport:
    """g*#I + n * sum over classes of floor(gamma^n C^n / N(det H)), exact."""
    if classification.partial:
        raise PartialClassification("upper_bound_42 needs a complete classification")
    gv, gsrc = (g, "user") if g is not None else g_invariant(ctx.D)
    n_indec = len(indecomposables(ctx))
    B = det_bound_full(ctx)
    total = 0
    terms = []
    for entry in classification.classes:
        dn = entry.form.det().norm()
        fl = B.times(1 / dn).floor()
        terms.append({"det_norm": format_fraction(dn), "floor": fl})
        total += fl
    value = gv * n_indec + n * total
    return BoundReport(
        "upper-4.2",
        value,
        {
            "g": gv,
            "g_source": gsrc,
            "indec_count": n_indec,
            "class_terms": terms,
            "copies_total": total,
        },
    )


def _class_index(census_forms: list[BinaryForm], part: BinaryForm, cache: dict) -> int:
    key = (part.alpha, part.c, part.eta)
    if key in cache:
        return cache[key]
    for i, rep in enumerate(census_forms):
        if are_equivalent(rep, part) is not None:
            cache[key] = i
            return i
    raise MissingCensus(f"split part {part.literal()} matches no census class")


def _decomposition_multisets(
    census_forms: list[BinaryForm],
    indec_flags: list[bool],
    mode: str,
    max_splits: int,
    max_multisets: int,
) -> tuple[list[set], bool]:
    """Per census class, the set of multisets (sorted tuples of indec class
    ids) realizing it as a sum of indecomposable classes."""
    cache: dict = {}
    memo: list[set | None] = [None] * len(census_forms)
    complete = True

    def rec(ci: int) -> set:
        nonlocal complete
        if memo[ci] is not None:
            return memo[ci]
        if indec_flags[ci]:
            memo[ci] = {(ci,)}
            return memo[ci]
        memo[ci] = set()  # cycle guard; det norms strictly decrease, no cycles
        out: set = set()
        n_splits = 0
        for wit in iter_definite_splits(census_forms[ci], mode):
            n_splits += 1
            if n_splits > max_splits:
                complete = False
                break
            i1 = _class_index(census_forms, wit.parts[0], cache)
            i2 = _class_index(census_forms, wit.parts[1], cache)
            for m1 in rec(i1):
                for m2 in rec(i2):
                    out.add(tuple(sorted(m1 + m2)))
                    if len(out) > max_multisets:
                        complete = False
                        break
        memo[ci] = out
        return out

    sets = [rec(i) for i in range(len(census_forms))]
    return sets, complete


def upper_bound_refined(
    ctx: FieldContext,
    census_report: ClassificationReport,
    n: int = 2,
    g: int | None = None,
    max_splits: int = 4000,
    max_multisets: int = 4000,
    max_cover_product: int = 500_000,
) -> BoundReport:
    """Census-refined bound: exclude decomposable census forms expressible as
    sums of pairwise non-equivalent indecomposable classes; cover the rest
    with class multiplicities; emit g*#I + n * sum of multiplicities."""
    if census_report.kind != "census":
        raise MissingCensus("upper_bound_refined needs a census report")
    gv, gsrc = (g, "user") if g is not None else g_invariant(ctx.D)
    n_indec_ints = len(indecomposables(ctx))
    mode = census_report.mode
    forms = [e.form for e in census_report.classes]
    indec_flags = [e.indecomposable for e in census_report.classes]
    indec_ids = [i for i, f in enumerate(indec_flags) if f]
    flags = []
    if census_report.partial:
        flags.append("census incomplete")

    multisets, complete = _decomposition_multisets(
        forms, indec_flags, mode, max_splits, max_multisets
    )
    if not complete:
        flags.append("refinement incomplete")

    excluded = []
    unexcluded = []
    for i, f in enumerate(forms):
        if indec_flags[i]:
            continue
        options = multisets[i]
        if not options:
            flags.append("refinement incomplete")
            unexcluded.append((i, options))
            continue
        distinct = [m for m in options if len(set(m)) == len(m)]
        if distinct:
            excluded.append((i, sorted(distinct)[0]))
        else:
            unexcluded.append((i, options))

    mult = {ci: 1 for ci in indec_ids}
    chosen = {}
    if unexcluded and all(opts for _, opts in unexcluded):
        option_lists = [sorted(opts) for _, opts in unexcluded]
        sizes = 1
        for ol in option_lists:
            sizes *= len(ol)
        best = None
        if sizes <= max_cover_product:
            for combo in iproduct(*option_lists):
                trial = {ci: 1 for ci in indec_ids}
                for m in combo:
                    counts: dict[int, int] = {}
                    for ci in m:
                        counts[ci] = counts.get(ci, 0) + 1
                    for ci, k in counts.items():
                        trial[ci] = max(trial[ci], k)
                total = sum(trial.values())
                if best is None or total < best[0]:
                    best = (total, dict(trial), combo)
        else:
            flags.append("cover solved greedily")
            combo = [ol[0] for ol in option_lists]
            trial = {ci: 1 for ci in indec_ids}
            for m in combo:
                counts = {}
                for ci in m:
                    counts[ci] = counts.get(ci, 0) + 1
                for ci, k in counts.items():
                    trial[ci] = max(trial[ci], k)
            best = (sum(trial.values()), trial, tuple(combo))
        mult = best[1]
        chosen = {uf[0]: m for uf, m in zip(unexcluded, best[2])}
    elif unexcluded:
        flags.append("refinement incomplete")

    flags = sorted(set(flags))
    if "refinement incomplete" in flags:
        # the multiplicity cover may undercount; report the sound raw-4.2
        # style copies over the indecomposable classes instead
        B = det_bound_full(ctx)
        total_mult = sum(B.times(1 / forms[ci].det().norm()).floor() for ci in indec_ids)
        mult = {ci: B.times(1 / forms[ci].det().norm()).floor() for ci in indec_ids}
    else:
        total_mult = sum(mult.values())
    value = gv * n_indec_ints + n * total_mult
    audit = {
        "g": gv,
        "g_source": gsrc,
        "indec_integer_count": n_indec_ints,
        "census_classes": len(forms),
        "indec_form_classes": len(indec_ids),
        "excluded": [
            {"form": forms[i].literal(), "decomposition": list(m)} for i, m in excluded
        ],
        "unexcluded": [
            {
                "form": forms[i].literal(),
                "chosen": list(chosen.get(i, ())),
            }
            for i, _ in unexcluded
        ],
        "multiplicities": {forms[ci].literal(): k for ci, k in mult.items()},
        "multiplicity_total": total_mult,
    }
    return BoundReport("upper-refined", value, audit, flags)


# ---------------------------------------------------------------------------
# lower bounds
# ---------------------------------------------------------------------------


def is_codifferent(ctx: FieldContext, delta: QNum) -> bool:
    return (delta.trace().denominator == 1) and ((delta * ctx.omega).trace().denominator == 1)


def u_set(ctx: FieldContext, delta: QNum) -> list[QNum]:
    """U(delta) = {alpha in O_K, totally positive, tr(delta*alpha) = 1}."""
    if not is_codifferent(ctx, delta):
        raise NotCodifferent(f"{delta} is not in the codifferent")
    if not delta.is_totally_positive():
        raise NotTotallyPositive("delta must be totally positive")
    t1 = int(delta.trace())
    t2 = int((delta * ctx.omega).trace())
    g = gcd(t1, t2)
    if g != 1:
        return []
    s, t = _ext_gcd(t1, t2)
    alpha0 = ctx.from_coords(s, t)
    direction = ctx.from_coords(t2, -t1)
    if (delta * alpha0).trace() != 1 or (delta * direction).trace() != 0:
        raise AssertionError("trace-one line parametrization failed")
    if direction.sign_at(1) * direction.sign_at(2) >= 0:
        raise NotTotallyPositive("delta does not cut a bounded segment")
    # conservative k-window from rational embedding bounds, then exact filter
    sD_hi = sqrt_upper(Fraction(ctx.D))

    def emb_abs_upper(x: QNum) -> Fraction:
        return (abs(x.a) + abs(x.b) * sD_hi) / x.den

    # |sigma_i(direction)| >= |N(direction)| / |sigma_other(direction)|
    nd = abs(direction.norm())
    up = emb_abs_upper(direction)
    low = nd / up
    span = (emb_abs_upper(alpha0) + 1) / low
    K = int(span) + 2
    out = []
    for k in range(-K, K + 1):
        a = alpha0 + k * direction
        if a.is_totally_positive():
            if (delta * a).trace() != 1:
                raise AssertionError("trace-one line solve failed")
            if decompose_integer(ctx, a) is not None:
                raise AssertionError(f"U(delta) element {a} decomposable")
            out.append(a)
    out.sort(key=lambda x: (x.trace(), x.a, x.b))
    return out


def _ext_gcd(a: int, b: int) -> tuple[int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_s, old_t


def r_set_count(ctx: FieldContext, delta1: QNum, delta2: QNum, mode: str) -> int:
    """#{a1 x^2 + (2b or b) xy + a2 y^2 : a_i in U(delta_i), tpd}, exact."""
    u1 = u_set(ctx, delta1)
    u2 = u_set(ctx, delta2)
    if not u1 or not u2:
        return 0
    factor = 4 if mode == "nonclassical" else 1
    sD_lo = sqrt_lower(Fraction(ctx.D))
    sD_hi = sqrt_upper(Fraction(ctx.D))
    total = 0
    for a1 in u1:
        for a2 in u2:
            M = factor * a1 * a2
            # rational upper bounds for sqrt(sigma_i(M))
            hi1 = (M.a + (M.b * sD_hi if M.b >= 0 else M.b * sD_lo)) / M.den
            hi2 = (M.a + (-M.b * sD_lo if M.b >= 0 else -M.b * sD_hi)) / M.den
            r1 = sqrt_upper(max(hi1, Fraction(0)))
            r2 = sqrt_upper(max(hi2, Fraction(0)))
            for b in _enum_lattice_in_embedding_box(ctx, -r1, r1, -r2, r2):
                d4 = M - b * b
                if d4.is_totally_positive():
                    total += 1
    return total


def lower_bound_43(count: int, n: int, d: int) -> BoundReport:
    """Every classical n-universal form needs >= count^(1/n)/d variables."""
    k = 0
    while ((k + 1) * d) ** n <= count:
        k += 1
    return BoundReport(
        "lower-4.3", k, {"count": count, "root": n, "degree": d, "floor": k}
    )


def lower_bound_44(count: int, n: int, d: int) -> BoundReport:
    if count < 240:
        raise CountTooSmall(f"Theorem 4.4 needs #R >= 240, got {count}")
    k = 0
    while ((k + 1) * d) ** (2 * n) <= count:
        k += 1
    return BoundReport(
        "lower-4.4", k, {"count": count, "root": 2 * n, "degree": d, "floor": k}
    )


def lower_bound_u_half(ctx: FieldContext) -> BoundReport:
    """u/2 variables, u the largest odd partial quotient of the -omega' CF."""
    cf = continued_fraction(ctx)
    odd = [u for u in [cf.head] + cf.period if u % 2 == 1]
    u = max(odd) if odd else 0
    return BoundReport(
        "lower-u-half",
        Fraction(u, 2),
        {"cf_head": cf.head, "cf_period": cf.period, "u": u, "floor": u // 2},
    )


# ---------------------------------------------------------------------------
# pure bound calculators (general degree/rank)
# ---------------------------------------------------------------------------


def unit_sphere_volume(n: int) -> tuple[Fraction, int]:
    """omega_n = coeff * pi^power, exactly."""
    if n % 2 == 0:
        k = n // 2
        return Fraction(1, factorial(k)), k
    k = (n - 1) // 2
    return Fraction(4 ** (k + 1) * factorial(k + 1), factorial(2 * k + 2)), k


@dataclass
class SymbolicBound:
    """coefficient * (vol_coeff * pi^vol_pi_power)^vol_exponent, with a float
    view; kept symbolic because fractional powers leave the rationals."""

    coefficient: Fraction
    vol_coeff: Fraction
    vol_pi_power: int
    vol_exponent: Fraction

    def approx(self) -> float:
        import math

        vol = float(self.vol_coeff) * math.pi**self.vol_pi_power
        return float(self.coefficient) * vol ** float(self.vol_exponent)

    def to_json(self) -> dict:
        return {
            "coefficient": format_fraction(self.coefficient),
            "volume_coeff": format_fraction(self.vol_coeff),
            "volume_pi_power": self.vol_pi_power,
            "volume_exponent": format_fraction(self.vol_exponent),
            "approx": self.approx(),
        }


def icaza_gamma_bound(d: int, n: int, Delta: int) -> SymbolicBound:
    """gamma_{K,n} <= 4^d * omega_n^(-2d/n) * Delta_K."""
    a, k = unit_sphere_volume(n)
    return SymbolicBound(Fraction(4**d * Delta), a, k, Fraction(-2 * d, n))


def corollary_det_bound(d: int, n: int, Delta: int) -> SymbolicBound:
    """Decomposability threshold 4^(dn) * omega_n^(-2d) * Delta^n * (Delta+1)^n."""
    a, k = unit_sphere_volume(n)
    return SymbolicBound(
        Fraction(4 ** (d * n)) * Fraction(Delta) ** n * Fraction(Delta + 1) ** n,
        a,
        k,
        Fraction(-2 * d),
    )


def corollary_det_bound_binary(Delta: int) -> Fraction:
    """The n = 2 specialisation: (1/4) * Delta^2 * (Delta+1)^2."""
    return Fraction(Delta**2 * (Delta + 1) ** 2, 4)
