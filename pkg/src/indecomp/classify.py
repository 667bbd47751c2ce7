"""The six-step classification driver: determinant sweep, minimum-candidate
filtering, congruence-constrained xy-coefficient generation, indecomposability
testing, and equivalence-class deduplication.

Candidates are generated per determinant representative psi; forms built for
different psi are never equivalent (determinants of equivalent forms differ
by a square of a unit, and the pool holds one representative per such class),
so deduplication runs within each psi bucket only.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import (
    InternalInvariantError,
    MixedFields,
    NotOdd,
    NotSquareFree,
    BudgetExceeded,
)
from .field import (
    FieldContext,
    QNum,
    SurdVal,
    format_fraction,
    format_qnum,
    is_square_free,
    make_context,
    parse_qnum,
)
from .forms import (
    CLASSICAL,
    NONCLASSICAL,
    BinaryForm,
    _check_mode,
    find_decomposition,
    inde_from_inde_check,
    is_tpd,
    rank1_reducible,
    sum_of_squares,
)
from .indec import canonical_mod_unit_squares, decompose_integer, indecomposables
from .lattice import box_between, box_nonempty, tp_reps_up_to_norm, vectors_by_trace


def det_bound_full(ctx: FieldContext) -> SurdVal:
    """B = gamma_{K,2}^2 * C^2 (exact gamma when known, else the Delta/2 bound)."""
    C = ctx.dominance_C
    return ctx.hermite2_sq.times(C * C)


def det_candidates(ctx: FieldContext, J: int, bound: SurdVal | None = None) -> list[QNum]:
    """Determinant representatives: norm < B, one per unit-square class.

    J = 1 sweeps O_K; J = 2 sweeps (1/4)O_K (integers of norm < 16B scaled)."""
    B = bound if bound is not None else det_bound_full(ctx)
    den = 1 if J == 1 else 4
    scan = tp_reps_up_to_norm(ctx, B.ceil_fraction(), den=den)
    pool = [x for x in scan if B.cmp(x.norm()) > 0]
    if ctx.fund_unit_norm == 1:
        eps = ctx.fund_unit
        pool = pool + [eps * x for x in pool]
    pool.sort(key=lambda x: (x.norm(), x.trace(), x.a, x.b))
    return pool


def alpha_pool(ctx: FieldContext, bound: SurdVal | None = None) -> list[QNum]:
    """Minimum candidates: integral representatives up to unit squares."""
    return det_candidates(ctx, 1, bound)


def min_candidates(
    ctx: FieldContext, psi: QNum, J: int, pool: list[QNum] | None = None
) -> list[QNum]:
    """Step 4: alpha with N(psi)/C < N(alpha) <= gamma*sqrt(N(psi)) and
    alpha dividing no integral delta with 0 < delta <= psi."""
    if pool is None:
        pool = alpha_pool(ctx)
    npsi = psi.norm()
    lower = npsi / ctx.dominance_C
    g2 = ctx.hermite2_sq
    out = []
    zero = ctx.zero
    for a in pool:
        na = a.norm()
        if na <= lower:
            continue
        if g2.times(npsi).cmp(na * na) < 0:  # N(alpha)^2 > gamma^2 N(psi)
            continue
        # divisibility prune: alpha | delta <= psi  <=>  some mu <= psi/alpha
        if box_nonempty(ctx, zero, psi / a, True, False):
            continue
        out.append(a)
    return out


# ---------------------------------------------------------------------------
# beta candidates (Lemmas on eta-integrality and congruence equivalence)
# ---------------------------------------------------------------------------


def _coset_basis(ctx: FieldContext, alpha: QNum, J: int):
    """Basis ((d1, 0), (e, g)) of the coordinate lattice of J*alpha*O_K."""
    a = J * alpha
    u = a.coords()
    w = (a * ctx.omega).coords()
    # combine to zero the omega-coordinate of the first row
    g = gcd(u[1], w[1])
    if g == 0:
        raise AssertionError("degenerate xy-coefficient lattice")
    # extended gcd on the omega components
    x0, y0 = _ext_gcd(u[1], w[1])
    row2 = (x0 * u[0] + y0 * w[0], g)
    row1_p = (w[1] // g) * u[0] - (u[1] // g) * w[0]
    d1 = abs(row1_p)
    return d1, row2, g


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


def _coset_key(coords: tuple[int, int], d1: int, row2: tuple[int, int], g: int):
    p, q = coords
    j = q % g
    k = (q - j) // g
    p -= k * row2[0]
    return (p % d1, j)


def _trace_min_rep(ctx: FieldContext, alpha: QNum, J: int, beta0: QNum) -> QNum:
    """Representative of beta0 + J*alpha*O_K minimizing tr(beta^2/alpha),
    ties by lexicographic omega-coordinates."""
    a = J * alpha
    b1 = a
    b2 = a * ctx.omega

    def bil(x: QNum, y: QNum) -> Fraction:
        return (x * y / alpha).trace()

    G11, G12, G22 = bil(b1, b1), bil(b1, b2), bil(b2, b2)
    t1, t2 = bil(beta0, b1), bil(beta0, b2)
    det = G11 * G22 - G12 * G12
    m_star = (t1 * G22 - t2 * G12) / det
    n_star = (t2 * G11 - t1 * G12) / det

    def value(m: int, n: int) -> Fraction:
        b = beta0 - m * b1 - n * b2
        return (b * b / alpha).trace()

    m0, n0 = round(m_star), round(n_star)
    best_val = value(m0, n0)
    # all (m, n) with value <= best_val lie in an ellipse around (m*, n*)
    from .field import sqrt_upper

    rm = sqrt_upper(best_val * G22 / det) if best_val > 0 else Fraction(0)
    rn = sqrt_upper(best_val * G11 / det) if best_val > 0 else Fraction(0)
    best = None
    for m in range(int(m_star - rm) - 1, int(m_star + rm) + 2):
        for n in range(int(n_star - rn) - 1, int(n_star + rn) + 2):
            val = value(m, n)
            if val > best_val:
                continue
            b = beta0 - m * b1 - n * b2
            key = (val, b.coords())
            if best is None or key < best[0]:
                best = (key, b)
            if val < best_val:
                best_val = val
    return best[1]


def beta_candidates(
    ctx: FieldContext, psi: QNum, alpha: QNum, J: int, merge_signs: bool = False
) -> list[tuple[QNum, QNum]]:
    """(beta, eta) pairs, one per congruence class of solutions of the
    eta-integrality conditions, beta chosen trace-minimal in its class.

    eta = (J^2 psi + beta^2) / (J^2 alpha); integrality is invariant on
    cosets of J*alpha*O_K, which is exactly the congruence-class relation.
    """
    d1, row2, g = _coset_basis(ctx, alpha, J)
    denom = J * J * alpha
    base = J * J * psi
    out = []
    seen: set[tuple[int, int]] = set()
    for i in range(d1):
        for j in range(g):
            if (i, j) in seen:
                continue
            beta0 = ctx.from_coords(i, j)
            eta = (base + beta0 * beta0) / denom
            if not eta.is_integral():
                continue
            seen.add((i, j))
            if merge_signs:
                seen.add(_coset_key((-beta0).coords(), d1, row2, g))
            beta = _trace_min_rep(ctx, alpha, J, beta0)
            eta = (base + beta * beta) / denom
            if not eta.is_integral():
                raise InternalInvariantError("eta integrality lost in class reduction")
            out.append((beta, eta))
    return out


# ---------------------------------------------------------------------------
# equivalence
# ---------------------------------------------------------------------------


def _unit_square_ratio(ctx: FieldContext, r: QNum) -> bool:
    """r == eps^(2k) for some k?"""
    if not r.is_integral() or r.norm() != 1 or not r.is_totally_positive():
        return False
    return canonical_mod_unit_squares(ctx, r) == 1


def _sos_obstruction(Q: BinaryForm, H: BinaryForm) -> bool:
    """True when the sum-of-squares criterion proves inequivalence of two
    alpha*x^2 + 2b*xy + alpha'*y^2 shaped forms."""
    shaped = (
        Q.eta == Q.alpha.conj()
        and Q.c.is_rational()
        and H.eta == H.alpha.conj()
        and H.c.is_rational()
        and not Q.alpha.is_rational()
        and not H.alpha.is_rational()
    )
    if not shaped:
        return False
    ctx = Q.ctx
    try:
        if sum_of_squares(ctx, Q.alpha * H.alpha, max_nodes=20_000) is None:
            return True
        if sum_of_squares(ctx, Q.alpha.conj() * H.alpha, max_nodes=20_000) is None:
            return True
    except BudgetExceeded:
        return False
    return False


def are_equivalent(Q: BinaryForm, H: BinaryForm):
    """Transition matrix U with U M_Q U^t = M_H, or None.

    Complete: representations of H's diagonal values by Q are enumerated
    through the trace-form ellipsoid, and any witness matrix has rows of
    exactly that kind.
    """
    if Q.ctx.D != H.ctx.D:
        raise MixedFields("forms over different fields")
    ctx = Q.ctx
    if Q.is_classical() != H.is_classical():
        return None
    dq, dh = Q.det(), H.det()
    if dq.norm() != dh.norm():
        return None
    if not _unit_square_ratio(ctx, dh / dq):
        return None
    if Q.min_norm()[0] != H.min_norm()[0]:
        return None
    if _sos_obstruction(Q, H):
        return None
    reps_alpha = [v for v in vectors_by_trace(Q, H.alpha.trace(), "=") if Q.value(*v) == H.alpha]
    if not reps_alpha:
        return None
    reps_eta = [v for v in vectors_by_trace(Q, H.eta.trace(), "=") if Q.value(*v) == H.eta]
    if not reps_eta:
        return None
    half_c = H.c / 2
    for v1 in reps_alpha:
        for v2 in reps_eta:
            for sgn in (1, -1):
                w2 = (sgn * v2[0], sgn * v2[1])
                if Q.bilinear(v1, w2) != half_c:
                    continue
                det = v1[0] * w2[1] - v1[1] * w2[0]
                if det.is_integral() and abs(det.norm()) == 1:
                    return (v1, w2)
    return None


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class ClassEntry:
    form: BinaryForm
    psi: QNum
    alpha: QNum
    beta: QNum
    indecomposable: bool = True

    def sort_key(self):
        d = self.form.det()
        return (d.norm(), d.trace(), self.alpha.norm(), self.beta.coords())

    def to_json(self) -> dict:
        f = self.form
        return {
            "alpha": format_qnum(f.alpha),
            "c": format_qnum(f.c),
            "eta": format_qnum(f.eta),
            "det": format_qnum(f.det()),
            "det_norm": format_fraction(f.det().norm()),
            "min_norm": format_fraction(f.min_norm()[0]),
            "psi": format_qnum(self.psi),
            "beta": format_qnum(self.beta),
            "indecomposable": self.indecomposable,
        }


@dataclass
class ClassificationReport:
    D: int
    mode: str
    det_bound_display: str
    gamma_source: str
    classes: list[ClassEntry]
    pruning: dict
    partial: bool
    kind: str = "indecomposable"  # or "census"

    def to_json(self) -> dict:
        return {
            "d": self.D,
            "mode": self.mode,
            "det_bound": self.det_bound_display,
            "gamma_source": self.gamma_source,
            "kind": self.kind,
            "classes": [c.to_json() for c in self.classes],
            "pruning": self.pruning,
            "partial": self.partial,
        }


@dataclass
class ClassifyOptions:
    det_bound: Fraction | None = None
    timeout: float | None = None
    jobs: int = 1
    resume_path: str | None = None
    merge_signs: bool = True


def _psi_key(psi: QNum) -> str:
    return format_qnum(psi)


def _process_psi(
    ctx: FieldContext,
    psi: QNum,
    J: int,
    mode: str,
    pool: list[QNum],
    keep: str,
    merge_signs: bool,
):
    """All inequivalent surviving forms for one determinant representative."""
    stats = {
        "alphas_window": 0,
        "alphas_kept": 0,
        "beta_classes": 0,
        "dropped_norm_order": 0,
        "decomposed": 0,
        "rank1_reduced": 0,
        "candidates": 0,
    }
    survivors: list[ClassEntry] = []
    alphas = min_candidates(ctx, psi, J, pool)
    stats["alphas_kept"] = len(alphas)
    for alpha in alphas:
        for beta, eta in beta_candidates(ctx, psi, alpha, J, merge_signs=merge_signs):
            stats["beta_classes"] += 1
            if alpha.norm() > eta.norm():
                stats["dropped_norm_order"] += 1
                continue
            Q = BinaryForm(alpha, 2 * beta if J == 1 else beta, eta)
            if not is_tpd(Q):
                raise InternalInvariantError(f"candidate not definite: {Q.literal()}")
            stats["candidates"] += 1
            if keep == "indecomposable":
                if find_decomposition(Q, mode) is not None:
                    stats["decomposed"] += 1
                    continue
            else:
                if rank1_reducible(Q, mode) is not None:
                    stats["rank1_reduced"] += 1
                    continue
            entry = ClassEntry(Q, psi, alpha, beta)
            if keep == "census":
                entry.indecomposable = find_decomposition(Q, mode) is None
            if not any(are_equivalent(s.form, Q) for s in survivors):
                survivors.append(entry)
    survivors.sort(key=ClassEntry.sort_key)
    return survivors, stats


def _run_driver(
    ctx: FieldContext,
    mode: str,
    options: ClassifyOptions,
    keep: str,
) -> ClassificationReport:
    _check_mode(mode)
    J = 1 if mode == CLASSICAL else 2
    full_B = det_bound_full(ctx)
    if options.det_bound is not None:
        bound = SurdVal(options.det_bound)
        # a cap above the full bound is not a truncation
        truncated_by_bound = full_B.cmp(options.det_bound) > 0
        bound_display = format_fraction(options.det_bound)
    else:
        bound = full_B
        truncated_by_bound = False
        bound_display = f"gamma^2*C^2 = {float(full_B):.6g}"
    psis = det_candidates(ctx, J, bound)
    pool = alpha_pool(ctx, full_B)
    start = time.monotonic()
    done_keys: set[str] = set()
    classes: list[ClassEntry] = []
    agg: dict = {}
    state = _load_state(options.resume_path, ctx, J)
    if state:
        done_keys, classes = state

    timed_out = False
    for psi in psis:
        key = _psi_key(psi)
        if key in done_keys:
            continue
        if options.timeout is not None and time.monotonic() - start > options.timeout:
            timed_out = True
            break
        survivors, stats = _process_psi(ctx, psi, J, mode, pool, keep, options.merge_signs)
        for k, v in stats.items():
            agg[k] = agg.get(k, 0) + v
        classes.extend(survivors)
        done_keys.add(key)
        if options.resume_path:
            _save_state(options.resume_path, ctx, J, done_keys, classes)

    classes.sort(key=ClassEntry.sort_key)
    agg["psis_total"] = len(psis)
    agg["psis_done"] = len(done_keys)

    # post-hoc soundness: every representative re-passes its decision
    for entry in classes:
        if keep == "indecomposable":
            if find_decomposition(entry.form, mode) is not None:
                raise InternalInvariantError(
                    f"class representative decomposed on re-check: {entry.form.literal()}"
                )
        else:
            if rank1_reducible(entry.form, mode) is not None:
                raise InternalInvariantError(
                    f"census representative rank-1 reduced on re-check: {entry.form.literal()}"
                )

    return ClassificationReport(
        D=ctx.D,
        mode=mode,
        det_bound_display=bound_display,
        gamma_source=("table" if ctx.hermite2_exact else "Delta/2 bound"),
        classes=classes,
        pruning=agg,
        partial=timed_out or truncated_by_bound,
        kind=keep,
    )


def classify(ctx: FieldContext, mode: str, options: ClassifyOptions | None = None) -> ClassificationReport:
    """All additively indecomposable classes with N(det) < B, up to equivalence."""
    return _run_driver(ctx, mode, options or ClassifyOptions(), "indecomposable")


def census(ctx: FieldContext, mode: str, options: ClassifyOptions | None = None) -> ClassificationReport:
    """All classes with N(det) < B admitting no rank-1 split (det(Q1) = 0)."""
    return _run_driver(ctx, mode, options or ClassifyOptions(), "census")


def _load_state(path: str | None, ctx: FieldContext, J: int):
    if not path or not os.path.exists(path):
        return None
    with open(path) as fh:
        data = json.load(fh)
    if data.get("D") != ctx.D or data.get("J") != J:
        return None
    done = set(data["done"])
    classes = []
    for item in data["classes"]:
        form = BinaryForm(
            parse_qnum(ctx, item["alpha"]),
            parse_qnum(ctx, item["c"]),
            parse_qnum(ctx, item["eta"]),
        )
        entry = ClassEntry(
            form,
            parse_qnum(ctx, item["psi"]),
            parse_qnum(ctx, item["alpha_min"]),
            parse_qnum(ctx, item["beta"]),
            item.get("indecomposable", True),
        )
        classes.append(entry)
    return done, classes


def _save_state(
    path: str, ctx: FieldContext, J: int, done: set[str], classes: list[ClassEntry]
) -> None:
    data = {
        "D": ctx.D,
        "J": J,
        "done": sorted(done),
        "classes": [
            {
                "alpha": format_qnum(e.form.alpha),
                "c": format_qnum(e.form.c),
                "eta": format_qnum(e.form.eta),
                "psi": format_qnum(e.psi),
                "alpha_min": format_qnum(e.alpha),
                "beta": format_qnum(e.beta),
                "indecomposable": e.indecomposable,
            }
            for e in classes
        ],
    }
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(data, fh)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# constructive families
# ---------------------------------------------------------------------------


def family_m2p1(m: int) -> tuple[FieldContext, list[BinaryForm]]:
    """Pairwise inequivalent indecomposable forms alpha_i x^2 + 2k xy + alpha_i' y^2
    over Q(sqrt(m^2+1)), m odd: 1 <= i <= m, 0 < k^2 < N(alpha_i)."""
    if m % 2 == 0:
        raise NotOdd(f"m={m} must be odd")
    D = m * m + 1
    if not is_square_free(D):
        raise NotSquareFree(f"m^2+1={D} is not square-free")
    ctx = make_context(D)
    forms = []
    alphas = []
    for i in range(1, m + 1):
        a = ctx.qnum(m * i + 1, i)
        if decompose_integer(ctx, a) is not None:
            raise InternalInvariantError(f"alpha_{i} unexpectedly decomposable")
        alphas.append((i, a))
        na = a.norm()
        k = 1
        while k * k < na:
            Q = BinaryForm(a, ctx.qnum(2 * k), a.conj())
            if not inde_from_inde_check(Q):
                raise InternalInvariantError("fast indecomposability path failed")
            forms.append(Q)
            k += 1
    # certify pairwise inequivalence: distinct i via the sum-of-squares
    # obstruction, distinct k via (rational, hence equal) determinants
    for idx_i, (i, a) in enumerate(alphas):
        for j, b in alphas[idx_i + 1 :]:
            if sum_of_squares(ctx, a * b.conj()) is not None:
                raise InternalInvariantError(
                    f"sum-of-squares obstruction failed for i={i}, j={j}"
                )
    return ctx, forms


def _primes_1_mod_4(count: int) -> list[int]:
    out = []
    n = 5
    while len(out) < count:
        if n % 4 == 1 and all(n % p for p in range(2, int(n**0.5) + 1)):
            out.append(n)
        n += 2
    return out


def fixed_det_demo(n: int, max_s: int = 2):
    """(D, d, forms): >= n inequivalent indecomposable forms of one rational
    determinant d over Q(sqrt(D)), from the m = 3*prod(p_i) construction."""
    for s in range(1, max_s + 1):
        ps = _primes_1_mod_4(s)
        m = 3
        prod = 1
        for p in ps:
            m *= p
            prod *= p
        D = m * m + 1
        if not is_square_free(D):
            continue
        d = prod * prod + 1
        target = D - d  # j^2 + k^2 with j, k > 0
        pairs = []
        j = 1
        while j * j < target:
            k2 = target - j * j
            k = int(k2**0.5)
            while k * k < k2:
                k += 1
            if k * k == k2 and k > 0:
                pairs.append((j, k))
            j += 1
        if len(pairs) < n:
            continue
        ctx = make_context(D)
        forms = []
        for j, k in pairs:
            i = m - j
            if not (1 <= i <= m):
                continue
            a = ctx.qnum(m * i + 1, i)
            Q = BinaryForm(a, ctx.qnum(2 * k), a.conj())
            if Q.det() != ctx.qnum(d):
                raise InternalInvariantError("determinant mismatch in fixed-det family")
            if not inde_from_inde_check(Q):
                raise InternalInvariantError("indecomposability certificate failed")
            forms.append(Q)
        if len(forms) >= n:
            jacobi_count = len(pairs)
            return ctx, d, forms, jacobi_count
    raise BudgetExceeded(f"fixed-determinant construction budget (max_s={max_s}) exhausted")
