"""Quadratic programs with bordered-Z-matrix data, solved by level-set bisection.

The feasibility test at each level is the alternative engine run on the
augmented family {q - gamma} + constraints: a feasible point means the level
is achievable, a certificate means it is too low.  Optimality is certified
by Fritz John multipliers (normalized y + sum u = 1) found by search and
verified through exact aggregate infima, and by KKT checks with sampled
cross-validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .engine import (
    EngineConfig,
    FeasiblePoint,
    Certificate,
    decide_alternative,
    _search_certificate,
    _search_feasible,
)
from .errors import (
    DimensionMismatchError,
    IndeterminateOutcomeError,
    UnsupportedDomainError,
)
from .infimum import _simplex_quadform_min, quadratic_infimum
from .quadratics import (
    ConeWeight,
    Domain,
    NonnegOrthant,
    QuadraticFamily,
    QuadraticFunction,
    Reals,
    aggregate,
    eval_quadratic,
)
from .sampling import rng_stream, simplex_lattice_array
from .zmatrix import z_family_report

TOL_BISECT = 1e-8
ATTAIN_TOL = 1e-6
ACTIVE_TOL = 1e-5
MAX_BISECT = 120
UNBOUNDED_SPAN = 1e8


@dataclass(frozen=True, eq=False)
class QpProblem:
    """Minimize a quadratic over {x in X : q_j(x) <= 0 for all j}.

    The bordered matrices of the objective and of every constraint must be
    Z-matrices, and X must be the reals or the nonnegative orthant (any
    other set between them has no exact optimality check here and is
    rejected).
    """

    objective: QuadraticFunction
    constraints: QuadraticFamily
    domain: Domain

    def __post_init__(self):
        if not isinstance(self.domain, (Reals, NonnegOrthant)):
            raise UnsupportedDomainError(
                "QP domain must be Reals or NonnegOrthant"
            )
        if self.objective.dim != self.constraints.dim or self.objective.dim != self.domain.dim:
            raise DimensionMismatchError("objective, constraints, and domain dimensions differ")
        from .quadratics import is_psd
        from .zmatrix import bordered, is_z_matrix

        flag, offenders = is_z_matrix(bordered(self.objective))
        report = z_family_report(self.constraints)
        if flag and report.family_is_z:
            return
        # Convex data also makes every level family infsup-convex, so the
        # level-set machinery stays exact; everything else is rejected.
        if is_psd(self.objective.a) and all(is_psd(q.a) for q in self.constraints.members):
            return
        if not flag:
            raise ValueError(
                f"objective bordered matrix is not a Z-matrix (offenders {offenders}) "
                "and the data is not convex"
            )
        bad = [i for i, r in enumerate(report.members) if not r.is_z]
        raise ValueError(
            f"constraints {bad} fail the bordered Z-matrix condition and the data is not convex"
        )

    def constraint_values(self, x) -> np.ndarray:
        return self.constraints.eval_members(np.asarray(x, dtype=float).reshape(1, -1))[:, 0]


@dataclass(frozen=True, eq=False)
class FritzJohnCertificate:
    """Multipliers (y, u) >= 0 with y + sum(u) = 1 for the Fritz John conditions."""

    y: float
    u: ConeWeight

    def __post_init__(self):
        if self.y < -1e-12:
            raise ValueError("objective multiplier must be nonnegative")
        total = self.y + float(self.u.u.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"multipliers must be normalized to 1, got {total!r}")
        object.__setattr__(self, "y", max(0.0, float(self.y)))


@dataclass(frozen=True, eq=False)
class KktCertificate:
    u: ConeWeight
    x0: np.ndarray


@dataclass(frozen=True, eq=False)
class LevelsetResult:
    status: str  # "converged" | "infeasible" | "unbounded"
    value: float
    x0: Optional[np.ndarray]
    iterations: int
    bracket: tuple
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class FjSearchResult:
    found: bool
    certificate: Optional[FritzJohnCertificate]
    residuals: dict
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class KktReport:
    valid: bool
    residuals: dict
    sampled_ok: bool
    sample_count: int


def slater_check(p: QpProblem, cfg: EngineConfig) -> Optional[np.ndarray]:
    """A strictly feasible point for the constraints, or None when certified out.

    Raises IndeterminateOutcomeError when the constraint alternative lands
    in the tolerance band.
    """
    outcome = decide_alternative(p.constraints, p.domain, cfg)
    if isinstance(outcome, FeasiblePoint):
        return outcome.x
    if isinstance(outcome, Certificate):
        return None
    raise IndeterminateOutcomeError("Slater check landed in the tolerance band", outcome)


def _level_family(p: QpProblem, gamma: float) -> QuadraticFamily:
    members = (p.objective.shifted(gamma),) + p.constraints.members
    return QuadraticFamily(members)


def _level_config(cfg: EngineConfig) -> EngineConfig:
    """A lighter search budget for the many per-level tests; warm seeds
    carry most of the work between bisection steps."""
    from dataclasses import replace

    return replace(cfg, multistart_count=min(cfg.multistart_count, 32),
                   refine_iters=min(cfg.refine_iters, 120))


def _test_level(p: QpProblem, gamma: float, cfg: EngineConfig,
                warm_x: Optional[np.ndarray], warm_t: Optional[np.ndarray]):
    """Classify a level as achievable ('a1'), too low ('a2'), or unresolved."""
    cfg = _level_config(cfg)
    fam = _level_family(p, gamma)
    # Warm fast paths: re-evaluating the previous witness or certificate at
    # the new level settles most bisection steps without a fresh search.
    if warm_x is not None and fam.sup_at(warm_x) < -cfg.delta_strict:
        return "a1", np.asarray(warm_x, dtype=float).copy(), None
    if warm_t is not None:
        from .engine import _aggregate_inf_scalar

        if _aggregate_inf_scalar(fam, warm_t, p.domain) >= -cfg.tol_cert:
            return "a2", None, warm_t
    seeds = None if warm_x is None else np.atleast_2d(warm_x)
    x, sup_val = _search_feasible(fam, p.domain, cfg, extra_seeds=seeds)
    if sup_val < -cfg.delta_strict:
        return "a1", x, None
    t, inf_val, agg_argmin = _search_certificate(fam, p.domain, cfg, seed_weight=warm_t)
    if inf_val >= -cfg.tol_cert:
        return "a2", None, t
    if agg_argmin is not None:
        x2, sup2 = _search_feasible(fam, p.domain, cfg, extra_seeds=np.atleast_2d(agg_argmin))
        if sup2 < -cfg.delta_strict:
            return "a1", x2, None
    return "band", x, t


def _kkt_newton_polish(p: QpProblem, x0: np.ndarray, iters: int = 30):
    """Refine a near-optimal point by Newton steps on the active KKT system.

    Fixes the active sets read off at ``x0`` (constraints near zero, and on
    the orthant also coordinates near zero) and solves stationarity plus
    active-constraint equations.  Returns (x, u_active_map) on success,
    None when the step diverges or verification fails.
    """
    n = p.objective.dim
    cons = p.constraint_values(x0)
    scale = 1.0 + float(np.abs(cons).max())
    act = np.where(cons >= -ACTIVE_TOL * scale)[0]
    if isinstance(p.domain, NonnegOrthant):
        free = np.where(x0 > ACTIVE_TOL * (1.0 + np.abs(x0).max()))[0]
    else:
        free = np.arange(n)
    x = x0.copy()
    if isinstance(p.domain, NonnegOrthant):
        fixed_mask = np.ones(n, dtype=bool)
        fixed_mask[free] = False
        x[fixed_mask] = 0.0
    u = np.zeros(len(act))
    a_obj, b_obj = p.objective.a.entries, p.objective.b
    a_c, b_c, _ = p.constraints.coefficient_stacks()
    nf, na = len(free), len(act)
    if na > nf:
        act = act[:nf]
        na = nf
        u = u[:na]
    for _ in range(iters):
        grad = a_obj @ x + b_obj
        grads_act = a_c[act] @ x + b_c[act]
        f_top = grad[free] + (u @ grads_act[:, free] if na else 0.0)
        f_bot = p.constraint_values(x)[act]
        f = np.concatenate([np.atleast_1d(f_top), f_bot])
        if np.linalg.norm(f) <= 1e-13 * scale:
            break
        h = a_obj + (np.einsum("m,mij->ij", u, a_c[act]) if na else 0.0)
        jac = np.zeros((nf + na, nf + na))
        jac[:nf, :nf] = h[np.ix_(free, free)]
        if na:
            jac[:nf, nf:] = grads_act[:, free].T
            jac[nf:, :nf] = grads_act[:, free]
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)) or np.linalg.norm(step) > 1e6:
            return None
        x[free] += step[:nf]
        u += step[nf:]
    cons = p.constraint_values(x)
    feasible = cons.max() <= 1e-10 * scale
    if isinstance(p.domain, NonnegOrthant):
        feasible &= x.min() >= -1e-10
        x = np.maximum(x, 0.0)
    if not feasible or np.any(u < -1e-7):
        return None
    u_map = {int(j): max(0.0, float(v)) for j, v in zip(act, u)}
    return x, u_map


def solve_levelset(p: QpProblem, cfg: EngineConfig, tol_bisect: float = TOL_BISECT) -> LevelsetResult:
    """Bisection on the objective level, driven by the alternative engine.

    The bracket starts at [inf_X q, q(feasible point)]; a feasible-point
    outcome at level gamma shrinks the upper end to the witness value, a
    certificate raises the lower end.  Ends when the bracket is below
    ``tol_bisect`` or the level test lands in its tolerance band, then
    polishes the incumbent with Newton steps on the active KKT system.
    """
    diagnostics: dict = {}
    fam = p.constraints
    x_f, v_f = _search_feasible(fam, p.domain, cfg)
    if v_f > cfg.tol_cert:
        t, inf_val, _ = _search_certificate(fam, p.domain, cfg)
        diagnostics["constraint_certificate_inf"] = inf_val
        diagnostics["best_constraint_sup"] = v_f
        return LevelsetResult("infeasible", math.inf, None, 0, (math.nan, math.nan), diagnostics)

    upper = eval_quadratic(p.objective, x_f)
    x_best = x_f.copy()
    lower_res = quadratic_infimum(p.objective, p.domain)
    iterations = 0
    warm_t: Optional[np.ndarray] = None
    if np.isfinite(lower_res.value):
        lower = lower_res.value
        if lower_res.argmin is not None:
            g_at_min = fam.eval_members(lower_res.argmin.reshape(1, -1)).max()
            if g_at_min <= 0.0:
                # The unconstrained minimizer is feasible: done.
                x0 = lower_res.argmin
                return LevelsetResult("converged", eval_quadratic(p.objective, x0), x0, 0,
                                      (lower, lower), diagnostics)
    else:
        gap = 1.0
        lower = None
        upper0 = upper
        while gap <= UNBOUNDED_SPAN * (1.0 + abs(upper0)):
            gamma = upper0 - gap
            verdict, x_w, t_w = _test_level(p, gamma, cfg, x_best, warm_t)
            iterations += 1
            if verdict == "a2":
                lower = gamma
                warm_t = t_w
                break
            if verdict == "a1":
                x_best = x_w
                upper = min(upper, eval_quadratic(p.objective, x_w))
            gap *= 8.0
        if lower is None:
            diagnostics["last_witness_value"] = upper
            return LevelsetResult("unbounded", -math.inf, x_best, iterations,
                                  (-math.inf, upper), diagnostics)

    band_hits = 0
    history = [(lower, upper)]
    while upper - lower > tol_bisect and iterations < MAX_BISECT:
        gamma = 0.5 * (lower + upper)
        verdict, x_w, t_w = _test_level(p, gamma, cfg, x_best, warm_t)
        iterations += 1
        if verdict == "a1":
            x_best = x_w
            upper = min(upper, eval_quadratic(p.objective, x_w))
        elif verdict == "a2":
            lower = gamma
            warm_t = t_w
        else:
            band_hits += 1
            diagnostics["band_at"] = gamma
            if band_hits >= 2:
                break
            # Offset probe: an off-center level usually leaves the band.
            gamma2 = lower + 0.75 * (upper - lower)
            verdict2, x_w2, t_w2 = _test_level(p, gamma2, cfg, x_best, warm_t)
            iterations += 1
            if verdict2 == "a1":
                x_best = x_w2
                upper = min(upper, eval_quadratic(p.objective, x_w2))
            elif verdict2 == "a2":
                lower = gamma2
                warm_t = t_w2
            else:
                break
        history.append((lower, upper))

    polished = _kkt_newton_polish(p, x_best)
    if polished is not None:
        x_new, u_map = polished
        val_new = eval_quadratic(p.objective, x_new)
        if val_new <= eval_quadratic(p.objective, x_best) + tol_bisect:
            x_best = x_new
            diagnostics["kkt_polish_multipliers"] = u_map
    value = eval_quadratic(p.objective, x_best)
    diagnostics["band_hits"] = band_hits
    diagnostics["bracket_history"] = history
    return LevelsetResult("converged", value, x_best, iterations, (lower, upper), diagnostics)


# --------------------------------------------------------------------------
# Fritz John search


def _attains_inf_gap(p: QpProblem, weights: np.ndarray, x0: np.ndarray) -> float:
    """agg(x0) - inf_X(agg) for the weighted sum y*q + sum u_j q_j (>= 0)."""
    ext = QuadraticFamily((p.objective,) + p.constraints.members)
    agg = aggregate(ext, weights)
    inf_res = quadratic_infimum(agg, p.domain)
    if not np.isfinite(inf_res.value):
        return math.inf
    return eval_quadratic(agg, x0) - inf_res.value


def _fj_residual(p: QpProblem, weights: np.ndarray, x0: np.ndarray, cons_at_x0: np.ndarray) -> float:
    gap = _attains_inf_gap(p, weights, x0)
    slack = abs(float(weights[1:] @ cons_at_x0))
    return max(gap, slack)


def _stationarity_matrix(p: QpProblem, x0: np.ndarray, act: np.ndarray) -> np.ndarray:
    cols = [p.objective.gradient(x0)]
    for j in act:
        cols.append(p.constraints.members[j].gradient(x0))
    return np.stack(cols, axis=1)


def _algebraic_candidates(p: QpProblem, x0: np.ndarray, act: np.ndarray):
    """Simplex weights minimizing the stationarity residual at x0.

    Over the reals this is an exact quadratic-over-simplex minimization;
    on the orthant, rows at zero coordinates may be nonnegative instead of
    zero, handled by an active-row cutting loop.
    """
    g = _stationarity_matrix(p, x0, act)
    n = x0.shape[0]
    if isinstance(p.domain, NonnegOrthant):
        zero_rows = np.where(x0 <= ACTIVE_TOL * (1.0 + np.abs(x0).max()))[0]
    else:
        zero_rows = np.array([], dtype=int)
    free_rows = np.setdiff1d(np.arange(n), zero_rows)
    candidates = []
    forced = np.array([], dtype=int)
    for _ in range(len(zero_rows) + 1):
        rows = np.concatenate([free_rows, forced])
        sub = g[rows] if len(rows) else np.zeros((1, g.shape[1]))
        _, w = _simplex_quadform_min(sub.T @ sub)
        if w is None:
            break
        candidates.append(w)
        viol = [k for k in zero_rows if k not in forced and float(g[k] @ w) < -1e-10]
        if not viol:
            break
        forced = np.concatenate([forced, [viol[0]]])
    return candidates


def fritz_john_search(p: QpProblem, x0, cfg: EngineConfig) -> FjSearchResult:
    """Search normalized multipliers (y, u) certifying x0 by the Fritz John conditions.

    Candidates come from the simplex lattice and from exact stationarity
    solves on the active set; each is verified by the attains-its-infimum
    gap (exact aggregate infimum versus the value at x0) and complementary
    slackness.  When nothing verifies, the best residuals are reported,
    which signals that x0 is likely not optimal.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape[0] != p.objective.dim:
        raise DimensionMismatchError("x0 dimension mismatch")
    cons = p.constraint_values(x0)
    scale = 1.0 + float(np.abs(cons).max())
    if cons.max() > ACTIVE_TOL * scale:
        raise ValueError(f"x0 violates the constraints by {cons.max():.3e}")
    m = p.constraints.size
    act = np.where(cons >= -ACTIVE_TOL * scale)[0]

    def expand(w_small: np.ndarray) -> np.ndarray:
        w = np.zeros(1 + m)
        w[0] = w_small[0]
        for pos, j in enumerate(act):
            w[1 + j] = w_small[1 + pos]
        return w

    dim = 1 + len(act)
    cand_small = [row for row in simplex_lattice_array(dim, min(cfg.simplex_grid_resolution, 16))]
    cand_small.extend(_algebraic_candidates(p, x0, act))
    best_w, best_res = None, math.inf
    for w_small in cand_small:
        w = expand(np.asarray(w_small))
        res = _fj_residual(p, w, x0, cons)
        if res < best_res:
            best_res, best_w = res, w

    # Pairwise golden refinement of the (convex) residual over the small simplex.
    w_small = np.zeros(dim)
    w_small[0] = best_w[0]
    for pos, j in enumerate(act):
        w_small[1 + pos] = best_w[1 + j]
    if dim > 1:
        gold = (math.sqrt(5.0) - 1.0) / 2.0
        for _ in range(3):
            improved = False
            for i in range(dim):
                for j in range(i + 1, dim):
                    s = w_small[i] + w_small[j]
                    if s <= 1e-15:
                        continue

                    def h(theta):
                        cand = w_small.copy()
                        cand[i], cand[j] = theta, s - theta
                        return _fj_residual(p, expand(cand), x0, cons)

                    a, b = 0.0, s
                    c1, c2 = b - gold * (b - a), a + gold * (b - a)
                    f1, f2 = h(c1), h(c2)
                    for _k in range(60):
                        if b - a <= 1e-15 * (1.0 + s):
                            break
                        if f1 > f2:
                            a, c1, f1 = c1, c2, f2
                            c2 = a + gold * (b - a)
                            f2 = h(c2)
                        else:
                            b, c2, f2 = c2, c1, f1
                            c1 = b - gold * (b - a)
                            f1 = h(c1)
                    theta = c1 if f1 <= f2 else c2
                    val = min(f1, f2)
                    if val < best_res - 1e-18:
                        w_small[i], w_small[j] = theta, s - theta
                        best_res, best_w = val, expand(w_small)
                        improved = True
            if not improved:
                break

    gap = _attains_inf_gap(p, best_w, x0)
    slack = abs(float(best_w[1:] @ cons))
    agg = aggregate(QuadraticFamily((p.objective,) + p.constraints.members), best_w)
    grad_norm = float(np.linalg.norm(agg.gradient(x0)))
    tol_fj = max(ATTAIN_TOL, 100.0 * cfg.tol_cert)
    found = bool(gap <= tol_fj and slack <= max(cfg.tol_cert * scale, 1e-10))
    cert = None
    if found:
        cert = FritzJohnCertificate(float(best_w[0]), ConeWeight(best_w[1:]))
    residuals = {
        "attain_gap": gap,
        "slackness": slack,
        "stationarity_norm": grad_norm,
        "objective_multiplier": float(best_w[0]),
    }
    return FjSearchResult(found, cert, residuals, {"active_set": act.tolist()})


def kkt_check(p: QpProblem, cert: KktCertificate, cfg: EngineConfig,
              sample_count: int = 10_000) -> KktReport:
    """Verify the KKT conditions at (x0, u) and cross-check against samples.

    Valid iff (1) q + sum u_j q_j attains its infimum over X at x0 within
    tolerance, (2) x0 is feasible, and (3) complementary slackness holds.
    Validity implies optimality, which is additionally spot-checked on
    sampled feasible points.
    """
    x0 = np.asarray(cert.x0, dtype=float).reshape(-1)
    u = cert.u.u
    if u.shape[0] != p.constraints.size or x0.shape[0] != p.objective.dim:
        raise DimensionMismatchError("certificate shapes do not match the problem")
    cons = p.constraint_values(x0)
    scale = 1.0 + float(np.abs(cons).max())
    weights = np.concatenate([[1.0], u])
    gap = _attains_inf_gap(p, weights, x0)
    feas = float(cons.max())
    slack = abs(float(u @ cons))
    cond1 = gap <= max(ATTAIN_TOL, 100.0 * cfg.tol_cert)
    cond2 = feas <= cfg.tol_cert * scale
    cond3 = slack <= max(cfg.tol_cert * scale, 1e-10)
    valid = bool(cond1 and cond2 and cond3)

    pts = sample_feasible(p, sample_count, cfg.seed, center=x0)
    v0 = eval_quadratic(p.objective, x0)
    if len(pts):
        vals = 0.5 * np.einsum("ki,ij,kj->k", pts, p.objective.a.entries, pts) \
            + pts @ p.objective.b + p.objective.c
        sample_gap = float(v0 - vals.min())
        sampled_ok = bool(sample_gap <= 1e-6)
    else:
        sample_gap = 0.0
        sampled_ok = True
    residuals = {
        "attain_gap": gap,
        "feasibility": feas,
        "slackness": slack,
        "sample_suboptimality": sample_gap,
    }
    return KktReport(valid, residuals, sampled_ok, int(len(pts)))


def sample_feasible(p: QpProblem, count: int, seed: int,
                    center: Optional[np.ndarray] = None, max_rounds: int = 40) -> np.ndarray:
    """Up to ``count`` feasible points, by rejection from boxes of varied width."""
    n = p.objective.dim
    rng = rng_stream(seed, stream=505)
    collected = []
    total = 0
    width = 8.0
    for round_idx in range(max_rounds):
        draw = rng.uniform(-width, width, size=(max(count, 256), n))
        if isinstance(p.domain, NonnegOrthant):
            draw = np.abs(draw)
        if center is not None and round_idx % 2 == 1:
            local = center + rng.normal(scale=max(width / 16.0, 1e-3), size=(max(count, 256), n))
            if isinstance(p.domain, NonnegOrthant):
                local = np.maximum(local, 0.0)
            draw = local
        vals = p.constraints.eval_members(draw).max(axis=0)
        ok = draw[vals <= 0.0]
        if len(ok):
            collected.append(ok)
            total += len(ok)
        if total >= count:
            break
        width = width * 0.5 if round_idx % 3 == 2 else width
        if width < 1e-3:
            width = 8.0
    if not collected:
        return np.empty((0, n))
    return np.vstack(collected)[:count]
