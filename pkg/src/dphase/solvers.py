"""Critical-point solvers for the discrete energy.

Three regimes:

* ``minimize``: descent along the negative residual with a Barzilai-Borwein
  trial step and backtracking (sufficient decrease).  For the coercive
  regime (mu = 0, lam > 0) this realizes the negative-energy minimizers.
* ``mountain_pass``: elastic-string path deformation between 0 and a
  far point with nonpositive energy.  The path maximizer is descended and
  the path re-tensioned; a ridge polish then deforms the ray family through
  the stabilized maximizer (descent on max_t energy(t d) over directions,
  gradient evaluations only) until the full residual meets tolerance.  Pure
  descend-the-max cannot certify small residuals at fixed path resolution,
  which is why the polish phase exists.
* ``solve_sign_definite``: the two branches with the sign-truncated
  nonlinearity; iterates are clipped to the sign cone (the exact discrete
  critical points of the truncated energy are sign-definite, so clipping is
  inactive near convergence) and the returned field is re-verified.

``multi_solution_sweep`` runs both solvers from randomized seed pairs
(u0, -u0) and deduplicates by distance in the space norm.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from dphase import _kernels as kern
from dphase.functional import (EnergyReport, ProblemSpec, energy,
                               ps_quantity, residual, residual_dual_norm,
                               residual_norm)
from dphase.grid import GridFunction, cone_function, gradient
from dphase.operator import truncate_minus, truncate_plus
from dphase.spaces import luxemburg_norm

__all__ = [
    "SolverOptions",
    "SolverReport",
    "SignDefiniteResult",
    "minimize",
    "mountain_pass",
    "solve_sign_definite",
    "multi_solution_sweep",
    "geometry_probe",
    "x_norm_quick",
]

EXIT_CODES = {
    "success": 0,
    "iteration_cap": 2,
    "geometry_error": 3,
    "sign_violation": 4,
}

SIGN_TOL = 1e-12


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-6
    max_iter: int = 200000
    path_nodes: int = 25
    max_outer: int = 3000
    polish_max: int = 100000
    dedup_tol: float = 1e-3
    seed: int = 0
    trace_every: int = 100
    armijo: float = 1e-4
    far_cap_doublings: int = 40
    divergence_energy: float = -1e12


@dataclass
class SolverReport:
    solution: GridFunction
    energy: EnergyReport
    residual_norm: float
    residual_dual_norm: float
    iterations: int
    classification: str
    status: str
    trace: list = field(default_factory=list)
    message: str = ""

    @property
    def success(self) -> bool:
        return self.status == "success"

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_json_obj(self) -> dict:
        return {
            "status": self.status,
            "exit_code": self.exit_code,
            "classification": self.classification,
            "energy": self.energy.to_json_obj(),
            "residual_norm": self.residual_norm,
            "residual_dual_norm": self.residual_dual_norm,
            "iterations": self.iterations,
            "message": self.message,
        }


@dataclass
class SignDefiniteResult:
    high: SolverReport  # positive-energy (mountain-pass) branch
    low: SolverReport   # negative-energy (small-ball) branch


def _finalize(problem, vals, iterations, classification, status, trace,
              message="") -> SolverReport:
    u = GridFunction(problem.grid, vals)
    r = residual(u, problem)
    return SolverReport(
        solution=u,
        energy=energy(u, problem),
        residual_norm=residual_norm(r),
        residual_dual_norm=residual_dual_norm(r, problem),
        iterations=iterations,
        classification=classification,
        status=status,
        trace=trace,
        message=message,
    )


def x_norm_quick(u: GridFunction, problem, n_thresholds: int = 6) -> float:
    """Reduced-threshold-family space norm, used where the norm only serves
    as a separation measure (deduplication, ball projection)."""
    from dphase.spaces import _field_data, _lux_masked

    nl = luxemburg_norm(u, problem.alpha)
    g = gradient(u)
    absg, pexps, vol = _field_data(g, problem.potential.p)
    _, qexps, _ = _field_data(g, problem.potential.q)
    gmax = float(np.max(absg))
    if gmax == 0.0:
        return nl
    ts = np.unique(np.concatenate([[0.0, 1.0],
                                   np.geomspace(gmax * 1e-4, gmax,
                                                n_thresholds)]))
    best = math.inf
    for t in ts:
        hi = absg > t
        best = min(best, _lux_masked(absg, pexps, vol, hi)
                   + _lux_masked(absg, qexps, vol, ~hi))
    return nl + best


# ---------------------------------------------------------------------------
# descent core


def _clip_sign(vals, sign):
    if sign == "+":
        return np.maximum(vals, 0.0)
    if sign == "-":
        return np.minimum(vals, 0.0)
    return vals


def _descend(problem: ProblemSpec, u0: GridFunction, opts: SolverOptions,
             clip_sign: Optional[str] = None,
             ball_radius: Optional[float] = None):
    """BB-accelerated gradient flow with Armijo backtracking.

    Returns (values, iterations, status, trace, message).  The energy trace
    is non-increasing up to a float plateau tolerance.
    """
    grid = problem.grid
    vol = grid.cell_volume
    vals = _clip_sign(u0.values.copy(), clip_sign)
    u = GridFunction(grid, vals)
    if ball_radius is not None:
        xn = x_norm_quick(u, problem)
        if xn > ball_radius:
            vals = vals * (ball_radius / xn)
            u = GridFunction(grid, vals)

    phi = energy(u, problem).total
    r = residual(u, problem)
    rn = residual_norm(r)
    trace = [(0, phi, rn, ps_quantity(u, problem))]
    step = 1.0
    prev_s = prev_y = None
    status = "iteration_cap"
    message = ""
    it = 0
    for it in range(1, opts.max_iter + 1):
        if rn < opts.tol:
            status = "success"
            break
        if phi < opts.divergence_energy:
            message = "energy unbounded below along the descent flow"
            break
        d = -r.values
        gg = kern.dot(r.values, r.values) * vol
        # BB1 trial step from the previous accepted move
        if prev_s is not None:
            sy = kern.dot(prev_s, prev_y) * vol
            ss = kern.dot(prev_s, prev_s) * vol
            if sy > 0 and math.isfinite(sy):
                step = min(max(ss / sy, 1e-12), 1e6)
            else:
                step = min(step * 2.0, 1e6)
        plateau = 1e-14 * (1.0 + abs(phi))
        accepted = False
        t = step
        for _ in range(60):
            cand = vals + t * d
            if clip_sign is not None:
                cand = _clip_sign(cand, clip_sign)
            phi_c = energy(GridFunction(grid, cand), problem).total
            if phi_c <= phi - opts.armijo * t * gg + plateau:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            message = "line search stalled at the float plateau"
            break
        if ball_radius is not None:
            uc = GridFunction(grid, cand)
            xn = x_norm_quick(uc, problem)
            if xn > ball_radius:
                cand = cand * (ball_radius / xn)
        prev_s = cand - vals
        vals = cand
        u = GridFunction(grid, vals)
        r_new = residual(u, problem)
        prev_y = r_new.values - r.values
        r = r_new
        rn = residual_norm(r)
        phi = energy(u, problem).total
        step = t
        if it % opts.trace_every == 0:
            trace.append((it, phi, rn, ps_quantity(u, problem)))
    trace.append((it, phi, rn, ps_quantity(u, problem)))
    if status != "success" and rn < opts.tol:
        status = "success"
    return vals, it, status, trace, message


def minimize(problem: ProblemSpec, u0: GridFunction,
             opts: SolverOptions = SolverOptions()) -> SolverReport:
    """Descent to a critical point; in the coercive regime this is the
    global minimizer branch."""
    problem.require_valid()
    vals, it, status, trace, msg = _descend(problem, u0, opts)
    return _finalize(problem, vals, it, "minimizer", status, trace, msg)


# ---------------------------------------------------------------------------
# mountain pass


def _ensure_far(problem, far_point: GridFunction, opts: SolverOptions):
    """Scale the seed direction until the energy is nonpositive."""
    vals = far_point.values
    if not np.any(vals):
        return None, "far point must be nonzero"
    t = 1.0
    for _ in range(opts.far_cap_doublings + 1):
        cand = vals * t
        phi = energy(GridFunction(problem.grid, cand), problem).total
        if phi <= 0.0:
            return cand, None
        t *= 2.0
    return None, ("no nonpositive energy along the seed ray after "
                  f"{opts.far_cap_doublings} doublings")


def _retension(path):
    """Resample the polyline at uniform arclength (nodal L2 metric)."""
    m = len(path)
    seg = np.empty(m - 1)
    for j in range(m - 1):
        d = path[j + 1] - path[j]
        seg[j] = math.sqrt(float(np.sum(d * d)))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total == 0.0:
        return path
    targets = np.linspace(0.0, total, m)
    out = [path[0]]
    j = 0
    for t in targets[1:-1]:
        while j < m - 2 and cum[j + 1] < t:
            j += 1
        w = (t - cum[j]) / max(cum[j + 1] - cum[j], 1e-300)
        out.append((1 - w) * path[j] + w * path[j + 1])
    out.append(path[-1])
    return out


def _max_descent_steps(problem, vals, opts, clip_sign, max_move,
                       n_steps=2):
    """A couple of Armijo descent steps on the path maximizer, with the
    total move bounded so the string deforms gradually (descend a little,
    re-tension, re-locate the maximum)."""
    grid = problem.grid
    vol = grid.cell_volume
    u = GridFunction(grid, vals)
    phi = energy(u, problem).total
    for _ in range(n_steps):
        r = residual(u, problem)
        gg = kern.dot(r.values, r.values) * vol
        if gg == 0.0:
            break
        rnod = math.sqrt(float(np.sum(r.values**2)))
        t = max_move / max(rnod, 1e-300)
        plateau = 1e-14 * (1.0 + abs(phi))
        for _ in range(40):
            cand = u.values - t * r.values
            if clip_sign is not None:
                cand = _clip_sign(cand, clip_sign)
            phi_c = energy(GridFunction(grid, cand), problem).total
            if phi_c <= phi - opts.armijo * t * gg + plateau:
                u = GridFunction(grid, cand)
                phi = phi_c
                break
            t *= 0.5
        else:
            break
    return u.values, phi


def _ray_derivative(problem, d_vals, t):
    """d/dt of the energy along the ray t d: the residual paired with d."""
    r = residual(GridFunction(problem.grid, t * d_vals), problem)
    return kern.dot(r.values, d_vals) * problem.grid.cell_volume


def _ray_max(problem, d_vals, warm_t=None, clip_sign=None):
    """Maximize the energy along the ray {t d : t > 0}.

    Cold calls scan a wide logarithmic grid for the global maximum and
    refine by golden section; warm calls run a safeguarded secant on the
    ray derivative around the previous maximizer.  Returns (t, phi) or
    (None, None) when the ray never rises above zero."""
    grid = problem.grid

    def phi_at(t):
        return energy(GridFunction(grid, t * d_vals), problem).total

    if warm_t is None:
        ts = np.geomspace(1e-4, 1e6, 81)
        phis = [phi_at(t) for t in ts]
        k = int(np.argmax(phis))
        if phis[k] <= 0.0:
            return None, None
        a = ts[max(k - 1, 0)]
        b = ts[min(k + 1, len(ts) - 1)]
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        c1 = b - invphi * (b - a)
        d1 = a + invphi * (b - a)
        fc, fd = phi_at(c1), phi_at(d1)
        for _ in range(80):
            if b - a < 1e-9 * b:
                break
            if fc > fd:
                b, d1, fd = d1, c1, fc
                c1 = b - invphi * (b - a)
                fc = phi_at(c1)
            else:
                a, c1, fc = c1, d1, fd
                d1 = a + invphi * (b - a)
                fd = phi_at(d1)
        t = 0.5 * (a + b)
        return t, phi_at(t)

    # warm path: bracket the sign change of the ray derivative around warm_t
    lo = hi = None
    q_lo = q_hi = None
    w = 1e-3
    while w <= 0.999:
        cand = warm_t * (1.0 - w)
        q = _ray_derivative(problem, d_vals, cand)
        if q > 0:
            lo, q_lo = cand, q
            break
        w *= 4.0
    if lo is None:
        return _ray_max(problem, d_vals, None, clip_sign)
    w = 1e-3
    while w <= 1e3:
        cand = warm_t * (1.0 + w)
        q = _ray_derivative(problem, d_vals, cand)
        if q < 0:
            hi, q_hi = cand, q
            break
        w *= 4.0
    if hi is None:
        return _ray_max(problem, d_vals, None, clip_sign)
    # Illinois-damped regula falsi on the derivative: superlinear with a
    # guaranteed bracket, no one-sided stagnation
    side = 0
    for _ in range(60):
        if hi - lo < 1e-12 * hi:
            break
        denom = q_lo - q_hi
        if denom > 0:
            mid = (lo * (-q_hi) + hi * q_lo) / denom
            if not (lo < mid < hi):
                mid = 0.5 * (lo + hi)
        else:
            mid = 0.5 * (lo + hi)
        q_mid = _ray_derivative(problem, d_vals, mid)
        if q_mid > 0:
            lo, q_lo = mid, q_mid
            if side == 1:
                q_hi *= 0.5
            side = 1
        elif q_mid < 0:
            hi, q_hi = mid, q_mid
            if side == -1:
                q_lo *= 0.5
            side = -1
        else:
            lo = hi = mid
            break
    t = 0.5 * (lo + hi)
    phi = energy(GridFunction(grid, t * d_vals), problem).total
    if phi <= 0.0:
        # the warm bracket locked onto a spurious local maximum
        return _ray_max(problem, d_vals, None, clip_sign)
    return t, phi


def _ridge_polish(problem, z0, opts: SolverOptions, clip_sign=None,
                  nonmono_window=8):
    """Descend the ridge functional m(d) = max_t energy(t d) over unit
    directions; by the envelope theorem its gradient at the ray maximizer
    u = t d is t residual(u) projected tangentially, so the flow is a path
    deformation constrained to the ray family.  A direction-space BB step
    with a nonmonotone sufficient-decrease check drives the full residual
    of the ray maximizer below tolerance."""
    grid = problem.grid
    vol = grid.cell_volume

    def normalize(vals):
        if clip_sign is not None:
            vals = _clip_sign(vals, clip_sign)
        n = math.sqrt(float(np.sum(vals * vals)))
        if n == 0.0:
            return None
        return vals / n

    d = normalize(z0.copy())
    if d is None:
        return z0, False, 0, []
    t, m = _ray_max(problem, d, None, clip_sign)
    if t is None:
        return z0, False, 1, []
    hist = [m]
    minimax = m
    trace = []
    d_old = g_old = None
    step = 1e-2
    it = 0
    for it in range(1, opts.polish_max + 1):
        u = t * d
        r = residual(GridFunction(grid, u), problem)
        rn = residual_norm(r)
        minimax = min(minimax, m)
        if it % 20 == 1:
            trace.append((it, minimax, rn,
                          ps_quantity(GridFunction(grid, u), problem)))
        if rn < opts.tol:
            return u, True, it, trace
        gm = t * r.values
        gm = gm - float(np.sum(gm * d)) * d
        if d_old is not None:
            s_ = d - d_old
            y_ = gm - g_old
            sy = float(np.sum(s_ * y_))
            if sy > 0 and math.isfinite(sy):
                step = min(max(float(np.sum(s_ * s_)) / sy, 1e-12), 1e2)
        ref = max(hist[-nonmono_window:])
        gg = float(np.sum(gm * gm))
        if gg == 0.0:
            return u, rn < opts.tol, it, trace
        accepted = False
        tt = min(step, 0.2 / math.sqrt(gg)) if d_old is None else step
        for _ in range(40):
            cand = normalize(d - tt * gm)
            if cand is None:
                tt *= 0.5
                continue
            t_c, m_c = _ray_max(problem, cand, t, clip_sign)
            if t_c is None:
                tt *= 0.5
                continue
            # the ridge level is positive: a nonpositive ray maximum means
            # the candidate left the mountain-pass basin
            if m_c > 0.0 and m_c <= ref - opts.armijo * tt * gg:
                accepted = True
                break
            tt *= 0.5
        if not accepted:
            return u, rn < opts.tol, it, trace
        d_old, g_old = d, gm
        d, t, m = cand, t_c, m_c
        hist.append(m)
        step = tt
    u = t * d
    rn = residual_norm(residual(GridFunction(grid, u), problem))
    return u, rn < opts.tol, it, trace


def mountain_pass(problem: ProblemSpec, far_point: GridFunction,
                  path_nodes: int = 0,
                  opts: SolverOptions = SolverOptions(),
                  clip_sign: Optional[str] = None,
                  classification: str = "mountain_pass") -> SolverReport:
    """Path-deformation mountain pass between 0 and a nonpositive-energy
    far point.

    The string phase locates the path maximizer, descends it and
    re-tensions; the ridge phase then deforms the ray family through the
    stabilized maximizer until the full residual meets tolerance.  The
    trace records the non-increasing minimax estimate."""
    problem.require_valid()
    grid = problem.grid
    m = path_nodes or opts.path_nodes
    if m < 5:
        raise ValueError("need at least 5 path nodes")

    dvals = far_point.values.copy()
    if clip_sign is not None:
        dvals = _clip_sign(dvals, clip_sign)
    dnorm = math.sqrt(float(np.sum(dvals * dvals)))
    if dnorm == 0.0:
        zero = np.zeros(grid.interior_shape)
        return _finalize(problem, zero, 0, classification, "geometry_error",
                         [], "far-point seed is zero (after sign clipping)")
    dvals /= dnorm
    t_ridge, phi_ridge = _ray_max(problem, dvals, None, clip_sign)
    if t_ridge is None:
        zero = np.zeros(grid.interior_shape)
        return _finalize(problem, zero, 0, classification, "geometry_error",
                         [], "seed ray never achieves positive energy; "
                             "no two-level geometry along this direction")
    far, err = _ensure_far(problem, GridFunction(grid, t_ridge * dvals), opts)
    if err is not None:
        zero = np.zeros(grid.interior_shape)
        return _finalize(problem, zero, 0, classification, "geometry_error",
                         [], err)
    t_far = math.sqrt(float(np.sum(far * far)))

    # sample the ray across scales so the ridge sits inside the string
    ts = np.unique(np.concatenate([
        [0.0, t_far],
        np.geomspace(min(t_ridge / 8.0, t_far / 64.0), t_far, m - 2),
        [t_ridge],
    ]))
    path = [t * dvals for t in ts]
    m = len(ts)
    energies = [energy(GridFunction(grid, z), problem).total for z in path]
    trace = []
    total_iters = 0
    minimax = math.inf
    best_interior = t_ridge * dvals
    string_outers = max(20, min(40, opts.max_outer))

    k = int(np.argmax(energies))
    if k == 0 or k == m - 1:
        return _finalize(problem, path[k], total_iters, classification,
                         "geometry_error", trace,
                         "initial path maximum sits at an endpoint; "
                         "the two-level geometry failed (lam too large?)")

    for outer in range(1, string_outers + 1):
        k = int(np.argmax(energies))
        if k == 0 or k == m - 1:
            # discretization artifact: the ray scan certified a positive
            # ridge, so hand the best interior point to the polish phase
            break
        z = path[k]
        best_interior = z
        u = GridFunction(grid, z)
        r = residual(u, problem)
        rn = residual_norm(r)
        minimax = min(minimax, energies[k])
        if outer % 10 == 1 or rn < opts.tol:
            trace.append((total_iters, minimax, rn, ps_quantity(u, problem)))
        if rn < opts.tol:
            return _finalize(problem, z, total_iters, classification,
                             "success", trace)
        seg = np.linalg.norm(np.asarray(path[k]) - np.asarray(path[k - 1]))
        z_new, phi_new = _max_descent_steps(problem, z, opts, clip_sign,
                                            max_move=0.25 * seg)
        path[k] = z_new
        energies[k] = phi_new
        total_iters += 1
        path = _retension(path)
        if clip_sign is not None:
            path = [_clip_sign(z, clip_sign) for z in path]
        energies = [energy(GridFunction(grid, z), problem).total
                    for z in path]

    k = int(np.argmax(energies))
    start = path[k] if 0 < k < m - 1 else best_interior
    zp, ok, used, ptrace = _ridge_polish(problem, start, opts, clip_sign)
    total_iters += used
    trace.extend((total_iters - used + i, min(minimax, e), rn_, ps_)
                 for i, e, rn_, ps_ in ptrace)
    up = GridFunction(grid, zp)
    rp_n = residual_norm(residual(up, problem))
    phi_p = energy(up, problem).total
    trace.append((total_iters, min(minimax, phi_p), rp_n,
                  ps_quantity(up, problem)))
    if ok and phi_p > 0.0:
        return _finalize(problem, zp, total_iters, classification,
                         "success", trace)
    if ok:
        return _finalize(problem, zp, total_iters, classification,
                         "geometry_error", trace,
                         "converged to a nonpositive-energy point; the "
                         "two-level geometry failed (lam too large?)")
    return _finalize(problem, zp, total_iters, classification,
                     "iteration_cap", trace,
                     "ridge polish exhausted its budget before tolerance")


# ---------------------------------------------------------------------------
# sign-definite branches


def geometry_probe(problem: ProblemSpec, rng=None, n_dirs: int = 6,
                   rho_grid=None):
    """Sample the energy on spheres of increasing space-norm radius.

    Returns (radius, margin): the radius with the largest positive minimum
    of the energy over sampled directions, or (None, best_margin) when no
    sampled sphere is uniformly positive."""
    from dphase.spaces import random_field

    rng = np.random.default_rng(0) if rng is None else rng
    if rho_grid is None:
        rho_grid = np.geomspace(1e-3, 2.0, 20)
    dirs = []
    for _ in range(n_dirs):
        d = random_field(problem.grid, rng, scale_low=0.5, scale_high=2.0)
        xn = x_norm_quick(d, problem)
        if xn > 0:
            dirs.append(d.values / xn)
    best_rho, best_margin = None, -math.inf
    for rho in rho_grid:
        worst = math.inf
        for d in dirs:
            phi = energy(GridFunction(problem.grid, d * rho), problem).total
            worst = min(worst, phi)
        if worst > best_margin:
            best_margin = worst
            if worst > 0:
                best_rho = float(rho)
    return best_rho, best_margin


def _verify_sign(report: SolverReport, sign: str, problem: ProblemSpec,
                 opts: SolverOptions) -> SolverReport:
    """Clip round-off sign violations and re-verify both contracts on the
    returned field; demote the status honestly when either fails."""
    vals = report.solution.values
    clipped = _clip_sign(vals, sign)
    if not np.array_equal(clipped, vals):
        rep2 = _finalize(problem, clipped, report.iterations,
                         report.classification, report.status, report.trace,
                         report.message)
        if report.status == "success" and rep2.residual_norm >= opts.tol:
            rep2.status = "sign_violation"
            rep2.message = ("clipping round-off sign violations pushed the "
                            "residual above tolerance")
        report = rep2
    vals = report.solution.values
    bad = (float(np.min(vals)) < -SIGN_TOL if sign == "+"
           else float(np.max(vals)) > SIGN_TOL)
    if bad and report.status == "success":
        report.status = "sign_violation"
        report.message = ("converged field violates the sign bound: the "
                          "truncation argument failed at this discretization")
    return report


def solve_sign_definite(problem: ProblemSpec, sign: str,
                        opts: SolverOptions = SolverOptions(),
                        rng=None) -> SignDefiniteResult:
    """Positive-energy (mountain pass) and negative-energy (small-ball
    minimization) branches of the sign-truncated problem."""
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    problem.require_valid()
    rng = np.random.default_rng(opts.seed) if rng is None else rng
    nl = problem.nonlinearity
    trunc = truncate_plus(nl) if sign == "+" else truncate_minus(nl)
    prob_t = problem.with_nonlinearity(trunc)
    classification = "sign_positive" if sign == "+" else "sign_negative"
    orient = 1.0 if sign == "+" else -1.0

    grid = problem.grid
    seed = cone_function(np.zeros(grid.dim), 0.45 * grid.radius, grid)
    seed = seed * orient

    high = mountain_pass(prob_t, seed, opts.path_nodes, opts,
                         clip_sign=sign, classification=classification)
    high = _verify_sign(high, sign, prob_t, opts)

    # negative-energy branch: minimize inside the positive-geometry ball
    radius, margin = geometry_probe(prob_t, rng)
    if radius is None:
        zero = np.zeros(grid.interior_shape)
        low = _finalize(prob_t, zero, 0, classification, "geometry_error", [],
                        "no sphere with positive energy margin; the "
                        "small-ball branch needs a positive lower-order term")
    else:
        t0 = 0.25 * radius / max(x_norm_quick(seed, prob_t), 1e-300)
        start = seed * t0
        # walk the seed down until the energy dips below zero, if it does
        for _ in range(40):
            if energy(start, prob_t).total < 0:
                break
            start = start * 0.5
        vals, it, status, trace, msg = _descend(
            prob_t, start, opts, clip_sign=sign, ball_radius=radius)
        low = _finalize(prob_t, vals, it, classification, status, trace, msg)
        low = _verify_sign(low, sign, prob_t, opts)
    return SignDefiniteResult(high=high, low=low)


# ---------------------------------------------------------------------------
# multi-solution sweep


def _stable_hash(u: GridFunction) -> str:
    return hashlib.sha256(u.to_csv().encode()).hexdigest()


def multi_solution_sweep(problem: ProblemSpec, n_starts: int,
                         opts: SolverOptions = SolverOptions()) -> list:
    """Randomized multistart over minimize and mountain_pass, with the
    negated twin of every seed; distinct solutions are kept by space-norm
    separation and ordered by (energy, stable content hash)."""
    from dphase.spaces import random_field

    if n_starts < 2:
        raise ValueError("n_starts must be at least 2")
    problem.require_valid()
    rng = np.random.default_rng(opts.seed)
    grid = problem.grid

    seeds = []
    for _ in range(n_starts):
        s = random_field(grid, rng, scale_low=0.05, scale_high=2.0)
        seeds.append(s)

    # the built-in nonlinearity is odd and the potential even, so the run
    # from -u0 is the exact negation of the run from u0; synthesize it
    mirror_exact = problem.nonlinearity.sign_mode == "full"

    def runs_from(u0):
        out = []
        rep = minimize(problem, u0, opts)
        if rep.success:
            out.append(rep)
        rep = mountain_pass(problem, u0, opts.path_nodes, opts)
        if rep.success:
            out.append(rep)
        return out

    results = []
    for s in seeds:
        plus = runs_from(s)
        results.extend(plus)
        if mirror_exact:
            for rep in plus:
                results.append(_finalize(
                    problem, -rep.solution.values, rep.iterations,
                    rep.classification, rep.status, rep.trace, rep.message))
        else:
            results.extend(runs_from(-1.0 * s))

    results.sort(key=lambda r: (r.energy.total, _stable_hash(r.solution)))
    kept = []
    for rep in results:
        distinct = True
        for other in kept:
            diff = GridFunction(grid, rep.solution.values
                                - other.solution.values)
            if x_norm_quick(diff, problem) <= opts.dedup_tol:
                distinct = False
                break
        if distinct:
            kept.append(rep)
    return kept
