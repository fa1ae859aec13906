"""Independent verification path for the game solver.

``dense_solve`` factors the full stacked stationarity system in one shot,
with no sweep structure.  The stationarity checks go one level deeper: they
differentiate the players' objectives themselves (by central differences
along re-solved follower reactions), so they validate the derived equations
against the payoffs rather than one solver against another.

All perturbation directions are fixed-seed pseudorandom, plus every
coordinate direction, so results are reproducible and single-period
deviations cannot hide in a random subspace.
"""
from __future__ import annotations

import numpy as np

from .errors import SingularSystemError, UndeterminedControlsError
from .model import ModelParams, Trajectory, optimal_quantity, rollout, stage_payoff
from .stationarity import assemble_system, vector_to_trajectory

_COND_LIMIT = 1e12


def _stacked_objective(player, params, x, i_s, i_m, i_r, q):
    total = 0.0
    for t in range(len(i_s)):
        total += stage_payoff(player, x[t], q, (i_s[t], i_m[t], i_r[t]), params)
    return total


def dense_solve(params: ModelParams) -> Trajectory:
    """Solve the full-horizon stationarity system by direct factorization.

    One step of iterative refinement keeps the residual at roundoff level.
    Raises SingularSystemError (with a condition estimate) if the stacked
    matrix is numerically singular.
    """
    params.validated()
    system = assemble_system(params)
    A, b = system.matrix, system.rhs
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularSystemError(cond)
    try:
        z = np.linalg.solve(A, b)
        z += np.linalg.solve(A, b - A @ z)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(float("inf")) from exc
    return vector_to_trajectory(z, params)


# ---------------------------------------------------------------------------
# Follower response sub-solvers (small dense systems, re-used by the checks)
# ---------------------------------------------------------------------------

def solve_retailer_response(params: ModelParams, i_s, i_m):
    """Retailer stationarity response to fixed upstream paths.

    Solves the retailer's own first-order system (control FOC, costate
    recursion, transversality, state equation) for (i_r, x).
    """
    if params.tau * params.theta == 0.0:
        raise UndeterminedControlsError()
    i_s = np.asarray(i_s, dtype=float)
    i_m = np.asarray(i_m, dtype=float)
    T = i_s.shape[0]
    k = params.tau * params.theta
    al, br = params.alpha, params.beta_r
    # unknowns: i_r (T), x_{2..T+1} (T), p_r_{2..T+1} (T)
    o_ir, o_x, o_pr = 0, T, 2 * T
    n = 3 * T
    A = np.zeros((n, n))
    b = np.zeros(n)
    row = 0
    for t in range(1, T + 1):    # retailer FOC
        A[row, o_ir + t - 1] = 2 * k
        A[row, o_pr + t - 1] = br
        b[row] = 1.0 - params.tau - k * (i_s[t - 1] + i_m[t - 1])
        row += 1
    for t in range(1, T + 1):    # state equation
        A[row, o_x + t - 1] = 1.0
        if t > 1:
            A[row, o_x + t - 2] = -al
        A[row, o_ir + t - 1] = -br
        b[row] = (params.beta_s * i_s[t - 1] + params.beta_m * i_m[t - 1]
                  + (al * params.x1 if t == 1 else 0.0))
        row += 1
    for t in range(2, T + 1):    # costate recursion
        A[row, o_pr + t - 2] = 1.0
        A[row, o_x + t - 2] = -2 * params.delta_r
        A[row, o_pr + t - 1] = -al
        row += 1
    A[row, o_pr + T - 1] = 1.0   # transversality
    row += 1
    assert row == n
    sol = np.linalg.solve(A, b)
    i_r = sol[o_ir:o_ir + T]
    x = np.concatenate([[params.x1], sol[o_x:o_x + T]])
    return i_r, x


def solve_inner_response(params: ModelParams, i_s):
    """Manufacturer-with-retailer stationarity response to a supplier path.

    Solves the complete inner first-order system (both followers) for
    (i_m, i_r, x).
    """
    if params.tau * params.theta == 0.0:
        raise UndeterminedControlsError()
    i_s = np.asarray(i_s, dtype=float)
    T = i_s.shape[0]
    k = params.tau * params.theta
    al, bm, br = params.alpha, params.beta_m, params.beta_r
    # unknowns: i_m, i_r, lam (3T), x_{2..T+1}, p_r, p_m (3T), u_{1..T+1}
    o_im, o_ir, o_lam = 0, T, 2 * T
    o_x, o_pr, o_pm, o_u = 3 * T, 4 * T, 5 * T, 6 * T
    n = 7 * T + 1
    A = np.zeros((n, n))
    b = np.zeros(n)
    row = 0
    for t in range(1, T + 1):    # retailer FOC
        A[row, o_im + t - 1] = k
        A[row, o_ir + t - 1] = 2 * k
        A[row, o_pr + t - 1] = br
        b[row] = 1.0 - params.tau - k * i_s[t - 1]
        row += 1
    for t in range(1, T + 1):    # manufacturer FOC
        A[row, o_im + t - 1] = 2 * k
        A[row, o_ir + t - 1] = k
        A[row, o_lam + t - 1] = k
        A[row, o_pm + t - 1] = bm
        b[row] = 1.0 - params.tau - k * i_s[t - 1]
        row += 1
    for t in range(1, T + 1):    # manufacturer reaction identity
        A[row, o_im + t - 1] = k
        A[row, o_lam + t - 1] = 2 * k
        A[row, o_pm + t - 1] = br
        b[row] = -params.d_hat
        row += 1
    for t in range(1, T + 1):    # state equation
        A[row, o_x + t - 1] = 1.0
        if t > 1:
            A[row, o_x + t - 2] = -al
        A[row, o_im + t - 1] = -bm
        A[row, o_ir + t - 1] = -br
        b[row] = params.beta_s * i_s[t - 1] + (al * params.x1 if t == 1 else 0.0)
        row += 1
    for t in range(2, T + 1):    # retailer costate
        A[row, o_pr + t - 2] = 1.0
        A[row, o_x + t - 2] = -2 * params.delta_r
        A[row, o_pr + t - 1] = -al
        row += 1
    A[row, o_pr + T - 1] = 1.0
    row += 1
    for t in range(2, T + 1):    # manufacturer costate (carries u)
        A[row, o_pm + t - 2] = 1.0
        A[row, o_x + t - 2] = -2 * params.delta_m
        A[row, o_pm + t - 1] = -al
        A[row, o_u + t - 1] = -2 * params.delta_r
        row += 1
    A[row, o_pm + T - 1] = 1.0
    row += 1
    A[row, o_u] = 1.0            # u_1 = 0
    row += 1
    for t in range(1, T + 1):    # u step
        A[row, o_u + t] = 1.0
        A[row, o_u + t - 1] = -al
        A[row, o_lam + t - 1] = -br
        row += 1
    assert row == n
    sol = np.linalg.solve(A, b)
    i_m = sol[o_im:o_im + T]
    i_r = sol[o_ir:o_ir + T]
    x = np.concatenate([[params.x1], sol[o_x:o_x + T]])
    return i_m, i_r, x


# ---------------------------------------------------------------------------
# Stationarity checks against the objectives themselves
# ---------------------------------------------------------------------------

def _directions(T, n_directions, seed):
    """Unit probe directions: fixed-seed pseudorandom plus every coordinate."""
    rng = np.random.default_rng(seed)
    dirs = []
    for _ in range(n_directions):
        eta = rng.standard_normal(T)
        dirs.append(eta / np.linalg.norm(eta))
    dirs.extend(np.eye(T))
    return dirs


def _fd_step(controls):
    return 1e-5 * (1.0 + float(np.max(np.abs(controls.stacked()))))


def follower_stationarity_check(trajectory: Trajectory, params: ModelParams,
                                level: str, n_directions: int = 12,
                                seed: int = 0) -> float:
    """Max directional derivative of a follower's objective along its
    re-solved reaction; near zero exactly at a nested stationary point.

    Level R perturbs the retailer path with the state re-rolled.  Level M
    perturbs the manufacturer path and re-solves the retailer's response
    before differencing the manufacturer's objective.
    """
    c = trajectory.controls
    T = trajectory.horizon
    q = trajectory.q[0]
    h = _fd_step(c)
    worst = 0.0
    for eta in _directions(T, n_directions, seed):
        if level == "R":
            def value(eps):
                i_r = c.i_r + eps * eta
                x = rollout(params, params.x1, c.i_s, c.i_m, i_r)
                return _stacked_objective("R", params, x, c.i_s, c.i_m, i_r, q)
        elif level == "M":
            def value(eps):
                i_m = c.i_m + eps * eta
                i_r, x = solve_retailer_response(params, c.i_s, i_m)
                return _stacked_objective("M", params, x, c.i_s, i_m, i_r, q)
        else:
            raise ValueError(f"unknown follower level {level!r}; expected 'R' or 'M'")
        derivative = (value(h) - value(-h)) / (2.0 * h)
        worst = max(worst, abs(derivative))
    return worst


def leader_stationarity_check(trajectory: Trajectory, params: ModelParams,
                              n_directions: int = 12, seed: int = 0) -> float:
    """Max directional derivative of the supplier's objective with the whole
    follower subsystem re-solved per probe."""
    c = trajectory.controls
    T = trajectory.horizon
    q = trajectory.q[0]
    h = _fd_step(c)
    worst = 0.0
    for eta in _directions(T, n_directions, seed):
        def value(eps):
            i_s = c.i_s + eps * eta
            i_m, i_r, x = solve_inner_response(params, i_s)
            return _stacked_objective("S", params, x, i_s, i_m, i_r, q)
        derivative = (value(h) - value(-h)) / (2.0 * h)
        worst = max(worst, abs(derivative))
    return worst


def grid_scan_supplier(params: ModelParams, center: float, half_width: float,
                       n_points: int = 81) -> float:
    """Single-period brute-force cross-check: scan the supplier's investment
    over a grid (followers re-solved per point), locate the sign change of
    the first difference of its objective, and refine by fitting a parabola
    through the bracketing triple.

    Only defined for horizon 1, where the supplier's choice is a scalar.
    """
    if params.horizon_T != 1:
        raise ValueError("grid scan is a single-period check; horizon_T must be 1")
    grid = np.linspace(center - half_width, center + half_width, n_points)
    values = np.empty(n_points)
    q = optimal_quantity(params)
    for idx, point in enumerate(grid):
        i_s = np.array([point])
        i_m, i_r, x = solve_inner_response(params, i_s)
        values[idx] = _stacked_objective("S", params, x, i_s, i_m, i_r, q)
    diffs = np.diff(values)
    signs = np.sign(diffs)
    flips = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    if flips.size == 0:
        raise ValueError(
            "no interior stationary point of the supplier objective inside "
            f"the scanned range [{grid[0]:.6g}, {grid[-1]:.6g}]"
        )
    j = flips[0] + 1   # grid index bracketed by the difference sign change
    x3 = grid[j - 1:j + 2]
    y3 = values[j - 1:j + 2]
    coeff = np.polyfit(x3, y3, 2)
    return float(-coeff[1] / (2.0 * coeff[0]))
