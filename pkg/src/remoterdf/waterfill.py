"""Spectral reduction and water-filling solution of the rate-distortion function.

The conditional covariances reduce the problem to parallel components: with
Q the product of the symmetric square root of Q_{S|Y} and the inverse of
Q_{X,S|Y}, and Q = V diag(d) U^T its SVD, the reproduction covariance given Y
is U diag(lambda) U^T and the rate is 0.5 * sum(log(1/(1 - lambda_i d_i^2))).
The allocations follow a water level xi:

    lambda_i = 1/d_i^2 - 1/(2 xi)   when xi > d_i^2 / 2, else 0

with xi chosen so the allocations sum to trace(Q_{X|Y}) - delta.  The level is
found by bisection; the total allocation is continuous and non-decreasing in
xi, so bisection converges to any tolerance.

Distortions at or below delta_min = trace(Q_{X|Y}) - sum(1/d_i^2) carry
infinite rate and are rejected; distortions above delta_plus = trace(Q_{X|Y})
need no coding and return a flagged zero-rate solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    INV_TOL,
    RANK_TOL,
    ConditionalStats,
    GaussianSourceSpec,
    conditional_stats,
    symmetric_sqrt,
    symmetrize,
)
from .errors import BelowRangeError, BisectionError, HypothesisViolatedError

WATER_TOL_SCALE = 1e-10   # allocation-sum tolerance, relative to trace(Q_{X|Y})
MAX_BISECT_ITER = 200


@dataclass(frozen=True)
class SpectralSetup:
    """SVD of the reduction matrix with singular values sorted ascending.

    Columns of `u`/`v` are permuted with `d` and sign-fixed so the
    largest-magnitude entry of every column of `u` is positive; `active`
    indexes the nonzero singular values.
    """

    q_mat: np.ndarray
    u: np.ndarray
    v: np.ndarray
    d: np.ndarray
    active: np.ndarray


@dataclass(frozen=True)
class WaterfillSolution:
    """Allocations lambda (paired with d ascending, hence non-increasing),
    water level xi, rate in nats, and the reconstructed covariances."""

    delta: float
    rate: float
    xi: float
    lam: np.ndarray
    sigma_delta: np.ndarray
    q_xhat_given_y: np.ndarray
    above_range: bool
    water_error: float

    @property
    def active_count(self) -> int:
        return int(np.count_nonzero(self.lam > 0.0))


@dataclass(frozen=True)
class CurvePoint:
    delta: float
    rate: float | None
    xi: float | None
    active_count: int | None
    feasible: bool
    error: str


@dataclass(frozen=True)
class RdfCurve:
    points: list[CurvePoint]


def spectral_setup(spec: GaussianSourceSpec, stats: ConditionalStats) -> SpectralSetup:
    """Build the SVD reduction, enforcing the hypotheses it rests on.

    Requires n_x = n_s, invertible Q_{X,S|Y}, and strictly positive definite
    Q_{S|Y}, Q_{X|Y} and Q_{X|Y} - Q_{X|S,Y}.
    """
    if spec.n_x != spec.n_s:
        raise HypothesisViolatedError(
            f"source and measurement dimensions must match (n_x={spec.n_x}, n_s={spec.n_s})",
            float(spec.n_x - spec.n_s),
        )
    cross_sv = np.linalg.svd(stats.q_xs_given_y, compute_uv=False)
    if float(cross_sv[-1]) <= INV_TOL:
        raise HypothesisViolatedError("Q_{X,S|Y} invertible", float(cross_sv[-1]))
    for name, m in [
        ("Q_{S|Y} > 0", stats.q_s_given_y),
        ("Q_{X|Y} > 0", stats.q_x_given_y),
        ("Q_{X|Y} > Q_{X|S,Y}", stats.q_x_given_y - stats.q_x_given_sy),
    ]:
        low = float(np.min(np.linalg.eigvalsh(m)))
        if low <= INV_TOL:
            raise HypothesisViolatedError(name, low)

    root_s = symmetric_sqrt(stats.q_s_given_y)
    q_mat = np.linalg.solve(stats.q_xs_given_y.T, root_s).T

    v_desc, d_desc, ut_desc = np.linalg.svd(q_mat)
    d = d_desc[::-1].copy()
    v = v_desc[:, ::-1].copy()
    u = ut_desc[::-1, :].T.copy()
    for i in range(d.size):
        lead = int(np.argmax(np.abs(u[:, i])))
        if u[lead, i] < 0.0:
            u[:, i] = -u[:, i]
            v[:, i] = -v[:, i]
    active = np.flatnonzero(d > RANK_TOL * (d[-1] if d.size else 0.0))
    return SpectralSetup(q_mat=q_mat, u=u, v=v, d=d, active=active)


def distortion_range(spec: GaussianSourceSpec, setup: SpectralSetup) -> tuple[float, float]:
    """Boundaries (delta_min, delta_plus) of the finite-rate distortion regime."""
    trace_xy = float(np.trace(conditional_stats(spec).q_x_given_y))
    return _range_from_trace(trace_xy, setup), trace_xy


def _range_from_trace(trace_xy: float, setup: SpectralSetup) -> float:
    d_act = setup.d[setup.active]
    return trace_xy - float(np.sum(1.0 / d_act**2))


def _total_water(xi: float, d_sq: np.ndarray) -> float:
    return float(np.sum(np.maximum(0.0, 1.0 / d_sq - 1.0 / (2.0 * xi))))


def _solve_water_level(d_sq: np.ndarray, target: float, tol: float) -> float:
    """Bisect for the level xi with total allocation equal to target.

    The bracket starts at [min d^2/2, max d^2/2] (zero allocation at the low
    end) and the high end doubles until it covers the target; the allocation
    is monotone in xi so plain bisection converges.  The bracket is shrunk to
    float adjacency and the low endpoint is returned, so the allocation sum
    never overshoots the target (a grid-search oracle can then never beat the
    returned rate beyond roundoff).
    """
    xi_lo = 0.5 * float(d_sq[0])
    if target <= 0.0:
        return xi_lo
    xi_hi = 0.5 * float(d_sq[-1])
    for _ in range(MAX_BISECT_ITER):
        if _total_water(xi_hi, d_sq) >= target:
            break
        xi_hi *= 2.0
    else:
        raise BisectionError("water-level bracket failed to cover the target allocation")
    for _ in range(MAX_BISECT_ITER):
        xi_mid = 0.5 * (xi_lo + xi_hi)
        if xi_mid <= xi_lo or xi_mid >= xi_hi:
            break
        if _total_water(xi_mid, d_sq) < target:
            xi_lo = xi_mid
        else:
            xi_hi = xi_mid
    water_error = abs(_total_water(xi_lo, d_sq) - target)
    if water_error > tol:
        raise BisectionError(
            f"bisection stalled with allocation error {water_error:.3e} > {tol:.3e}"
        )
    return xi_lo


def solve_waterfill(
    spec: GaussianSourceSpec, setup: SpectralSetup, delta: float
) -> WaterfillSolution:
    """Solve the allocation problem at distortion `delta`.

    Raises BelowRangeError for delta <= delta_min (infinite rate).  For
    delta > delta_plus no rate is needed: the solution is returned with all
    allocations zero and `above_range` set instead of raising.
    """
    delta = float(delta)
    stats = conditional_stats(spec)
    trace_xy = float(np.trace(stats.q_x_given_y))
    delta_min = _range_from_trace(trace_xy, setup)
    if delta <= delta_min:
        raise BelowRangeError(delta, delta_min)

    d_act = setup.d[setup.active]
    d_sq = d_act**2
    lam = np.zeros_like(setup.d)

    if delta > trace_xy:
        xi = 0.5 * float(d_sq[0])
        rate = 0.0
        above_range = True
        water_error = 0.0
    else:
        target = trace_xy - delta
        xi = _solve_water_level(d_sq, target, WATER_TOL_SCALE * trace_xy)
        lam_act = np.maximum(0.0, 1.0 / d_sq - 1.0 / (2.0 * xi))
        lam[setup.active] = lam_act
        on = lam_act > 0.0
        rate = 0.5 * float(np.sum(np.log(2.0 * xi / d_sq[on])))
        above_range = False
        water_error = abs(float(np.sum(lam_act)) - target)

    q_xhat = symmetrize((setup.u * lam) @ setup.u.T)
    sigma_delta = symmetrize(stats.q_x_given_y - q_xhat)
    return WaterfillSolution(
        delta=delta,
        rate=rate,
        xi=xi,
        lam=lam,
        sigma_delta=sigma_delta,
        q_xhat_given_y=q_xhat,
        above_range=above_range,
        water_error=water_error,
    )


def rdf_curve(spec: GaussianSourceSpec, deltas) -> RdfCurve:
    """Sweep the rate-distortion curve over an ascending distortion grid.

    Points at or below delta_min are annotated (feasible=False,
    error="below_range") and the sweep continues.  Each point is solved
    independently, so results do not depend on evaluation order.
    """
    grid = [float(d) for d in deltas]
    if not grid:
        raise ValueError("distortion grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("distortion grid must be sorted ascending")
    stats = conditional_stats(spec)
    setup = spectral_setup(spec, stats)
    points = []
    for delta in grid:
        try:
            sol = solve_waterfill(spec, setup, delta)
        except BelowRangeError:
            points.append(
                CurvePoint(
                    delta=delta,
                    rate=None,
                    xi=None,
                    active_count=None,
                    feasible=False,
                    error="below_range",
                )
            )
        else:
            points.append(
                CurvePoint(
                    delta=delta,
                    rate=sol.rate,
                    xi=sol.xi,
                    active_count=sol.active_count,
                    feasible=True,
                    error="",
                )
            )
    return RdfCurve(points=points)
