"""Independent ground truth for the rate-distortion computations.

Three flavors: an exhaustive grid search over reproduction covariances at tiny
dimensions (the reference the water-filling solver is validated against),
closed-form scalar limits (Wyner side-information and classical rate-distortion),
and the demonstration table showing how the prior-work test channel diverges
from the correct one.

The grid search deliberately shares nothing with the water-filling module: it
re-derives the channel quantities inline from the conditional statistics and
minimizes by enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import GaussianSourceSpec, conditional_stats
from .errors import (
    DimensionUnsupportedError,
    HypothesisViolatedError,
    ResolutionTooCoarseError,
)

# A prior-work noise variance this many times the correct channel's output
# variance is reported as divergent.
DIVERGENCE_FACTOR = 1e3

_FEAS_TOL = 1e-12


@dataclass(frozen=True)
class OracleResolution:
    """Grid sizes for the brute-force search (defaults: ~1e-3 rate accuracy)."""

    eig_points: int = 400
    angle_points: int = 180


@dataclass(frozen=True)
class OracleResult:
    rate: float
    sigma_delta: np.ndarray | None
    method: str  # "grid" or "closed-form"
    params: dict[str, float] = field(default_factory=dict)
    feasible_points: int | None = None
    resolution: OracleResolution | None = None


def wyner_scalar_rdf(q_xy: float, delta: float) -> OracleResult:
    """Scalar side-information rate-distortion limit (the X = S case).

    Rate max(0, 0.5*ln(q_xy/delta)) together with the channel parameters
    H = (q_xy - delta)/q_xy and Q_W = H*delta of the correct realization.
    """
    if q_xy <= 0:
        raise ValueError(f"conditional variance must be positive, got {q_xy!r}")
    if delta <= 0:
        raise ValueError(f"distortion must be positive, got {delta!r}")
    h = max(0.0, (q_xy - delta) / q_xy)
    q_w = h * delta
    rate = max(0.0, 0.5 * math.log(q_xy / delta))
    return OracleResult(
        rate=rate, sigma_delta=None, method="closed-form", params={"h": h, "q_w": q_w}
    )


def classical_scalar_rdf(q_x: float, delta: float) -> OracleResult:
    """Classical scalar Gaussian rate-distortion: rate and reproduction variance."""
    if q_x < 0:
        raise ValueError(f"source variance must be nonnegative, got {q_x!r}")
    if delta <= 0:
        raise ValueError(f"distortion must be positive, got {delta!r}")
    rate = 0.5 * math.log(q_x / delta) if q_x > 0 else 0.0
    return OracleResult(
        rate=max(0.0, rate),
        sigma_delta=None,
        method="closed-form",
        params={"reproduction_variance": max(0.0, q_x - delta)},
    )


@dataclass(frozen=True)
class Remark3Row:
    """One distortion point of the prior-work vs correct-channel comparison."""

    delta: float
    prior_noise_variance: float
    prior_z_variance: float
    wyner_h: float
    wyner_q_w: float
    wyner_z_variance: float
    divergent: bool


def remark3_discrepancy(q_xy: float, deltas) -> list[Remark3Row]:
    """Compare the prior-work additive-noise channel against the correct one.

    The prior-work realization adds noise of variance delta/(q_xy - delta),
    which blows up as delta -> q_xy, while the correct channel's output
    variance H^2*q_xy + H*delta shrinks to zero.  Rows are flagged divergent
    once the prior-work variance exceeds DIVERGENCE_FACTOR times the correct
    output variance.
    """
    if q_xy <= 0:
        raise ValueError(f"conditional variance must be positive, got {q_xy!r}")
    rows = []
    for delta in deltas:
        delta = float(delta)
        if not 0.0 < delta <= q_xy:
            raise ValueError(f"distortion {delta!r} outside (0, {q_xy!r}]")
        if delta == q_xy:
            prior_noise = float("inf")
            prior_z = float("inf")
        else:
            prior_noise = delta / (q_xy - delta)
            prior_z = q_xy + prior_noise
        wyner = wyner_scalar_rdf(q_xy, delta)
        h = wyner.params["h"]
        q_w = wyner.params["q_w"]
        z_var = h * h * q_xy + q_w
        rows.append(
            Remark3Row(
                delta=delta,
                prior_noise_variance=prior_noise,
                prior_z_variance=prior_z,
                wyner_h=h,
                wyner_q_w=q_w,
                wyner_z_variance=z_var,
                divergent=prior_noise > DIVERGENCE_FACTOR * z_var,
            )
        )
    return rows


def brute_force_rdf(
    spec: GaussianSourceSpec, delta: float, resolution: OracleResolution | None = None
) -> OracleResult:
    """Minimize the determinant-ratio rate objective by exhaustive search.

    The reproduction covariance given Y is parametrized by its eigenvalues on
    grids over [0, max eigenvalue of Q_{X|Y}] (and a rotation angle grid for
    2x2).  Constraint-boundary candidates with trace exactly equal to
    trace(Q_{X|Y}) - delta are appended to each grid, since the optimum sits
    on that boundary.  Feasibility enforces 0 <= M <= Q_{X|Y}, the trace
    constraint, and a PSD reconstruction noise.  The minimum is reduced in
    lexicographic grid order (angle, then eigenvalue axes), so ties are
    deterministic.

    Raises
    ------
    DimensionUnsupportedError
        n_x != n_s or n_x not in {1, 2}.
    ResolutionTooCoarseError
        Fewer than 10 feasible candidates.
    """
    if spec.n_x != spec.n_s or spec.n_x not in (1, 2):
        raise DimensionUnsupportedError(
            f"brute force supports n_x = n_s in {{1, 2}}, got ({spec.n_x}, {spec.n_s})"
        )
    res = resolution or OracleResolution()
    if res.eig_points < 2 or res.angle_points < 1:
        raise ValueError("resolution must have at least 2 eigenvalue and 1 angle point")
    stats = conditional_stats(spec)
    cross_sv = np.linalg.svd(stats.q_xs_given_y, compute_uv=False)
    if float(cross_sv[-1]) <= 1e-10:
        raise HypothesisViolatedError(
            "Q_{X,S|Y} must be invertible", float(cross_sv[-1])
        )

    target = float(np.trace(stats.q_x_given_y)) - float(delta)

    if spec.n_x == 1:
        return _brute_force_scalar(stats, target, res)
    return _brute_force_2x2(stats, target, res)


def _brute_force_scalar(stats, target: float, res: OracleResolution) -> OracleResult:
    q_x = float(stats.q_x_given_y[0, 0])
    q_s = float(stats.q_s_given_y[0, 0])
    q_xs = float(stats.q_xs_given_y[0, 0])

    # Candidates above q_xs^2/q_s have negative noise variance, so the grid
    # stops at the feasible box rather than wasting points past it.
    a_max = min(q_x, q_xs * q_xs / q_s)
    a = np.linspace(0.0, a_max, res.eig_points)
    a = np.append(a, min(max(target, 0.0), a_max))  # trace-boundary candidate
    ftol = _FEAS_TOL * max(1.0, q_x)

    post = q_s - (q_s * q_s / (q_xs * q_xs)) * a
    q_w = a - (q_s / (q_xs * q_xs)) * a * a
    feasible = (a >= target - ftol) & (q_w >= -ftol) & (post > 0.0)
    n_feasible = int(np.count_nonzero(feasible))
    if n_feasible < 10:
        raise ResolutionTooCoarseError(n_feasible)

    # Minimizing 0.5*log(prior/post) is maximizing the posterior variance.
    best = int(np.argmax(np.where(feasible, post, -np.inf)))
    a_best = float(a[best])
    return OracleResult(
        rate=max(0.0, 0.5 * (math.log(q_s) - math.log(float(post[best])))),
        sigma_delta=np.array([[q_x - a_best]]),
        method="grid",
        params={"eig_a": a_best},
        feasible_points=n_feasible,
        resolution=res,
    )


def _brute_force_2x2(stats, target: float, res: OracleResolution) -> OracleResult:
    # Everything is expressed in the eigenbasis of the candidate
    # M = a r1 r1^T + b r2 r2^T, so the whole scan is scalar vector math:
    #   post = Q_{S|Y} - a u1 u1^T - b u2 u2^T,   u_i = W^T r_i
    #   Q_W  = R (diag(a, b) - [[a^2 k11, ab k12], [ab k12, b^2 k22]]) R^T
    # with W = Q_{X,S|Y}^{-T} Q_{S|Y} and k_ij = r_i^T (W Q_{S|Y}^{-1} W^T) r_j.
    q_x = stats.q_x_given_y
    q_s = stats.q_s_given_y
    binv = np.linalg.inv(stats.q_xs_given_y.T)
    w = binv @ q_s
    k = binv @ q_s @ binv.T
    logdet_prior = float(np.log(np.linalg.det(q_s)))
    # Eigenvalues of any feasible M are capped both by Q_{X|Y} and by the
    # noise-feasibility bound lambda_max(M) <= 1/lambda_min(K).
    a_max = min(
        float(np.max(np.linalg.eigvalsh(q_x))),
        1.0 / float(np.min(np.linalg.eigvalsh(k))),
    )
    ftol = _FEAS_TOL * max(1.0, a_max)

    eig_grid = np.linspace(0.0, a_max, res.eig_points)
    # Full (a, b) grid plus the trace-boundary slice b = target - a.
    aa_full = np.repeat(eig_grid, res.eig_points)
    bb_full = np.tile(eig_grid, res.eig_points)
    b_slice = target - eig_grid
    on_slice = (b_slice >= 0.0) & (b_slice <= a_max)
    aa = np.concatenate([aa_full, eig_grid[on_slice]])
    bb = np.concatenate([bb_full, b_slice[on_slice]])

    keep = aa + bb >= target - ftol
    aa, bb = aa[keep], bb[keep]
    if aa.size == 0:
        raise ResolutionTooCoarseError(0)
    aa_sq, bb_sq, ab = aa * aa, bb * bb, aa * bb

    best_det = -np.inf
    best_point = None
    n_feasible = 0
    thetas = np.linspace(0.0, np.pi, res.angle_points, endpoint=False)
    for theta in thetas:
        c, s = math.cos(theta), math.sin(theta)
        r1 = np.array([c, s])
        r2 = np.array([-s, c])
        u1 = w.T @ r1
        u2 = w.T @ r2

        # M <= Q_{X|Y}
        g00 = q_x[0, 0] - (aa * c * c + bb * s * s)
        g01 = q_x[0, 1] - (aa - bb) * c * s
        g11 = q_x[1, 1] - (aa * s * s + bb * c * c)
        feasible = _psd_shifted_sym2(g00, g01, g11, ftol)

        # Q_W >= 0, evaluated in the M eigenbasis (rotation drops out).
        k11 = float(r1 @ k @ r1)
        k12 = float(r1 @ k @ r2)
        k22 = float(r2 @ k @ r2)
        feasible &= _psd_shifted_sym2(
            aa - aa_sq * k11, -ab * k12, bb - bb_sq * k22, ftol
        )

        p00 = q_s[0, 0] - aa * u1[0] * u1[0] - bb * u2[0] * u2[0]
        p01 = q_s[0, 1] - aa * u1[0] * u1[1] - bb * u2[0] * u2[1]
        p11 = q_s[1, 1] - aa * u1[1] * u1[1] - bb * u2[1] * u2[1]
        det_post = p00 * p11 - p01 * p01
        # Sylvester criterion: post is PD iff p00 > 0 and det > 0.
        feasible &= (p00 > 0.0) & (det_post > 0.0)

        n_feasible += int(np.count_nonzero(feasible))
        # Minimizing the log-det-ratio objective is maximizing det(post).
        masked = np.where(feasible, det_post, -np.inf)
        idx = int(np.argmax(masked))
        if masked[idx] > best_det:
            best_det = float(masked[idx])
            best_point = (float(theta), float(aa[idx]), float(bb[idx]))

    if n_feasible < 10:
        raise ResolutionTooCoarseError(n_feasible)
    best_rate = 0.5 * (logdet_prior - math.log(best_det))
    theta, a_best, b_best = best_point
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    m_best = rot @ np.diag([a_best, b_best]) @ rot.T
    return OracleResult(
        rate=max(0.0, best_rate),
        sigma_delta=0.5 * ((q_x - m_best) + (q_x - m_best).T),
        method="grid",
        params={"theta": theta, "eig_a": a_best, "eig_b": b_best},
        feasible_points=n_feasible,
        resolution=res,
    )


def _psd_shifted_sym2(m00, m01, m11, shift):
    """Entrywise Sylvester test for lambda_min(M) >= -shift on symmetric 2x2."""
    a = m00 + shift
    b = m11 + shift
    return (a >= 0.0) & (b >= 0.0) & (a * b - m01 * m01 >= 0.0)
