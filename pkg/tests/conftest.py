import numpy as np
import pytest

from remoterdf.core import GaussianSourceSpec, conditional_stats, validate_spec
from remoterdf.errors import RemoteRdfError

# Canonical scalar instance used throughout: Q_{X|Y}=0.5, Q_{S|Y}=1, Q_{X,S|Y}=0.5.
SCALAR_Q = np.array([[1.0, 1.0, 1.0], [1.0, 1.5, 1.0], [1.0, 1.0, 2.0]])


@pytest.fixture
def scalar_spec() -> GaussianSourceSpec:
    return validate_spec(SCALAR_Q, (1, 1, 1))


def wyner_spec(q: float, q_y: float = 2.0, c: float = 1.0) -> GaussianSourceSpec:
    """Spec with X = S almost surely and Q_{X|Y} = q (Wyner degenerate case)."""
    q0 = q + c * c / q_y
    m = np.array([[q0, q0, c], [q0, q0, c], [c, c, q_y]])
    return validate_spec(m, (1, 1, 1))


def classical_spec(q_x: float) -> GaussianSourceSpec:
    """Spec with X = S and Y independent of both (classical degenerate case)."""
    m = np.array([[q_x, q_x, 0.0], [q_x, q_x, 0.0], [0.0, 0.0, 1.0]])
    return validate_spec(m, (1, 1, 1))


def random_feasible_spec(
    rng: np.random.Generator,
    n: int,
    n_y: int,
    min_margin: float = 1e-3,
    max_tries: int = 500,
) -> GaussianSourceSpec:
    """Draw a random spec satisfying the water-filling hypotheses with margin.

    The joint covariance is a normalized Wishart draw (max diagonal scaled to
    one); draws are rejected until Q_{S|Y} > 0, Q_{X|Y} > 0, Q_{X,S|Y}
    invertible and Q_{X|Y} - Q_{X|S,Y} > 0 all hold with at least
    `min_margin` spectral slack, which keeps conditioning moderate.
    """
    dim = 2 * n + n_y
    for _ in range(max_tries):
        a = rng.standard_normal((dim, dim + 2))
        q = a @ a.T / (dim + 2)
        q = q / np.max(np.diag(q))
        try:
            spec = validate_spec(q, (n, n, n_y))
        except RemoteRdfError:
            continue
        stats = conditional_stats(spec)
        margins = (
            float(np.min(np.linalg.eigvalsh(stats.q_s_given_y))),
            float(np.min(np.linalg.eigvalsh(stats.q_x_given_y))),
            float(np.min(np.linalg.svd(stats.q_xs_given_y, compute_uv=False))),
            float(np.min(np.linalg.eigvalsh(stats.q_x_given_y - stats.q_x_given_sy))),
        )
        if min(margins) > min_margin:
            return spec
    raise RuntimeError(f"no feasible random spec after {max_tries} tries (n={n}, n_y={n_y})")


@pytest.fixture
def make_spec():
    return random_feasible_spec
