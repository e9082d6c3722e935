import numpy as np
import pytest

from extpower import SpectrumSpec, build_commuting_pair, predict_limit


def align(a, b):
    """Flip ``b`` onto the sign of ``a`` and return the max deviation."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a @ b < 0:
        b = -b
    return float(np.max(np.abs(a - b)))


def random_commuting_problem(seed, dims=(3, 12), max_ratio=0.95):
    """Seeded random rotated commuting pair with a well separated limit.

    Returns ``(spec, pair, basis, s, mu, prediction)``. The shift sits near a
    randomly chosen eigenvalue of S; draws are repeated until the largest
    factor beats the runner-up by at least 5% (rate ratio <= max_ratio) and
    the all-ones start vector overlaps the predicted limit.
    """
    rng = np.random.default_rng(seed)
    while True:
        n = int(rng.integers(dims[0], dims[1] + 1))
        e = rng.uniform(0.5, 5.0, n) * rng.choice([-1.0, 1.0], n)
        s_vals = rng.uniform(0.0, 5.0, n)
        k = int(rng.integers(n))
        mu = s_vals[k] - rng.choice([-1.0, 1.0]) * rng.uniform(0.01, 0.3)
        if np.min(np.abs(s_vals - mu)) < 1e-3:
            continue
        spec = SpectrumSpec(tuple(zip(e, s_vals)), rotation_seed=int(rng.integers(2**31)))
        pred = predict_limit(spec, mu)
        if pred.degenerate or pred.rate_ratio > max_ratio:
            continue
        pair, Q = build_commuting_pair(spec)
        overlap = Q[:, pred.winner_index] @ np.ones(n) / np.sqrt(n)
        if abs(overlap) <= 1e-6:
            continue
        return spec, pair, Q, float(s_vals[k]), float(mu), pred


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
