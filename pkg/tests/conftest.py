import numpy as np
import pytest
from scipy.stats import norm

from histmfa.distributions import EquiDepthHistogram, QuantileFunction
from histmfa.quantiles import BlockSet, QuantileTable, center_columns

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_equidepth(rng, s, loc=0.0, spread=5.0):
    bounds = np.sort(loc + spread * rng.standard_normal(s + 1))
    return EquiDepthHistogram.from_bounds(bounds)


def random_qf(rng, m=None):
    m = m or int(rng.integers(2, 12))
    levels = np.concatenate(([0.0], np.sort(rng.uniform(0.02, 0.98, m - 1)), [1.0]))
    levels = np.unique(levels)
    values = np.sort(rng.normal(0, 3, len(levels)))
    return QuantileFunction(levels, values)


def normal_qf(mu, sigma, K):
    """Quantile function of N(mu, sigma) on K equal-probability knots.

    The infinite tails are cut at the half-bin levels 1/(2K) and 1 - 1/(2K).
    """
    t = np.arange(K + 1) / K
    inner = norm.ppf(t[1:-1])
    ends = norm.ppf([0.5 / K, 1 - 0.5 / K])
    z = np.concatenate(([ends[0]], inner, [ends[1]]))
    return QuantileFunction(t, mu + sigma * z)


def random_table(rng, name, n, width):
    """Centered table whose rows are sorted (valid quantile rows)."""
    rows = np.sort(rng.normal(0, 1, (n, width)) * rng.uniform(0.5, 3, (n, 1)), axis=1)
    rows += rng.normal(0, 2, (n, 1))
    return center_columns(QuantileTable(name, rows))


def random_blockset(rng, n, widths):
    return BlockSet(tuple(random_table(rng, f"V{j}", n, w) for j, w in enumerate(widths)))


def jacobi_eigh(A, tol=1e-15, max_sweeps=100):
    """Cyclic Jacobi rotations on a symmetric matrix, in plain Python loops.

    Returns eigenvalues (descending) and eigenvectors as columns.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off <= tol * max(1.0, np.sqrt(np.sum(A**2))):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp, akq = A[k, p], A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk, aqk = A[p, k], A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp, vkq = V[k, p], V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    vals = np.diag(A).copy()
    order = np.argsort(-vals, kind="stable")
    return vals[order], V[:, order]


def orient_columns(V, weights=None):
    """Flip columns so their largest |entry| (among weighted rows) is positive."""
    V = np.array(V, dtype=float)
    mask = np.ones(V.shape[0], bool) if weights is None else np.asarray(weights) > 0
    for a in range(V.shape[1]):
        col = np.where(mask, np.abs(V[:, a]), -1.0)
        k = int(np.argmax(col))
        if V[k, a] < 0:
            V[:, a] = -V[:, a]
    return V


def rv_by_hand(Q1, Q2, w):
    """RV from explicit triple loops over the trace formula."""
    n, k1 = Q1.shape
    k2 = Q2.shape[1]

    def cross(X, Y):
        out = np.zeros((X.shape[1], Y.shape[1]))
        for a in range(X.shape[1]):
            for b in range(Y.shape[1]):
                out[a, b] = sum(w[i] * X[i, a] * Y[i, b] for i in range(n))
        return out

    s12, s21 = cross(Q1, Q2), cross(Q2, Q1)
    s11, s22 = cross(Q1, Q1), cross(Q2, Q2)
    tr = lambda M: sum(M[i, i] for i in range(M.shape[0]))
    return tr(s12 @ s21) / np.sqrt(tr(s11 @ s11) * tr(s22 @ s22))
