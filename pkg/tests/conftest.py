"""Shared brute-force oracles for the test suite.

These stay independent of the library code paths they check: plain grid
enumeration and sign-pattern KKT solves, used to freeze expected values.
"""

import numpy as np
import pytest


def grid_argmin_1d(fun, lo, hi, n=200001):
    xs = np.linspace(lo, hi, n)
    vals = np.array([fun(x) for x in xs])
    return xs[int(np.argmin(vals))]


def grid_argmin_2d(fun, lo, hi, n=401):
    xs = np.linspace(lo, hi, n)
    best, arg = np.inf, None
    for a in xs:
        for b in xs:
            v = fun(a, b)
            if v < best:
                best, arg = v, (a, b)
    return np.array(arg)


def lasso_kkt_oracle(M, b, rho):
    """Exact small-dimension solve of min 0.5||My - b||^2 + rho||y||_1 by
    enumerating sign patterns and checking stationarity."""
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    n = M.shape[1]
    best, best_val = None, np.inf
    import itertools

    for signs in itertools.product((-1, 0, 1), repeat=n):
        s = np.array(signs, dtype=float)
        active = s != 0
        y = np.zeros(n)
        if active.any():
            Ma = M[:, active]
            rhs = Ma.T @ b - rho * s[active]
            try:
                y_a = np.linalg.solve(Ma.T @ Ma, rhs)
            except np.linalg.LinAlgError:
                continue
            if np.any(np.sign(y_a) != s[active]):
                continue
            y[active] = y_a
        grad = M.T @ (M @ y - b)
        ok = True
        for j in range(n):
            if active[j]:
                if abs(grad[j] + rho * s[j]) > 1e-9:
                    ok = False
            else:
                if abs(grad[j]) > rho + 1e-9:
                    ok = False
        if not ok:
            continue
        val = 0.5 * np.sum((M @ y - b) ** 2) + rho * np.sum(np.abs(y))
        if val < best_val:
            best_val, best = val, y
    assert best is not None, "sign enumeration found no KKT point"
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)
