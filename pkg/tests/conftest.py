"""Shared brute-force oracles for the test suite.

Everything here recomputes walk functionals by enumerating all 2^n paths
directly, independently of the library's forward-DP code paths, so tests
compare two genuinely different routes to the same exact value.
"""

from fractions import Fraction
from itertools import product

import pytest


def all_paths(n):
    return list(product((1, -1), repeat=n))


def path_prob(path, p):
    prob = Fraction(1) if isinstance(p, (Fraction, int)) else 1.0
    q = 1 - p
    for x in path:
        prob *= p if x == 1 else q
    return prob


def path_max_end(path):
    """(M_n, S_n) of one path."""
    s = m = 0
    for x in path:
        s += x
        m = max(m, s)
    return m, s


def brute_expect(p, n, fn):
    """E[fn(M_n, S_n)] by full path enumeration."""
    return sum(path_prob(path, p) * fn(*path_max_end(path)) for path in all_paths(n))


def brute_joint(p, n):
    """Joint pmf of (M_n, S_n) by full path enumeration."""
    out = {}
    for path in all_paths(n):
        k, l = path_max_end(path)
        out[(k, l)] = out.get((k, l), Fraction(0)) + path_prob(path, p)
    return out


@pytest.fixture
def p_grid():
    return [Fraction(k, 10) for k in range(1, 10)]
