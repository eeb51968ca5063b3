"""Shared brute-force oracles.

These deliberately avoid the package's own play/engine code: they walk every
permutation with plain Python lists and count outcomes directly.
"""

import itertools
import math
import sys
from fractions import Fraction

import pytest


def brute_waits(a, b):
    """Waiting time for every binding of S_n; ``a``, ``b`` are 1-based lists."""
    n = len(a)
    out = []
    for perm in itertools.permutations(range(1, n + 1)):
        z = n + 1
        for i in range(n):
            if perm[a[i] - 1] == b[i]:
                z = i + 1
                break
        out.append(z)
    return out


def brute_w(a, b):
    waits = brute_waits(a, b)
    return Fraction(sum(waits), len(waits))


def brute_survival(a, b):
    n = len(a)
    waits = brute_waits(a, b)
    return [Fraction(sum(z > k for z in waits), len(waits)) for k in range(n + 1)]


def brute_hits(cells, n):
    """Law of X = #{(i, j) in cells : pi(i) = j} as a list of Fractions."""
    cells = set(cells)
    counts = [0] * (len(cells) + 1)
    for perm in itertools.permutations(range(1, n + 1)):
        counts[sum(perm[i - 1] == j for i, j in cells)] += 1
    total = math.factorial(n)
    return [Fraction(c, total) for c in counts]


def brute_avoid(cells, n):
    return sum(all(perm[i - 1] != j for i, j in cells)
               for perm in itertools.permutations(range(1, n + 1)))


@pytest.fixture
def oracle():
    class O:
        waits = staticmethod(brute_waits)
        w = staticmethod(brute_w)
        survival = staticmethod(brute_survival)
        hits = staticmethod(brute_hits)
        avoid = staticmethod(brute_avoid)
    return O


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
