"""Shared helpers for the test suite."""

import json
import os
import random
from fractions import Fraction

from exactvc.stats import OneWayStats

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name):
    return os.path.join(FIXTURES, name)


def load_stats_fixture(name) -> OneWayStats:
    with open(fixture_path(name)) as f:
        d = json.load(f)
    return OneWayStats(
        tuple(d["sizes"]),
        tuple(d["mults"]),
        tuple(Fraction(str(v)) for v in d["means"]),
        tuple(Fraction(str(v)) for v in d["betweenSS"]),
        Fraction(str(d["withinSS"])))


def random_oneway_stats(rng: random.Random, max_q: int = 10,
                        max_size: int = 30) -> OneWayStats:
    """Random generic sufficient statistics.

    Rational means and positive sums of squares with moderate numerators
    and denominators; generic with overwhelming probability.
    """
    while True:
        M = rng.randrange(1, 6)
        sizes = sorted(rng.sample(range(1, max_size + 1), M))
        if max(sizes) < 2:
            continue
        mults = []
        budget = max_q
        for i in range(M):
            hi = max(1, min(4, budget - (M - 1 - i)))
            m = rng.randrange(1, hi + 1)
            mults.append(m)
            budget -= m
        if sum(mults) < 2:
            continue
        means = tuple(Fraction(rng.randrange(-400, 401), rng.randrange(1, 40))
                      for _ in range(M))
        between = tuple(
            Fraction(rng.randrange(1, 900), rng.randrange(1, 30))
            if m >= 2 else Fraction(0)
            for m in mults)
        within = Fraction(rng.randrange(1, 2000), rng.randrange(1, 20))
        return OneWayStats(tuple(sizes), tuple(mults), means, between, within)
