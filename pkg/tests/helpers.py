"""Random generators shared by the test modules."""
from __future__ import annotations

import numpy as np

from kostant_lab.kostant import PolarizedForm
from kostant_lab.series import TruncatedSeries


def gaussian_int(rng, lo=-3, hi=3) -> complex:
    return complex(int(rng.integers(lo, hi + 1)), int(rng.integers(lo, hi + 1)))


def random_series(rng, arity, order, max_degree, terms=6, integer=True, avoid=None) -> TruncatedSeries:
    """Random sparse series of degree <= max_degree.

    ``avoid`` is a pair index whose exponents may not both be zero, so the
    series vanishes on that pair's singular set.
    """
    coeffs = {}
    for _ in range(terms * 4):
        if len(coeffs) >= terms:
            break
        e = [0] * (2 * arity)
        deg = int(rng.integers(1, max_degree + 1))
        for _ in range(deg):
            e[int(rng.integers(0, 2 * arity))] += 1
        if avoid is not None and e[2 * avoid - 2] + e[2 * avoid - 1] == 0:
            continue
        c = gaussian_int(rng) if integer else complex(rng.normal(), rng.normal())
        if c != 0:
            coeffs[tuple(e)] = c
    return TruncatedSeries(arity, order, coeffs)


def random_polarized(rng, degree, arity, order, max_degree, terms=4) -> PolarizedForm:
    """Random formal polarised form whose coefficient on a tuple vanishes on each listed pair's singular set."""
    from itertools import combinations

    coeffs = {}
    for tup in combinations(range(1, arity + 1), degree):
        s = random_series(rng, arity, order, max_degree, terms, avoid=tup[0] if tup else None)
        # vanish on every listed singular set: multiply in one variable of each other listed pair
        for j in tup[1:]:
            var = TruncatedSeries.monomial(arity, order, _unit(arity, 2 * j - 2 + int(rng.integers(0, 2))))
            s = s * var
        coeffs[tup] = s
    return PolarizedForm(degree, arity, coeffs, "formal", order)


def _unit(arity, idx):
    e = [0] * (2 * arity)
    e[idx] = 1
    return tuple(e)


def dense_2d(f: TruncatedSeries) -> np.ndarray:
    out = np.zeros((f.order + 1, f.order + 1), dtype=complex)
    for (k, l), v in f.items():
        out[k, l] = v
    return out


# one line per acceptance criterion, printed by the terminal summary hook
ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, title: str, ok: bool, detail: str) -> bool:
    ACCEPTANCE_LINES.append(f"acceptance {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")
    return ok
