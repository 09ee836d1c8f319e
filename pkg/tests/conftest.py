"""Shared fixtures and brute-force oracles.

The oracles here deliberately avoid the library's own linear-algebra path:
conditional expectations are computed by direct summation over the
configuration table and components by inclusion-exclusion, so they provide
an independent check of the decomposition on independent inputs.
"""

import numpy as np
import pytest

import mbhd
from mbhd.basis import pattern_indices


def random_full_pmf(rng, d, floor=0.05):
    cells = rng.gamma(1.0, size=1 << d) + floor
    return mbhd.from_table(cells / cells.sum())


def random_model(rng, d, scale=1.0):
    return mbhd.TruthTableModel(values=scale * rng.normal(size=1 << d))


def submasks(mask):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def conditional_table(pmf, values, mask):
    """E[values(X) | X restricted to mask] as a table over all configs."""
    p = pmf.probs
    if mask == 0:
        return np.full(p.size, float(p @ values))
    pat = pattern_indices(np.arange(p.size, dtype=np.int64), mask)
    size = 1 << bin(mask).count("1")
    num = np.bincount(pat, weights=p * values, minlength=size)
    den = np.bincount(pat, weights=p, minlength=size)
    return (num / den)[pat]


def classical_component(pmf, model, mask):
    """Inclusion-exclusion component of the orthogonal decomposition.

    Valid as a reference only for independent inputs.
    """
    values = model.table()
    out = np.zeros(values.size)
    size_a = bin(mask).count("1")
    for sub in submasks(mask):
        sign = -1.0 if (size_a - bin(sub).count("1")) & 1 else 1.0
        out += sign * conditional_table(pmf, values, sub)
    return out


def classical_sobol(pmf, model, mask):
    """Var of the classical component over Var of the model (independent case)."""
    p = pmf.probs
    values = model.table()
    total_var = float(p @ values**2 - (p @ values) ** 2)
    comp = classical_component(pmf, model, mask)
    return float(p @ comp**2 - (p @ comp) ** 2) / total_var


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
