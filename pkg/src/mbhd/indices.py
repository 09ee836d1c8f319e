"""Variance-based importance indices derived from a decomposition.

Everything is computed from the coefficient vector and the Gram matrix:
the covariance between two components is the product of their coefficients
and the corresponding Gram entry, so the full index family costs one
matrix of products once the decomposition exists.  Indices of a truncated
decomposition are flagged approximate and their actual sum is reported,
because the normalization to 1 only holds for a complete decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .decomposition import DEGENERATE_MODE, TRUNCATED, Decomposition
from .errors import ZeroVariance
from .subsets import enumerate_subsets, mask_to_indices, popcount, subset_label

VARIANCE_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class SensitivityReport:
    """Sobol' indices, their variance/covariance split, and Shapley effects.

    Vectors are aligned with ``masks`` (the decomposition's identifiable
    subsets); ``shapley`` has one entry per input coordinate.
    """

    d: int
    masks: tuple[int, ...]
    variance: float
    sobol: np.ndarray
    sobol_var: np.ndarray
    sobol_cov: np.ndarray
    sobol_matrix: np.ndarray
    shapley: np.ndarray
    sobol_sum: float
    flags: tuple[str, ...]

    def sobol_of(self, mask: int) -> float:
        return float(self.sobol[self.masks.index(mask)])

    def to_dict(self) -> dict:
        return {
            "variance": self.variance,
            "sobol": [
                {
                    "subset": list(mask_to_indices(m)),
                    "S": float(s),
                    "S_var": float(sv),
                    "S_cov": float(sc),
                }
                for m, s, sv, sc in zip(
                    self.masks, self.sobol, self.sobol_var, self.sobol_cov
                )
            ],
            "shapley": [float(v) for v in self.shapley],
            "sobol_sum": self.sobol_sum,
            "flags": list(self.flags),
        }


def sensitivity(dec: Decomposition) -> SensitivityReport:
    """All indices of a decomposition, from its coefficients and Gram matrix."""
    beta = dec.beta
    gamma = dec.gs.gamma
    empty = dec.retained.index(0)
    variance = float(beta @ gamma @ beta - beta[empty] ** 2)
    if variance < VARIANCE_FLOOR:
        raise ZeroVariance(
            f"model variance {variance:.3e} is below {VARIANCE_FLOOR}; "
            "indices are undefined for a constant model"
        )
    matrix = np.outer(beta, beta) * gamma / variance
    matrix[empty, :] = 0.0  # the constant component has no covariance with anything
    matrix[:, empty] = 0.0
    sobol = matrix.sum(axis=1)
    sobol_var = np.diag(matrix).copy()

    shapley = np.zeros(dec.pmf.d)
    for mask, s in zip(dec.retained, sobol):
        if mask == 0:
            continue
        share = s / popcount(mask)
        for i in mask_to_indices(mask):
            shapley[i - 1] += share

    flags = []
    if dec.mode == TRUNCATED:
        flags.append("approximate")
    if dec.mode == DEGENERATE_MODE and dec.unidentifiable:
        flags.append("identifiable-subset")
    return SensitivityReport(
        d=dec.pmf.d,
        masks=dec.retained,
        variance=variance,
        sobol=sobol,
        sobol_var=sobol_var,
        sobol_cov=sobol - sobol_var,
        sobol_matrix=matrix,
        shapley=shapley,
        sobol_sum=float(sobol.sum()),
        flags=tuple(flags),
    )


def shapley_from_dividends(dividends, d: int | None = None) -> np.ndarray:
    """Exact Shapley values of the game whose dividends are given.

    ``dividends`` is either a mapping from subset mask to dividend (missing
    subsets count as zero) or a sequence aligned with the full graded-lex
    order of dimension ``d``.  The value of a player is the sum of the
    dividends of the subsets containing it, each divided by the subset size.
    """
    if isinstance(dividends, Mapping):
        if d is None:
            d = max((int(m).bit_length() for m in dividends), default=0)
        items = [(int(m), float(v)) for m, v in dividends.items()]
    else:
        values = np.asarray(dividends, dtype=float)
        if d is None:
            if values.size & (values.size - 1):
                raise ValueError("sequence dividends need length 2^d or explicit d")
            d = values.size.bit_length() - 1
        order = enumerate_subsets(d)
        if values.size != len(order):
            raise ValueError(
                f"expected {len(order)} dividends for dimension {d}, got {values.size}"
            )
        items = list(zip(order.masks, values))
    out = np.zeros(d)
    for mask, value in items:
        if mask == 0:
            continue
        share = value / popcount(mask)
        for i in mask_to_indices(mask):
            out[i - 1] += share
    return out


def save_sobol_matrix_csv(report: SensitivityReport, path) -> None:
    """Sobol' matrix with subset labels on rows and columns."""
    labels = [subset_label(m) for m in report.masks]
    with open(path, "w") as fh:
        fh.write("subset," + ",".join(labels) + "\n")
        for label, row in zip(labels, report.sobol_matrix):
            fh.write(label + "," + ",".join(repr(float(v)) for v in row) + "\n")
