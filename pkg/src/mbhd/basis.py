"""The oblique basis of a dependent binary vector and its Gram system.

For a subset ``A`` the basis value at a configuration is the parity sign of
the coordinates in ``A`` divided by the marginal probability of the observed
pattern on ``A``; the empty set gives the constant 1.  Under a full-support
pmf the family is a (non-orthogonal) basis of all real functions of the
input vector; its Gram matrix of pairwise expectations is symmetric
positive definite, is assembled here by exact summation over the
configuration table, and is factorized once so every downstream solve can
reuse the factorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .distributions import JointPmf, marginal
from .errors import IllConditioned, NotFullSupport, ZeroMarginal, ZeroNorm
from .subsets import SubsetOrder, subset_label

PIVOT_RTOL = 1e-10
LAMBDA_MIN_TOL = 1e-9
LAMBDA_MIN_MAX_ITER = 500


def pattern_indices(config_masks: np.ndarray, subset_mask: int) -> np.ndarray:
    """Packed pattern of the coordinates in ``subset_mask`` for each config."""
    out = np.zeros(config_masks.shape, dtype=np.int64)
    bit = 0
    for i in range(subset_mask.bit_length()):
        if subset_mask >> i & 1:
            out |= ((config_masks >> i) & 1) << bit
            bit += 1
    return out


def basis_matrix(pmf: JointPmf, order: SubsetOrder, config_masks: np.ndarray | None = None) -> np.ndarray:
    """Basis values with one row per configuration and one column per subset.

    Rows default to all ``2^d`` configurations in mask order.  Raises
    ZeroMarginal if any requested row hits a zero-probability pattern for
    some subset in the order.
    """
    if config_masks is None:
        config_masks = np.arange(1 << pmf.d, dtype=np.int64)
    else:
        config_masks = np.asarray(config_masks, dtype=np.int64)
    out = np.empty((config_masks.size, len(order)))
    for j, mask in enumerate(order):
        if mask == 0:
            out[:, j] = 1.0
            continue
        marg = marginal(pmf, mask).probs[pattern_indices(config_masks, mask)]
        if (marg == 0.0).any():
            raise ZeroMarginal(
                f"subset {subset_label(mask)} has a zero-probability pattern "
                "among the requested configurations"
            )
        signs = np.where(np.bitwise_count(config_masks & mask) & 1, -1.0, 1.0)
        out[:, j] = signs / marg
    return out


def eval_basis(pmf: JointPmf, mask: int, x) -> float:
    """Basis value of one subset at one configuration."""
    x = np.asarray(x).astype(np.int64)
    config = int((x << np.arange(pmf.d)).sum())
    return float(basis_matrix(pmf, _singleton_order(pmf.d, mask), np.array([config]))[0, 0])


def _singleton_order(d: int, mask: int) -> SubsetOrder:
    return SubsetOrder(d=d, cap=None, masks=(mask,))


@dataclass(frozen=True, eq=False)
class GramSystem:
    """Gram matrix of the basis on an order, with its Cholesky factor.

    ``lambda_min`` is the smallest eigenvalue, obtained by inverse power
    iteration on the factorization; it enters only the concentration bound.
    """

    order: SubsetOrder
    gamma: np.ndarray
    factor: tuple
    lambda_min: float
    pmf_ref: JointPmf

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve(self.factor, rhs, check_finite=False)

    def inverse(self) -> np.ndarray:
        inv = self.solve(np.eye(len(self.order)))
        return (inv + inv.T) / 2.0


def _factorize(gamma: np.ndarray) -> tuple:
    try:
        factor = cho_factor(gamma, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise IllConditioned(f"Gram matrix is not positive definite: {exc}") from exc
    pivots = np.diag(factor[0]) ** 2
    if pivots.min() <= PIVOT_RTOL * gamma.diagonal().max():
        raise IllConditioned(
            f"Gram factorization pivot {pivots.min():.3e} below tolerance"
        )
    return factor


def _lambda_min(factor: tuple, size: int) -> float:
    # Inverse power iteration: the Rayleigh quotient of the inverse at the
    # running iterate converges to 1 / lambda_min.
    v = 1.0 + np.arange(size) / (7.0 * size)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(LAMBDA_MIN_MAX_ITER):
        y = cho_solve(factor, v, check_finite=False)
        rayleigh = float(v @ y)
        v = y / np.linalg.norm(y)
        if abs(rayleigh - estimate) <= LAMBDA_MIN_TOL * abs(rayleigh):
            estimate = rayleigh
            break
        estimate = rayleigh
    return 1.0 / estimate


def gram_system_from_gamma(order: SubsetOrder, gamma: np.ndarray, pmf: JointPmf) -> GramSystem:
    gamma = (gamma + gamma.T) / 2.0
    gamma.setflags(write=False)
    factor = _factorize(gamma)
    return GramSystem(
        order=order,
        gamma=gamma,
        factor=factor,
        lambda_min=_lambda_min(factor, len(order)),
        pmf_ref=pmf,
    )


def gram_matrix(pmf: JointPmf, order: SubsetOrder) -> GramSystem:
    """Assemble and factorize the Gram matrix by exact summation.

    Requires full support; degenerate tables must go through the
    identifiable-subset path instead.  With a capped order this yields the
    exact principal submatrix of the full Gram matrix.
    """
    if not pmf.is_full:
        raise NotFullSupport(
            f"Gram assembly needs full support, table is {pmf.support_class}"
        )
    e = basis_matrix(pmf, order)
    gamma = e.T @ (pmf.probs[:, None] * e)
    return gram_system_from_gamma(order, gamma, pmf)


@dataclass(frozen=True, eq=False)
class DualCoefficients:
    """Rows of the inverse Gram matrix: coefficients of the dual basis."""

    order: SubsetOrder
    matrix: np.ndarray

    def row(self, mask: int) -> np.ndarray:
        return self.matrix[self.order.index_of(mask)]


def dual_coefficients(gs: GramSystem) -> DualCoefficients:
    return DualCoefficients(order=gs.order, matrix=gs.inverse())


def angle(u, v, pmf: JointPmf) -> float:
    """Angle in radians between two functions under the pmf-weighted product.

    The cosine is clamped to [-1, 1] to absorb rounding before arccos.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    w = pmf.probs
    inner = float(np.sum(w * u * v))
    nu = float(np.sqrt(np.sum(w * u * u)))
    nv = float(np.sqrt(np.sum(w * v * v)))
    if nu == 0.0 or nv == 0.0:
        raise ZeroNorm("angle undefined for a function vanishing on the support")
    return float(np.arccos(np.clip(inner / (nu * nv), -1.0, 1.0)))


def save_gram_csv(gs: GramSystem, path) -> None:
    """Audit export: Gram matrix with subset labels on rows and columns."""
    labels = gs.order.labels()
    with open(path, "w") as fh:
        fh.write("subset," + ",".join(labels) + "\n")
        for label, row in zip(labels, gs.gamma):
            fh.write(label + "," + ",".join(repr(float(v)) for v in row) + "\n")
