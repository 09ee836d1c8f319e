"""Exact functional decomposition on the oblique basis.

Full-support path: the coefficient vector solves the Gram linear system
whose right-hand side is the vector of expectations of basis-weighted model
values, and the component for a subset is its coefficient times the basis
function.  The reconstruction identity (sum of components equals the model
everywhere) is enforced after every solve via a residual check.

Degenerate path: when some configurations have probability zero the basis
columns are no longer independent on the support.  The identifiable
coefficients are obtained from the configuration matrix restricted to
support rows, with columns admitted in graded-lex order by Gaussian
elimination; coefficients of rejected columns are reported as
unidentifiable, never as zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import GramSystem, basis_matrix, gram_matrix, gram_system_from_gamma
from .distributions import COLLAPSED, JointPmf
from .errors import (
    ArityMismatch,
    CollapsedSupport,
    IllConditioned,
    NotFullSupport,
    UnidentifiableCoefficient,
)
from .models import Model, TruthTableModel
from .subsets import SubsetOrder, enumerate_subsets, mask_to_indices, subset_label

RESIDUAL_RTOL = 1e-9
DEGENERATE_PIVOT_RTOL = 1e-10

EXACT = "exact"
TRUNCATED = "truncated"
DEGENERATE_MODE = "degenerate"


@dataclass(frozen=True, eq=False)
class MuVector:
    """Expectations of basis-weighted model values, one per subset."""

    order: SubsetOrder
    mu: np.ndarray


def exact_mu(pmf: JointPmf, model: Model, order: SubsetOrder) -> MuVector:
    """Exact finite sums of pmf * basis * model over all configurations."""
    if not pmf.is_full:
        raise NotFullSupport("exact expectations require a full-support table")
    _check_dims(pmf, model)
    e = basis_matrix(pmf, order)
    mu = e.T @ (pmf.probs * model.table())
    return MuVector(order=order, mu=mu)


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Coefficients of the model on the oblique basis.

    ``retained`` lists the subset masks with identifiable coefficients
    (every subset of the order except in degenerate mode); ``gs`` is the
    Gram system over exactly those subsets and drives all index
    computations downstream.
    """

    order: SubsetOrder
    retained: tuple[int, ...]
    beta: np.ndarray
    mode: str
    cap: int | None
    unidentifiable: tuple[int, ...]
    gs: GramSystem
    pmf: JointPmf

    def beta_of(self, mask: int) -> float:
        return float(self.beta[self._position(mask)])

    def component_eval(self, mask: int, x) -> float:
        """Value of one component at one configuration."""
        pos = self._position(mask)
        return float(self.beta[pos] * self._basis_row(x)[pos])

    def reconstruct(self, x) -> float:
        """Sum of all identifiable components at one configuration."""
        return float(self._basis_row(x) @ self.beta)

    def table(self) -> np.ndarray:
        """Reconstruction over all configurations (full-support modes only)."""
        e = basis_matrix(self.pmf, self.gs.order)
        return e @ self.beta

    def _basis_row(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        if x.shape != (self.pmf.d,):
            raise ArityMismatch(f"expected a length-{self.pmf.d} binary vector")
        config = int(x @ (1 << np.arange(self.pmf.d, dtype=np.int64)))
        return basis_matrix(self.pmf, self.gs.order, np.array([config]))[0]

    def _position(self, mask: int) -> int:
        positions = self.__dict__.get("_position_cache")
        if positions is None:
            positions = {m: i for i, m in enumerate(self.retained)}
            self.__dict__["_position_cache"] = positions
        if mask in positions:
            return positions[mask]
        if mask in self.unidentifiable:
            raise UnidentifiableCoefficient(
                f"coefficient of {subset_label(mask)} is not identifiable on "
                "this support"
            )
        raise KeyError(f"subset {subset_label(mask)} is not in this decomposition")

    def to_dict(self) -> dict:
        doc = {
            "mode": self.mode,
            "subsets": [list(mask_to_indices(m)) for m in self.retained],
            "beta": [float(b) for b in self.beta],
            "unidentifiable": [list(mask_to_indices(m)) for m in self.unidentifiable],
        }
        if self.cap is not None:
            doc["cap"] = self.cap
        return doc


def _check_dims(pmf: JointPmf, model: Model) -> None:
    if model.d != pmf.d:
        raise ArityMismatch(
            f"model has {model.d} inputs but the distribution has {pmf.d}"
        )


def _check_residual(matrix: np.ndarray, solution: np.ndarray, rhs: np.ndarray, what: str) -> None:
    residual = float(np.linalg.norm(matrix @ solution - rhs))
    limit = RESIDUAL_RTOL * float(np.linalg.norm(rhs))
    if residual > limit:
        raise IllConditioned(
            f"{what} solve residual {residual:.3e} exceeds {limit:.3e}"
        )


def decompose(pmf: JointPmf, model: Model, cap: int | None = None) -> Decomposition:
    """Unique coefficients on a full-support table; optionally cardinality-capped.

    With a cap the result is the oblique projection onto the low-order
    subsets (the population limit of the truncated estimator); its
    reconstruction generally differs from the model because the Gram matrix
    is not block-diagonal.
    """
    _check_dims(pmf, model)
    order = enumerate_subsets(pmf.d, cap)
    gs = gram_matrix(pmf, order)
    mu = exact_mu(pmf, model, order)
    beta = gs.solve(mu.mu)
    _check_residual(gs.gamma, beta, mu.mu, "coefficient")
    return Decomposition(
        order=order,
        retained=order.masks,
        beta=beta,
        mode=EXACT if cap is None else TRUNCATED,
        cap=cap,
        unidentifiable=(),
        gs=gs,
        pmf=pmf,
    )


def degenerate_decompose(pmf: JointPmf, model: Model) -> Decomposition:
    """Identifiable sub-decomposition on a table with zero cells.

    Builds the configuration matrix over support rows, admits columns in
    graded-lex order (so low-order effects are kept) whenever their pivot
    survives relative thresholding, and solves the resulting square system.
    A full-support table is accepted and reproduces the exact coefficients
    through this independent path.
    """
    if pmf.support_class == COLLAPSED:
        raise CollapsedSupport(
            "support is collapsed (too many zero cells, a constant marginal, "
            "or functionally dependent coordinates); reformulate the model"
        )
    _check_dims(pmf, model)
    order = enumerate_subsets(pmf.d)
    support = pmf.support_masks()
    e_support = basis_matrix(pmf, order, support)
    y = model.table()[support]

    kept = _select_columns(e_support, len(support))
    e_tilde = e_support[:, kept]
    beta = np.linalg.solve(e_tilde, y)
    _check_residual(e_tilde, beta, y, "degenerate")

    retained = tuple(order.masks[j] for j in kept)
    weights = pmf.probs[support]
    gamma = e_tilde.T @ (weights[:, None] * e_tilde)
    gs = gram_system_from_gamma(
        SubsetOrder(d=pmf.d, cap=None, masks=retained), gamma, pmf
    )
    return Decomposition(
        order=order,
        retained=retained,
        beta=beta,
        mode=DEGENERATE_MODE,
        cap=None,
        unidentifiable=tuple(m for m in order.masks if m not in set(retained)),
        gs=gs,
        pmf=pmf,
    )


def _select_columns(e_support: np.ndarray, needed: int) -> list[int]:
    rows, cols = e_support.shape
    work = e_support.copy()
    row_scale = np.max(np.abs(e_support), axis=1)
    free = np.ones(rows, dtype=bool)
    kept: list[int] = []
    for j in range(cols):
        if len(kept) == needed:
            break
        candidates = np.where(free)[0]
        pivot_row = candidates[np.argmax(np.abs(work[candidates, j]))]
        pivot = work[pivot_row, j]
        if abs(pivot) <= DEGENERATE_PIVOT_RTOL * row_scale[pivot_row]:
            continue
        kept.append(j)
        free[pivot_row] = False
        others = np.where(free)[0]
        if others.size and j + 1 < cols:
            factors = work[others, j] / pivot
            work[np.ix_(others, range(j + 1, cols))] -= np.outer(
                factors, work[pivot_row, j + 1:]
            )
    if len(kept) != needed:
        raise CollapsedSupport(
            f"configuration matrix rank {len(kept)} is below the support size "
            f"{needed}; the support violates the degeneracy assumptions"
        )
    return kept


def auto_decompose(pmf: JointPmf, model: Model, cap: int | None = None) -> Decomposition:
    """Route to the exact or the degenerate path based on the support class."""
    if pmf.is_full:
        return decompose(pmf, model, cap)
    if cap is not None:
        raise NotFullSupport("cardinality-capped decomposition needs full support")
    return degenerate_decompose(pmf, model)


def reconstruction_model(dec: Decomposition) -> TruthTableModel:
    """The reconstruction as a truth-table model (full-support modes only)."""
    return TruthTableModel(values=dec.table())
