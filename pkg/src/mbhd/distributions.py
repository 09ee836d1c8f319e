"""Joint distributions of dependent binary vectors.

Conventions
-----------
A joint pmf over ``{0,1}^d`` is stored as a dense table of ``2^d``
probabilities indexed by configuration mask: entry ``m`` is the probability
of the configuration whose coordinate ``x_i`` equals bit ``i - 1`` of ``m``
(mask-ascending order).  Marginal tables follow the same convention on the
packed pattern of the retained coordinates, smallest coordinate in bit 0.

Support classes
---------------
``full``
    every configuration has positive probability; the exact decomposition
    machinery applies as-is.
``degenerate``
    some cells are exactly zero, fewer than ``2^(d-1)`` of them, no marginal
    is 0 or 1, and no coordinate is a deterministic function of another;
    only the identifiable sub-decomposition is available.
``collapsed``
    anything worse; the model should be reformulated (drop constant or
    perfectly dependent coordinates) before analysis.

A cell counts as zero only when it is exactly ``0.0``: analytic
constructors never produce negative dust, and empirical tables put ``0.0``
in unobserved cells, so no epsilon thresholding is applied (silently
discarding small but valid configurations would corrupt the analysis).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from .errors import (
    DegenerateMarginal,
    InvalidCorrelation,
    NegativeProbability,
    NotNormalized,
    OutOfFGMRange,
)
from .subsets import MAX_MASK_DIMENSION, mask_to_indices

NORMALIZATION_SLACK = 1e-6

FULL = "full"
DEGENERATE = "degenerate"
COLLAPSED = "collapsed"


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Dense probability table over ``{0,1}^d`` with a support class."""

    d: int
    probs: np.ndarray
    support_class: str
    zero_cells: int

    @property
    def is_full(self) -> bool:
        return self.support_class == FULL

    def support_masks(self) -> np.ndarray:
        """Configuration masks with positive probability, ascending."""
        return np.nonzero(self.probs > 0.0)[0]


@dataclass(frozen=True)
class MarginalTable:
    """Distribution of the subvector on ``mask``, indexed by packed pattern."""

    mask: int
    probs: np.ndarray


@dataclass(frozen=True)
class SampleSet:
    """Binary observations, one row per draw, with optional model outputs."""

    rows: np.ndarray
    outputs: np.ndarray | None = None

    def __post_init__(self):
        rows = np.ascontiguousarray(np.asarray(self.rows, dtype=np.uint8))
        if rows.ndim != 2:
            raise ValueError("rows must be a 2-d array of 0/1 values")
        if rows.size and rows.max() > 1:
            raise ValueError("rows must contain only 0 and 1")
        object.__setattr__(self, "rows", rows)
        if self.outputs is not None:
            y = np.asarray(self.outputs, dtype=float)
            if y.shape != (rows.shape[0],):
                raise ValueError("outputs must have one value per row")
            object.__setattr__(self, "outputs", y)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    def config_masks(self) -> np.ndarray:
        weights = (1 << np.arange(self.d, dtype=np.int64))
        return self.rows.astype(np.int64) @ weights


def config_bits(d: int) -> np.ndarray:
    """(2^d, d) array of coordinate values, row ``m`` = bits of mask ``m``."""
    masks = np.arange(1 << d, dtype=np.int64)
    return ((masks[:, None] >> np.arange(d)) & 1).astype(np.uint8)


def _classify_support(probs: np.ndarray, d: int) -> tuple[str, int]:
    zero = probs == 0.0
    r = int(zero.sum())
    if r == 0:
        return FULL, 0
    if r >= 1 << (d - 1):
        return COLLAPSED, r
    support = np.nonzero(~zero)[0]
    bits = ((support[:, None] >> np.arange(d)) & 1).astype(np.uint8)
    for i in range(d):
        if bits[:, i].min() == bits[:, i].max():
            return COLLAPSED, r  # marginal is 0 or 1
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            on0 = np.unique(bits[bits[:, i] == 0, j])
            on1 = np.unique(bits[bits[:, i] == 1, j])
            if on0.size <= 1 and on1.size <= 1:
                return COLLAPSED, r  # x_j is a function of x_i on the support
    return DEGENERATE, r


def from_table(probs) -> JointPmf:
    """Validate, renormalize and classify a dense probability table.

    The length must be a power of two and all entries nonnegative.  A total
    within ``1e-6`` of 1 is renormalized exactly; anything further off is an
    error rather than a silent rescale.
    """
    arr = np.array(probs, dtype=float)
    if arr.ndim != 1 or arr.size < 2 or arr.size & (arr.size - 1):
        raise ValueError("probability table length must be a power of two >= 2")
    d = arr.size.bit_length() - 1
    if d > MAX_MASK_DIMENSION:
        raise ValueError(f"dimension {d} exceeds the mask limit {MAX_MASK_DIMENSION}")
    if (arr < 0.0).any():
        raise NegativeProbability("probability table has negative entries")
    total = float(arr.sum())
    if abs(total - 1.0) > NORMALIZATION_SLACK:
        raise NotNormalized(f"probabilities sum to {total!r}, expected 1")
    arr /= total
    kind, r = _classify_support(arr, d)
    arr.setflags(write=False)
    return JointPmf(d=d, probs=arr, support_class=kind, zero_cells=r)


def product_of_marginals(q) -> JointPmf:
    """Independent Bernoulli(q_i) joint table; every q_i must lie in (0,1)."""
    q = np.asarray(q, dtype=float)
    if ((q <= 0.0) | (q >= 1.0)).any():
        raise DegenerateMarginal("marginal parameters must lie strictly in (0,1)")
    d = q.size
    bits = config_bits(d)
    cells = np.where(bits == 1, q[None, :], (1.0 - q)[None, :]).prod(axis=1)
    return from_table(cells)


def empirical(samples: SampleSet, smoothing: float = 0.0) -> JointPmf:
    """Empirical joint table of a sample, with optional pseudo-count smoothing."""
    if samples.n < 1:
        raise ValueError("need at least one observation")
    if smoothing < 0.0:
        raise ValueError("smoothing pseudo-count must be nonnegative")
    size = 1 << samples.d
    counts = np.bincount(samples.config_masks(), minlength=size).astype(float)
    return from_table((counts + smoothing) / (samples.n + smoothing * size))


LATENT_RESCALE = 0.45


def gaussian_equicorrelated(d: int, rho: float, nodes: int = 64) -> JointPmf:
    """Joint law of indicators of an equicorrelated Gaussian vector below 0.

    Each coordinate is Bernoulli(1/2); ``rho`` is the common latent
    correlation.  The one-factor representation makes coordinates
    conditionally independent given the shared factor, so the cell
    probabilities reduce to one-dimensional integrals evaluated with
    Gauss-Hermite quadrature (spectrally accurate in ``nodes`` for these
    smooth integrands; very steep cases, rho above roughly 0.95, need more
    nodes).  The latent variable is contracted by a fixed factor before
    applying the rule, which concentrates nodes where the conditional
    success probability transitions; the substitution is exact, so this is
    still an ``nodes``-point Hermite rule.  Cell values depend on the
    configuration only through its number of ones, making exchangeability
    hold by construction, and node symmetry keeps every marginal at exactly
    one half.
    """
    if not 0.0 <= rho < 1.0:
        raise InvalidCorrelation(f"correlation must be in [0, 1), got {rho}")
    if not 4 <= nodes <= 350:
        raise ValueError("node count must be between 4 and 350")
    if rho == 0.0:
        return product_of_marginals(np.full(d, 0.5))
    t, w = np.polynomial.hermite.hermgauss(nodes)
    u = np.sqrt(2.0) * t
    scale = LATENT_RESCALE
    weights = (w / np.sqrt(np.pi)) * scale * np.exp(-(scale**2 - 1.0) * u**2 / 2.0)
    slope = np.sqrt(rho / (1.0 - rho))
    p = ndtr(-slope * scale * u)
    ones = np.arange(d + 1)
    by_count = (weights[:, None] * p[:, None] ** ones * (1.0 - p[:, None]) ** (d - ones)).sum(axis=0)
    masks = np.arange(1 << d, dtype=np.int64)
    return from_table(by_count[np.bitwise_count(masks)])


def fgm_threshold(rho: float) -> JointPmf:
    """Two-dimensional pmf of indicators of FGM-coupled uniforms below 1/2.

    ``rho`` is the probability that both coordinates are 1; the copula
    parameter is ``16*rho - 4`` and must lie in [-1, 1], restricting ``rho``
    to [3/16, 5/16].  Matched-pair tables outside that window are still
    valid Bernoulli pmfs and can be built with :func:`from_table`.
    """
    theta = 16.0 * rho - 4.0
    if not -1.0 <= theta <= 1.0:
        raise OutOfFGMRange(
            f"cell probability {rho} maps to copula parameter {theta} outside [-1, 1]"
        )
    return from_table([rho, 0.5 - rho, 0.5 - rho, rho])


def marginal(pmf: JointPmf, mask: int) -> MarginalTable:
    """Exact marginal of the coordinates in ``mask``; the empty set gives [1]."""
    if mask == 0:
        return MarginalTable(mask=0, probs=np.array([1.0]))
    if mask >> pmf.d:
        raise ValueError(f"subset {mask_to_indices(mask)} exceeds dimension {pmf.d}")
    tensor = pmf.probs.reshape((2,) * pmf.d)
    # axis d-i holds coordinate i; summing the complement leaves the packed
    # pattern with the smallest retained coordinate in bit 0.
    drop = tuple(pmf.d - i for i in range(1, pmf.d + 1) if not mask >> (i - 1) & 1)
    out = tensor.sum(axis=drop).reshape(-1)
    return MarginalTable(mask=mask, probs=out)


def sample(pmf: JointPmf, n: int, seed: int) -> SampleSet:
    """Draw ``n`` i.i.d. configurations by inverse CDF over the table.

    Reproducible: the draw is a pure function of ``(seed, n)``.
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(pmf.probs)
    cdf[-1] = 1.0
    masks = np.searchsorted(cdf, rng.random(n), side="right")
    rows = ((masks[:, None] >> np.arange(pmf.d)) & 1).astype(np.uint8)
    return SampleSet(rows=rows)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def save_pmf(pmf: JointPmf, path) -> None:
    doc = {"d": pmf.d, "probs": pmf.probs.tolist(), "order": "mask-ascending"}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_pmf(path) -> JointPmf:
    doc = json.loads(Path(path).read_text())
    if doc.get("order", "mask-ascending") != "mask-ascending":
        raise ValueError(f"unsupported pmf order {doc.get('order')!r}")
    pmf = from_table(doc["probs"])
    if pmf.d != doc.get("d", pmf.d):
        raise ValueError("pmf table length disagrees with declared dimension")
    return pmf


def save_samples(samples: SampleSet, path) -> None:
    """CSV with one row per observation: d binary columns, then optional y."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = [f"x{i}" for i in range(1, samples.d + 1)]
        if samples.outputs is not None:
            header.append("y")
        writer.writerow(header)
        for i in range(samples.n):
            row = [int(v) for v in samples.rows[i]]
            if samples.outputs is not None:
                row.append(repr(float(samples.outputs[i])))
            writer.writerow(row)


def load_samples(path) -> SampleSet:
    """Read the sample CSV format written by :func:`save_samples`.

    A header row is optional; with a header, the output column must be
    named ``y``.  Headerless files are assumed to be inputs only unless the
    last column contains a value other than 0 or 1.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    has_header = bool(rows) and any(not _is_number(c) for c in rows[0])
    if has_header:
        has_y = rows[0][-1].strip().lower() == "y"
        data = rows[1:]
    else:
        data = rows
        has_y = any(_is_fractional(r[-1]) for r in data)
    if not data:
        raise ValueError(f"no data rows in {path}")
    d = len(data[0]) - 1 if has_y else len(data[0])
    x = np.array([[int(float(c)) for c in r[:d]] for r in data], dtype=np.uint8)
    y = np.array([float(r[d]) for r in data]) if has_y else None
    return SampleSet(rows=x, outputs=y)


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def _is_fractional(token: str) -> bool:
    try:
        v = float(token)
    except ValueError:
        return False
    return v not in (0.0, 1.0)
