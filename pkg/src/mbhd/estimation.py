"""Sample-based estimation of the decomposition with confidence statements.

The Gram matrix depends only on the input distribution, so when that
distribution is known the only estimated object is the vector of mean
basis-weighted outputs; the coefficient estimator is its solve against the
known (possibly cardinality-capped, hence biased) Gram matrix.  When only
samples exist, the empirical table supplies the marginals and a
sample-averaged Gram matrix is used instead; results built that way carry
an ``empirical-gram`` flag because the distribution itself is then
estimated.

Pointwise predictions come with central-limit intervals driven by the
sandwich variance of the solve, and with a distribution-free exponential
tail bound whose ingredients (smallest Gram eigenvalue, sup-norm of the
centered integrand, norm of the basis vector at the query point) are
reported alongside the bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .basis import GramSystem, basis_matrix, gram_system_from_gamma
from .decomposition import EXACT, Decomposition, _check_residual, exact_mu
from .distributions import SampleSet, empirical, sample
from .errors import (
    ArityMismatch,
    EpsOutOfRange,
    InsufficientSamples,
    NotFullSupport,
    OffSupportSample,
    ZeroMarginal,
)
from .models import Model, TruthTableModel
from .subsets import enumerate_subsets

SIGMA_EIGENVALUE_FLOOR = -1e-10
DEFAULT_LEVEL = 0.95


@dataclass(frozen=True, eq=False)
class EstimationResult:
    """Sample estimates of the mean vector and coefficients on an order."""

    n: int
    order: tuple[int, ...]
    mu_hat: np.ndarray
    sigma_hat: np.ndarray
    beta_hat: np.ndarray
    gs: GramSystem
    flags: tuple[str, ...] = ()

    @property
    def cap(self) -> int | None:
        return self.gs.order.cap

    def to_dict(self) -> dict:
        from .subsets import mask_to_indices

        return {
            "n": self.n,
            "c": self.cap,
            "subsets": [list(mask_to_indices(m)) for m in self.order],
            "beta_hat": [float(b) for b in self.beta_hat],
            "mu_hat": [float(m) for m in self.mu_hat],
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class PredictionWithCI:
    x: tuple[int, ...]
    g_hat: float
    delta_n: float
    level: float

    @property
    def halfwidth(self) -> float:
        return float(ndtri((1.0 + self.level) / 2.0)) * self.delta_n

    @property
    def interval(self) -> tuple[float, float]:
        return (self.g_hat - self.halfwidth, self.g_hat + self.halfwidth)


def _integrand_rows(samples: SampleSet, model: Model | None, gs: GramSystem) -> np.ndarray:
    if samples.d != gs.pmf_ref.d:
        raise ArityMismatch(
            f"samples have {samples.d} columns, distribution has {gs.pmf_ref.d}"
        )
    if model is not None:
        y = model.evaluate_rows(samples.rows)
    elif samples.outputs is not None:
        y = samples.outputs
    else:
        raise ValueError("either a model or recorded outputs are required")
    try:
        e_rows = basis_matrix(gs.pmf_ref, gs.order, samples.config_masks())
    except ZeroMarginal as exc:
        raise OffSupportSample(
            f"a sample hits a pattern with zero marginal probability: {exc}"
        ) from exc
    return e_rows * y[:, None]


def _psd_clamp(sigma: np.ndarray) -> np.ndarray:
    sigma = (sigma + sigma.T) / 2.0
    eigenvalues, eigenvectors = np.linalg.eigh(sigma)
    dusty = (eigenvalues >= SIGMA_EIGENVALUE_FLOOR) & (eigenvalues < 0.0)
    if not dusty.any():
        return sigma
    eigenvalues = np.where(dusty, 0.0, eigenvalues)
    repaired = (eigenvectors * eigenvalues) @ eigenvectors.T
    return (repaired + repaired.T) / 2.0


def estimate(
    samples: SampleSet,
    model: Model | None,
    gs: GramSystem,
    c: int | None = None,
    flags: tuple[str, ...] = (),
) -> EstimationResult:
    """Mean vector, covariance and coefficients from an i.i.d. sample.

    ``gs`` must already be built on the wanted (possibly capped) order; the
    optional ``c`` is cross-checked against it.  Deterministic: the result
    is a pure function of the inputs.
    """
    if samples.n < 2:
        raise InsufficientSamples("need at least 2 observations")
    if c is not None and gs.order.cap != c:
        raise ValueError(
            f"requested cap {c} but the Gram system was built with cap {gs.order.cap}"
        )
    g = _integrand_rows(samples, model, gs)
    mu_hat = g.mean(axis=0)
    centered = g - mu_hat
    sigma_hat = _psd_clamp(centered.T @ centered / (samples.n - 1))
    beta_hat = gs.solve(mu_hat)
    _check_residual(gs.gamma, beta_hat, mu_hat, "coefficient")
    return EstimationResult(
        n=samples.n,
        order=gs.order.masks,
        mu_hat=mu_hat,
        sigma_hat=sigma_hat,
        beta_hat=beta_hat,
        gs=gs,
        flags=tuple(flags),
    )


def estimate_empirical(samples: SampleSet, model: Model | None, c: int | None = None) -> EstimationResult:
    """Estimation when no analytic distribution is available.

    The marginals come from the empirical table of the sample itself and
    the Gram matrix is the sample average of basis products; the result is
    flagged ``empirical-gram``.
    """
    if samples.n < 2:
        raise InsufficientSamples("need at least 2 observations")
    pmf_hat = empirical(samples)
    order = enumerate_subsets(samples.d, c)
    e_rows = basis_matrix(pmf_hat, order, samples.config_masks())
    gamma_hat = e_rows.T @ e_rows / samples.n
    gs = gram_system_from_gamma(order, gamma_hat, pmf_hat)
    return estimate(samples, model, gs, c=c, flags=("empirical-gram",))


def predict_with_ci(est: EstimationResult, x, level: float = DEFAULT_LEVEL) -> PredictionWithCI:
    """Prediction at one configuration with its asymptotic-normal half-width."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must be in (0,1), got {level}")
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (est.gs.pmf_ref.d,):
        raise ArityMismatch(f"expected a length-{est.gs.pmf_ref.d} binary vector")
    config = int(x @ (1 << np.arange(x.size, dtype=np.int64)))
    e_x = basis_matrix(est.gs.pmf_ref, est.gs.order, np.array([config]))[0]
    g_hat = float(est.beta_hat @ e_x)
    w = est.gs.solve(e_x)
    quad = float(w @ est.sigma_hat @ w)
    delta_n = float(np.sqrt(max(quad, 0.0) / est.n))
    return PredictionWithCI(x=tuple(int(v) for v in x), g_hat=g_hat, delta_n=delta_n, level=level)


@dataclass(frozen=True)
class BernsteinBound:
    """Exponential tail bound on the prediction error, with its ingredients."""

    eps: float
    n: int
    bound: float
    raw_bound: float
    lambda_min: float
    sup_norm: float
    basis_norm: float
    eps_max: float


def bernstein_bound(gs: GramSystem, model: Model, x, n: int, eps: float) -> BernsteinBound:
    """Tail bound for the deviation of the n-sample prediction at ``x``.

    Valid for eps between 0 and sup_norm * basis_norm / lambda_min; the
    reported bound is clipped at 1 (the raw value exceeds 1 for small eps).
    """
    pmf = gs.pmf_ref
    if not pmf.is_full:
        raise NotFullSupport("the tail bound takes a supremum over all configurations")
    if n < 1:
        raise ValueError("sample size must be at least 1")
    e_all = basis_matrix(pmf, gs.order)
    y = model.table()
    g = e_all * y[:, None]
    mu = e_all.T @ (pmf.probs * y)
    sup_norm = float(np.sqrt(((g - mu) ** 2).sum(axis=1)).max())
    x = np.asarray(x, dtype=np.int64)
    config = int(x @ (1 << np.arange(x.size, dtype=np.int64)))
    basis_norm = float(np.linalg.norm(e_all[config]))
    eps_max = sup_norm * basis_norm / gs.lambda_min
    if not 0.0 <= eps <= eps_max:
        raise EpsOutOfRange(f"eps must lie in [0, {eps_max:.6g}], got {eps}")
    ratio = eps * gs.lambda_min / (sup_norm * basis_norm)
    raw = float(np.exp(-(n / 8.0) * ratio**2 + 0.25))
    return BernsteinBound(
        eps=eps,
        n=n,
        bound=min(1.0, raw),
        raw_bound=raw,
        lambda_min=gs.lambda_min,
        sup_norm=sup_norm,
        basis_norm=basis_norm,
        eps_max=eps_max,
    )


@dataclass(frozen=True)
class TruncationErrorRow:
    x: tuple[int, ...]
    bias_sq: float
    variance: float
    mse: float
    mse_se: float

    @property
    def within_three_se(self) -> bool:
        return abs(self.mse - (self.bias_sq + self.variance)) <= 3.0 * self.mse_se


def truncation_error_report(
    exact: Decomposition,
    est: EstimationResult,
    x_list,
    replications: int,
    seed: int,
) -> list[TruncationErrorRow]:
    """Bias-variance split of the truncated estimator's pointwise error.

    The squared bias uses the exact mean vector restricted to the capped
    order; the variance and the mean squared error are estimated over fresh
    replications of the sampling and estimation pipeline, so their sum
    should match the MSE up to Monte-Carlo noise.
    """
    if exact.mode != EXACT:
        raise ValueError("the reference decomposition must be exact")
    if replications < 2:
        raise ValueError("need at least 2 replications")
    pmf = exact.pmf
    model = TruthTableModel(values=exact.table())
    mu_c = exact_mu(pmf, model, est.gs.order).mu
    theta = est.gs.solve(mu_c)

    xs = [np.asarray(x, dtype=np.int64) for x in x_list]
    configs = np.array(
        [int(x @ (1 << np.arange(pmf.d, dtype=np.int64))) for x in xs]
    )
    e_rows = basis_matrix(pmf, est.gs.order, configs)
    g_true = model.values[configs]
    bias = g_true - e_rows @ theta

    predictions = np.empty((replications, len(xs)))
    for k in range(replications):
        draws = sample(pmf, est.n, seed + k)
        result = estimate(draws, model, est.gs)
        predictions[k] = e_rows @ result.beta_hat

    rows = []
    for j, x in enumerate(xs):
        errors_sq = (g_true[j] - predictions[:, j]) ** 2
        rows.append(
            TruncationErrorRow(
                x=tuple(int(v) for v in x),
                bias_sq=float(bias[j] ** 2),
                variance=float(predictions[:, j].var(ddof=1)),
                mse=float(errors_sq.mean()),
                mse_se=float(errors_sq.std(ddof=1) / np.sqrt(replications)),
            )
        )
    return rows
