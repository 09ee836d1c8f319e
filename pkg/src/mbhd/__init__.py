"""Exact Hoeffding decomposition of functions of dependent binary inputs.

The package decomposes a real-valued function of a multivariate Bernoulli
vector into components indexed by coordinate subsets, exactly under a
full-support joint table, and derives generalized Sobol' indices, the
Sobol' matrix and Shapley effects from the result.  Monte-Carlo estimators
with confidence statements and a cardinality-truncated pipeline cover the
settings where exact enumeration is out of reach, and a degenerate-support
path recovers the identifiable part of the decomposition when some
configurations never occur.
"""

from .basis import (
    DualCoefficients,
    GramSystem,
    angle,
    basis_matrix,
    dual_coefficients,
    eval_basis,
    gram_matrix,
    save_gram_csv,
)
from .decomposition import (
    Decomposition,
    MuVector,
    auto_decompose,
    decompose,
    degenerate_decompose,
    exact_mu,
)
from .distributions import (
    JointPmf,
    MarginalTable,
    SampleSet,
    empirical,
    fgm_threshold,
    from_table,
    gaussian_equicorrelated,
    load_pmf,
    load_samples,
    marginal,
    product_of_marginals,
    sample,
    save_pmf,
    save_samples,
)
from .errors import MbhdError
from .estimation import (
    BernsteinBound,
    EstimationResult,
    PredictionWithCI,
    bernstein_bound,
    estimate,
    estimate_empirical,
    predict_with_ci,
    truncation_error_report,
)
from .indices import (
    SensitivityReport,
    save_sobol_matrix_csv,
    sensitivity,
    shapley_from_dividends,
)
from .models import (
    BinarizationSpec,
    BinaryRule,
    BoolExprModel,
    LabelSpec,
    LinearThresholdModel,
    Model,
    TruthTableModel,
    binarize,
    load_model,
    reference_perceptron,
    quasi_constant_rules,
    save_model,
    truth_table_of,
)
from .subsets import SubsetOrder, enumerate_subsets, parity_sign, subset_label

__version__ = "0.1.0"

__all__ = [
    "angle",
    "auto_decompose",
    "basis_matrix",
    "bernstein_bound",
    "binarize",
    "BinarizationSpec",
    "BinaryRule",
    "BernsteinBound",
    "BoolExprModel",
    "decompose",
    "Decomposition",
    "degenerate_decompose",
    "dual_coefficients",
    "DualCoefficients",
    "empirical",
    "enumerate_subsets",
    "estimate",
    "estimate_empirical",
    "EstimationResult",
    "eval_basis",
    "exact_mu",
    "fgm_threshold",
    "from_table",
    "gaussian_equicorrelated",
    "gram_matrix",
    "GramSystem",
    "JointPmf",
    "LabelSpec",
    "LinearThresholdModel",
    "load_model",
    "load_pmf",
    "load_samples",
    "marginal",
    "MarginalTable",
    "MbhdError",
    "Model",
    "MuVector",
    "reference_perceptron",
    "parity_sign",
    "predict_with_ci",
    "PredictionWithCI",
    "product_of_marginals",
    "quasi_constant_rules",
    "sample",
    "SampleSet",
    "save_gram_csv",
    "save_model",
    "save_pmf",
    "save_samples",
    "save_sobol_matrix_csv",
    "sensitivity",
    "SensitivityReport",
    "shapley_from_dividends",
    "subset_label",
    "SubsetOrder",
    "truncation_error_report",
    "truth_table_of",
    "TruthTableModel",
]
