"""Reference experiment pipelines emitting plot-ready data files.

Three bundles: the ten-input threshold classifier under equicorrelated
Gaussian-threshold inputs (variance-error table, approximation-error norms,
Shapley bars), the two-input FGM-style family (closed-form versus computed
index curves over the dependence grid), and the mushroom rule model over a
user-supplied copy of the dataset.

Conventions for the approximation-error table: the independence baseline is
the independent-case Sobol' object rescaled by the ratio of the model's raw
second moment to the dependent-case variance (for a sign-valued classifier
the second moment is exactly 1), matrix errors are measured in the induced
1-norm (maximum absolute column sum) and the spectral 2-norm, and vector
errors in the entrywise 1-norm and the Euclidean norm, each also relative
to the same norm of the dependent-case object.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .decomposition import auto_decompose, decompose
from .distributions import empirical, from_table, gaussian_equicorrelated
from .errors import DatasetMissing
from .indices import sensitivity
from .models import (
    BinarizationSpec,
    BinaryRule,
    BoolExprModel,
    LabelSpec,
    binarize,
    reference_perceptron,
    quasi_constant_rules,
)
from .subsets import mask_to_indices

PERCEPTRON_CASES = (0.9, 0.5, 0.1)

MUSHROOM_COLUMNS = (
    "class", "cap-shape", "cap-surface", "cap-color", "bruises", "odor",
    "gill-attachment", "gill-spacing", "gill-size", "gill-color",
    "stalk-shape", "stalk-root", "stalk-surface-above-ring",
    "stalk-surface-below-ring", "stalk-color-above-ring",
    "stalk-color-below-ring", "veil-type", "veil-color", "ring-number",
    "ring-type", "spore-print-color", "population", "habitat",
)

MUSHROOM_RULES = BinarizationSpec(
    rules=(
        BinaryRule(name="odor-present", column="odor", kind="not_in", values=("n",)),
        BinaryRule(
            name="stalk-root-not-club-rooted",
            column="stalk-root",
            kind="not_in",
            values=("c", "r"),
        ),
        BinaryRule(
            name="gill-spacing-not-crowded",
            column="gill-spacing",
            kind="not_in",
            values=("w",),
        ),
        BinaryRule(name="no-bruises", column="bruises", kind="not_in", values=("t",)),
        BinaryRule(
            name="spore-print-not-green",
            column="spore-print-color",
            kind="not_in",
            values=("r",),
        ),
    ),
    label=LabelSpec(column="class", positive=("p",), encoding="zero-one"),
    columns=MUSHROOM_COLUMNS,
)

MUSHROOM_MODEL = BoolExprModel("x1*x2*(x3 + (1-x3)*x4) + (1-x1)*(1-x5)", d=5)


def _induced_1norm(m: np.ndarray) -> float:
    return float(np.abs(m).sum(axis=0).max())


def _spectral_norm(m: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvalsh((m + m.T) / 2.0)).max())


def perceptron_bundle(nodes: int = 64) -> dict:
    """Variance errors, approximation-error norms and Shapley vectors."""
    model = reference_perceptron()
    reports = {}
    for rho in (0.0,) + PERCEPTRON_CASES:
        pmf = gaussian_equicorrelated(10, rho, nodes)
        reports[rho] = sensitivity(decompose(pmf, model))
    base = reports[0.0]
    second_moment = 1.0  # sign-valued model

    table2, table3, shapley = {}, {}, {}
    for rho in PERCEPTRON_CASES:
        rep = reports[rho]
        table2[rho] = {
            "abs_variance_diff": rep.variance - base.variance,
            "rel_variance_diff": (rep.variance - base.variance) / rep.variance,
        }
        scale = second_moment / rep.variance
        mat_diff = rep.sobol_matrix - scale * base.sobol_matrix
        vec_diff = rep.sobol - scale * base.sobol
        table3[rho] = {
            "sobol_matrix_err_1norm": _induced_1norm(mat_diff),
            "sobol_matrix_err_1norm_rel": _induced_1norm(mat_diff)
            / _induced_1norm(rep.sobol_matrix),
            "sobol_matrix_err_2norm": _spectral_norm(mat_diff),
            "sobol_matrix_err_2norm_rel": _spectral_norm(mat_diff)
            / _spectral_norm(rep.sobol_matrix),
            "sobol_err_1norm": float(np.abs(vec_diff).sum()),
            "sobol_err_1norm_rel": float(
                np.abs(vec_diff).sum() / np.abs(rep.sobol).sum()
            ),
            "sobol_err_2norm": float(np.linalg.norm(vec_diff)),
            "sobol_err_2norm_rel": float(
                np.linalg.norm(vec_diff) / np.linalg.norm(rep.sobol)
            ),
        }
        shapley[rho] = [float(v) for v in rep.shapley]

    return {
        "kind": "perceptron",
        "nodes": nodes,
        "cases": list(PERCEPTRON_CASES),
        "baseline_variance": base.variance,
        "case_variance": {str(r): reports[r].variance for r in PERCEPTRON_CASES},
        "table2": {str(r): table2[r] for r in PERCEPTRON_CASES},
        "table3": {str(r): table3[r] for r in PERCEPTRON_CASES},
        "shapley": {str(r): shapley[r] for r in PERCEPTRON_CASES},
        "baseline_shapley": [float(v) for v in base.shapley],
    }


def write_perceptron_csvs(bundle: dict, outdir: Path) -> list[str]:
    cases = bundle["cases"]
    files = []

    path = outdir / "perceptron_table2.csv"
    with open(path, "w") as fh:
        fh.write("metric," + ",".join(f"rho={r}" for r in cases) + "\n")
        for metric in ("abs_variance_diff", "rel_variance_diff"):
            row = [repr(bundle["table2"][str(r)][metric]) for r in cases]
            fh.write(metric + "," + ",".join(row) + "\n")
    files.append(path.name)

    path = outdir / "perceptron_table3.csv"
    with open(path, "w") as fh:
        fh.write("metric," + ",".join(f"rho={r}" for r in cases) + "\n")
        metrics = list(bundle["table3"][str(cases[0])])
        for metric in metrics:
            row = [repr(bundle["table3"][str(r)][metric]) for r in cases]
            fh.write(metric + "," + ",".join(row) + "\n")
    files.append(path.name)

    path = outdir / "perceptron_shapley.csv"
    with open(path, "w") as fh:
        fh.write("input," + ",".join(f"rho={r}" for r in cases) + ",rho=0\n")
        for i in range(10):
            row = [repr(bundle["shapley"][str(r)][i]) for r in cases]
            row.append(repr(bundle["baseline_shapley"][i]))
            fh.write(f"{i + 1}," + ",".join(row) + "\n")
    files.append(path.name)
    return files


def fgm_bundle(grid=None) -> dict:
    """Closed-form and computed index curves for the matched-pair family."""
    if grid is None:
        grid = [round(0.05 * k, 2) for k in range(11)]
    rows = []
    model = BoolExprModel("x1*x2")
    for rho in grid:
        closed = {
            "S1_closed": 1.0 / (4.0 * (1.0 - rho)),
            "S12_closed": (0.5 - rho) / (1.0 - rho),
            "var_closed": rho * (1.0 - rho),
            "cov_G1_closed": rho / 4.0,
            "cov_G12_closed": rho * (0.5 - rho),
        }
        computed = dict.fromkeys(
            ("S1", "S2", "S12", "var", "cov_G1", "cov_G12"), None
        )
        if 0.0 < rho < 0.5:
            pmf = from_table([rho, 0.5 - rho, 0.5 - rho, rho])
            rep = sensitivity(decompose(pmf, model))
            computed = {
                "S1": rep.sobol_of(0b01),
                "S2": rep.sobol_of(0b10),
                "S12": rep.sobol_of(0b11),
                "var": rep.variance,
                "cov_G1": rep.sobol_of(0b01) * rep.variance,
                "cov_G12": rep.sobol_of(0b11) * rep.variance,
            }
        rows.append({"rho": rho, **closed, **computed})
    return {"kind": "fgm", "grid": list(grid), "rows": rows}


def write_fgm_csv(bundle: dict, outdir: Path) -> list[str]:
    path = outdir / "fgm_curves.csv"
    columns = list(bundle["rows"][0])
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in bundle["rows"]:
            fh.write(
                ",".join("" if row[c] is None else repr(float(row[c])) for c in columns)
                + "\n"
            )
    return [path.name]


def mushroom_bundle(data_path, spec: BinarizationSpec | None = None, smoothing: float = 0.0) -> dict:
    """Rule-model sensitivity analysis over a local copy of the dataset.

    All numbers are informational: they depend on the user's copy and split.
    """
    if data_path is None:
        raise DatasetMissing(
            "the mushroom bundle needs --data pointing to a local copy of the "
            "dataset (it is not bundled)"
        )
    path = Path(data_path)
    if not path.exists():
        raise DatasetMissing(f"dataset file {path} does not exist")
    spec = spec or MUSHROOM_RULES
    if spec.columns and _file_has_header(path, spec.columns):
        spec = BinarizationSpec(rules=spec.rules, label=spec.label, columns=None)
    samples = binarize(path, spec)
    names = [r.name for r in spec.rules]
    pmf = empirical(samples, smoothing=smoothing)
    model = MUSHROOM_MODEL
    dec = auto_decompose(pmf, model)
    rep = sensitivity(dec)

    agreement = None
    if samples.outputs is not None:
        predicted = model.evaluate_rows(samples.rows)
        agreement = float((predicted == samples.outputs).mean())

    return {
        "kind": "mushroom",
        "informational": True,
        "n": samples.n,
        "rules": names,
        "rule_frequencies": [float(q) for q in samples.rows.mean(axis=0)],
        "quasi_constant_rules": quasi_constant_rules(samples, names),
        "smoothing": smoothing,
        "support_class": pmf.support_class,
        "zero_cells": pmf.zero_cells,
        "mode": dec.mode,
        "model_label_agreement": agreement,
        "variance": rep.variance,
        "sobol": [
            {"subset": list(mask_to_indices(m)), "S": float(s)}
            for m, s in zip(rep.masks, rep.sobol)
        ],
        "shapley": [float(v) for v in rep.shapley],
        "flags": list(rep.flags),
    }


def _file_has_header(path: Path, columns) -> bool:
    with open(path) as fh:
        first = fh.readline().strip().split(",")
    return set(c.strip() for c in first) >= {"class", "odor"} or list(first) == list(columns)


def write_mushroom_csv(bundle: dict, outdir: Path) -> list[str]:
    path = outdir / "mushroom_indices.csv"
    with open(path, "w") as fh:
        fh.write("subset,S\n")
        for entry in bundle["sobol"]:
            label = "[" + ",".join(str(i) for i in entry["subset"]) + "]"
            fh.write(f"\"{label}\",{entry['S']!r}\n")
    shp = outdir / "mushroom_shapley.csv"
    with open(shp, "w") as fh:
        fh.write("rule,shapley\n")
        for name, v in zip(bundle["rules"], bundle["shapley"]):
            fh.write(f"{name},{v!r}\n")
    return [path.name, shp.name]
