"""Models evaluated on binary vectors, plus dataset binarization.

Three model kinds cover everything the analysis needs: explicit truth
tables, linear threshold units (sign of an affine score, with sign(0)
defined as +1), and small arithmetic expressions over the input bits.
Expressions use variables ``x1 .. xd`` with ``+``, ``-``, ``*``,
parentheses and real constants; complement is written ``(1 - xk)``.  They
are parsed with the standard ``ast`` module and evaluated over a whitelist
of node types, so loading a model file never executes arbitrary code.
"""

from __future__ import annotations

import ast
import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import SampleSet
from .errors import ArityMismatch, MissingColumn, NonBinaryPredicateResult

QUASI_CONSTANT_EPS = 0.005


class Model:
    """A deterministic real-valued function of a binary vector."""

    d: int

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> float:
        row = np.atleast_2d(np.asarray(x, dtype=np.uint8))
        return float(self.evaluate_rows(row)[0])

    def _check_arity(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows)
        if rows.ndim != 2 or rows.shape[1] != self.d:
            raise ArityMismatch(
                f"model expects {self.d} inputs, got rows of shape {rows.shape}"
            )
        return rows

    def table(self) -> np.ndarray:
        """All 2^d values in configuration-mask order."""
        masks = np.arange(1 << self.d, dtype=np.int64)
        bits = ((masks[:, None] >> np.arange(self.d)) & 1).astype(np.uint8)
        return self.evaluate_rows(bits)


@dataclass(frozen=True, eq=False)
class TruthTableModel(Model):
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2 or values.size & (values.size - 1):
            raise ValueError("truth table length must be a power of two >= 2")
        object.__setattr__(self, "values", values)

    @property
    def d(self) -> int:
        return self.values.size.bit_length() - 1

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        rows = self._check_arity(rows)
        masks = rows.astype(np.int64) @ (1 << np.arange(self.d, dtype=np.int64))
        return self.values[masks]

    def table(self) -> np.ndarray:
        return self.values.copy()


@dataclass(frozen=True, eq=False)
class LinearThresholdModel(Model):
    """sign(w.x + b) with values in {-1, +1}; sign(0) := +1."""

    w: np.ndarray
    b: float

    def __post_init__(self):
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        object.__setattr__(self, "b", float(self.b))

    @property
    def d(self) -> int:
        return self.w.size

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        rows = self._check_arity(rows)
        score = rows.astype(float) @ self.w + self.b
        return np.where(score >= 0.0, 1.0, -1.0)


def reference_perceptron() -> LinearThresholdModel:
    """The ten-input linear threshold unit used in the synthetic study.

    The weights sum to zero and the bias breaks the tie, so the argument of
    the sign never vanishes on binary inputs.
    """
    w = 0.1 * np.array([3, -7, -2, -1, 5, -1, 3, 8, 1, -9], dtype=float)
    return LinearThresholdModel(w=w, b=0.12)


# ---------------------------------------------------------------------------
# Arithmetic expressions over bits
# ---------------------------------------------------------------------------

_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult)
_ALLOWED_UNARY = (ast.UAdd, ast.USub)


def _validate_expr(node: ast.AST, max_index: list[int]) -> None:
    if isinstance(node, ast.Expression):
        _validate_expr(node.body, max_index)
    elif isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
        _validate_expr(node.left, max_index)
        _validate_expr(node.right, max_index)
    elif isinstance(node, ast.UnaryOp) and isinstance(node.op, _ALLOWED_UNARY):
        _validate_expr(node.operand, max_index)
    elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        pass
    elif isinstance(node, ast.Name):
        name = node.id
        if not (name.startswith("x") and name[1:].isdigit() and int(name[1:]) >= 1):
            raise ValueError(f"unknown variable {name!r}; use x1..xd")
        max_index[0] = max(max_index[0], int(name[1:]))
    else:
        raise ValueError(f"unsupported syntax in expression: {ast.dump(node)}")


def _eval_expr(node: ast.AST, columns: np.ndarray):
    if isinstance(node, ast.Expression):
        return _eval_expr(node.body, columns)
    if isinstance(node, ast.BinOp):
        left = _eval_expr(node.left, columns)
        right = _eval_expr(node.right, columns)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        return left * right
    if isinstance(node, ast.UnaryOp):
        operand = _eval_expr(node.operand, columns)
        return -operand if isinstance(node.op, ast.USub) else operand
    if isinstance(node, ast.Constant):
        return float(node.value)
    return columns[:, int(node.id[1:]) - 1]


@dataclass(frozen=True, eq=False)
class BoolExprModel(Model):
    expr: str
    d: int = 0
    _tree: ast.Expression = field(init=False, repr=False)

    def __post_init__(self):
        try:
            tree = ast.parse(self.expr, mode="eval")
        except SyntaxError as exc:
            raise ValueError(f"cannot parse expression {self.expr!r}: {exc}") from exc
        max_index = [0]
        _validate_expr(tree, max_index)
        if max_index[0] == 0:
            raise ValueError("expression references no input variable")
        d = self.d or max_index[0]
        if d < max_index[0]:
            raise ValueError(
                f"expression uses x{max_index[0]} but dimension is {d}"
            )
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "_tree", tree)

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        rows = self._check_arity(rows)
        values = _eval_expr(self._tree, rows.astype(float))
        return np.broadcast_to(np.asarray(values, dtype=float), (rows.shape[0],)).copy()


def truth_table_of(model: Model) -> TruthTableModel:
    return TruthTableModel(values=model.table())


# ---------------------------------------------------------------------------
# Model files
# ---------------------------------------------------------------------------

def model_to_dict(model: Model) -> dict:
    if isinstance(model, LinearThresholdModel):
        return {"kind": "linear_threshold", "w": model.w.tolist(), "b": model.b}
    if isinstance(model, TruthTableModel):
        return {"kind": "truth_table", "values": model.values.tolist()}
    if isinstance(model, BoolExprModel):
        return {"kind": "bool_expr", "expr": model.expr, "d": model.d}
    raise TypeError(f"cannot serialize model of type {type(model).__name__}")


def model_from_dict(doc: dict) -> Model:
    kind = doc.get("kind")
    if kind == "linear_threshold":
        return LinearThresholdModel(w=doc["w"], b=doc["b"])
    if kind == "truth_table":
        return TruthTableModel(values=doc["values"])
    if kind == "bool_expr":
        return BoolExprModel(expr=doc["expr"], d=int(doc.get("d", 0)))
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model: Model, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path) -> Model:
    return model_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Dataset binarization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinaryRule:
    """One binary indicator extracted from a tabular column.

    ``kind`` is one of ``in`` / ``not_in`` (membership of the raw value in
    ``values``) or ``le`` / ``gt`` (numeric comparison with ``threshold``).
    """

    name: str
    column: str
    kind: str
    values: tuple = ()
    threshold: float | None = None

    def apply(self, raw: list[str]) -> np.ndarray:
        if self.kind in ("in", "not_in"):
            members = set(self.values)
            hit = np.array([v in members for v in raw], dtype=np.uint8)
            return hit if self.kind == "in" else 1 - hit
        if self.kind in ("le", "gt"):
            try:
                numeric = np.array([float(v) for v in raw])
            except ValueError as exc:
                raise NonBinaryPredicateResult(
                    f"rule {self.name!r}: column {self.column!r} is not numeric"
                ) from exc
            hit = (numeric <= self.threshold).astype(np.uint8)
            return hit if self.kind == "le" else 1 - hit
        raise ValueError(f"unknown predicate kind {self.kind!r}")


@dataclass(frozen=True)
class LabelSpec:
    column: str
    positive: tuple
    encoding: str = "zero-one"  # or "plus-minus"

    def apply(self, raw: list[str]) -> np.ndarray:
        members = set(self.positive)
        hit = np.array([v in members for v in raw], dtype=float)
        if self.encoding == "plus-minus":
            return 2.0 * hit - 1.0
        return hit


@dataclass(frozen=True)
class BinarizationSpec:
    rules: tuple[BinaryRule, ...]
    label: LabelSpec | None = None
    columns: tuple[str, ...] | None = None  # names for headerless files

    def __post_init__(self):
        names = [r.name for r in self.rules]
        if len(set(names)) != len(names):
            raise ValueError("rule names must be unique")


def binarization_spec_from_dict(doc: dict) -> BinarizationSpec:
    rules = tuple(
        BinaryRule(
            name=r["name"],
            column=r["column"],
            kind=r["kind"],
            values=tuple(r.get("values", ())),
            threshold=r.get("threshold"),
        )
        for r in doc["rules"]
    )
    label = None
    if doc.get("label"):
        raw = doc["label"]
        label = LabelSpec(
            column=raw["column"],
            positive=tuple(raw["positive"]),
            encoding=raw.get("encoding", "zero-one"),
        )
    columns = tuple(doc["columns"]) if doc.get("columns") else None
    return BinarizationSpec(rules=rules, label=label, columns=columns)


def load_binarization_spec(path) -> BinarizationSpec:
    return binarization_spec_from_dict(json.loads(Path(path).read_text()))


def binarize(csv_path, spec: BinarizationSpec) -> SampleSet:
    """Apply a rule list to a tabular file, one binary column per rule.

    If the spec carries column names the file is read headerless;
    otherwise the first row is the header.
    """
    with open(csv_path, newline="") as fh:
        raw_rows = [r for r in csv.reader(fh) if r]
    if not raw_rows:
        raise ValueError(f"no rows in {csv_path}")
    if spec.columns is not None:
        header = list(spec.columns)
        body = raw_rows
    else:
        header = [c.strip() for c in raw_rows[0]]
        body = raw_rows[1:]
    position = {name: i for i, name in enumerate(header)}

    def column(name: str) -> list[str]:
        if name not in position:
            raise MissingColumn(f"column {name!r} not found in {sorted(position)}")
        i = position[name]
        return [row[i].strip() for row in body]

    cols = [rule.apply(column(rule.column)) for rule in spec.rules]
    rows = np.stack(cols, axis=1) if cols else np.empty((len(body), 0), dtype=np.uint8)
    outputs = spec.label.apply(column(spec.label.column)) if spec.label else None
    return SampleSet(rows=rows, outputs=outputs)


def quasi_constant_rules(samples: SampleSet, names, eps: float = QUASI_CONSTANT_EPS) -> list[str]:
    """Names of rules whose empirical frequency is within eps of 0 or 1."""
    q = samples.rows.mean(axis=0)
    return [name for name, qi in zip(names, q) if qi < eps or qi > 1.0 - eps]
