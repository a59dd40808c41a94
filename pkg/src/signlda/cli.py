"""Command-line front end.

Subcommands: simulate (replicated study from a spec file), fit / predict
(model round-trips over CSV), sweep (error-vs-sparsity curves), version.

Exit codes: 0 success, 2 input or validation problem, 3 numerical failure
(including solver failures in more than 10% of replications).
"""

from __future__ import annotations

import csv
import dataclasses
import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from ._validation import check_labels
from .classifier import (
    DiscriminantModel,
    MetricsReport,
    evaluate,
    fit_cv,
    fit_discriminant,
    load_model,
    predict,
    save_model,
    support_size,
)
from .errors import DegenerateClassesError, SingularBasisError, SolverFailureError
from .simlab import ExperimentResult, load_spec, run_experiment, sparsity_sweep

_NUMERICAL_ERRORS = (SolverFailureError, SingularBasisError)
_FAILURE_FRACTION_LIMIT = 0.10

RESULTS_CSV_COLUMNS = ("distribution", "model", "p", "method",
                       "mean_error_pct", "sd_pct", "reps")
SWEEP_CSV_COLUMNS = ("distribution", "model", "p", "s0", "method",
                     "mean_error_pct", "sd_pct", "reps")


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main() -> None:
    """Sparse linear discriminant analysis for heavy-tailed data."""


@main.command()
def version() -> None:
    """Print the tool version."""
    click.echo(f"signlda {__version__}")


# ---------------------------------------------------------------------------
# CSV ingestion

def _parse_cell(raw: str, row: int, col: int) -> float:
    try:
        return float(raw)
    except ValueError:
        _fail(2, f"non-numeric cell at row {row}, column {col}: {raw!r}")
        raise AssertionError("unreachable")


def _read_csv(path: str, no_header: bool, label_last: bool,
              require_labels: bool) -> tuple[np.ndarray, np.ndarray | None]:
    """Read a feature matrix and an optional 1/2 label vector.

    The label column is found by header name ("label", case-insensitive),
    or taken as the last column under --label-last. Row and column numbers
    in error messages are 1-based and count the header row.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        _fail(2, f"cannot read {path}: {exc}")
    rows = [r for r in rows if r]  # drop blank lines
    if not rows:
        _fail(2, f"{path}: file is empty")

    header: list[str] | None = None
    body_start = 1
    if no_header:
        body_start = 0
    else:
        header = [cell.strip() for cell in rows[0]]
    body = rows[body_start:]
    if not body:
        _fail(2, f"{path}: no data rows")

    width = len(body[0])
    if width < 1 or (width < 2 and (label_last or (header and "label" in [h.lower() for h in header]))):
        _fail(2, f"{path}: too few columns ({width})")

    label_col: int | None = None
    if header is not None:
        lowered = [h.lower() for h in header]
        if "label" in lowered:
            label_col = lowered.index("label")
        if len(header) != width:
            _fail(2, f"{path}: header has {len(header)} columns but row 2 has {width}")
    if label_col is None and label_last:
        label_col = width - 1
    if label_col is None and require_labels:
        _fail(2, f"{path}: no 'label' column found (use --label-last for positional labels)")

    features = []
    labels_raw = []
    for i, row in enumerate(body):
        row_no = body_start + i + 1
        if len(row) != width:
            _fail(2, f"{path}: row {row_no} has {len(row)} columns, expected {width}")
        values = [_parse_cell(cell.strip(), row_no, j + 1) for j, cell in enumerate(row)]
        if label_col is not None:
            labels_raw.append(values.pop(label_col))
        features.append(values)

    x = np.asarray(features, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        _fail(2, f"{path}: non-finite feature values")
    if label_col is None:
        return x, None
    try:
        labels = check_labels(labels_raw, "label column")
    except ValueError as exc:
        _fail(2, f"{path}: {exc}")
        raise AssertionError("unreachable")
    return x, labels


# ---------------------------------------------------------------------------
# fit / predict

def _flavor_token(cli_value: str) -> str:
    return cli_value.replace("-", "_")


@main.command()
@click.argument("train_csv", type=click.Path())
@click.option("--flavor", type=click.Choice(["sslda", "lda-clime", "ls-lda"]),
              default="sslda", show_default=True, help="Estimator flavor.")
@click.option("--lambda", "lam", type=float, default=None,
              help="Fixed penalty level (mutually exclusive with --cv).")
@click.option("--cv", "use_cv", is_flag=True,
              help="Tune the penalty by stratified cross-validation.")
@click.option("--folds", type=click.IntRange(min=2), default=10, show_default=True,
              help="Fold count for --cv.")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True,
              help="Seed for the cross-validation fold shuffle.")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Where to write the model JSON.")
@click.option("--no-header", is_flag=True, help="Input CSV has no header row.")
@click.option("--label-last", is_flag=True, help="Labels are the last column.")
def fit(train_csv: str, flavor: str, lam: float | None, use_cv: bool, folds: int,
        seed: int, out_path: str, no_header: bool, label_last: bool) -> None:
    """Fit a discriminant model from a labeled training CSV."""
    if use_cv == (lam is not None):
        _fail(2, "exactly one of --lambda or --cv is required")
    if lam is not None and lam < 0:
        _fail(2, f"--lambda must be >= 0, got {lam}")
    x, labels = _read_csv(train_csv, no_header, label_last, require_labels=True)
    assert labels is not None
    x1 = x[labels == 1]
    x2 = x[labels == 2]
    if x1.shape[0] < 2 or x2.shape[0] < 2:
        _fail(2, f"{train_csv}: need >= 2 rows per class, got "
                 f"{x1.shape[0]} with label 1 and {x2.shape[0]} with label 2")

    token = _flavor_token(flavor)
    try:
        if use_cv:
            model, _ = fit_cv(x1, x2, flavor=token, k=folds, seed=seed)
        else:
            model = fit_discriminant(x1, x2, lam, flavor=token)
    except (DegenerateClassesError, ValueError) as exc:
        _fail(2, str(exc))
        raise AssertionError("unreachable")
    except _NUMERICAL_ERRORS as exc:
        _fail(3, str(exc))
        raise AssertionError("unreachable")

    save_model(model, out_path)
    click.echo(f"lambda={model.lam:.6g}")
    click.echo(f"support={support_size(model.gamma)}")
    click.echo(f"model written to {out_path}")


def _format_ratio(value: float) -> str:
    return f"{value:.4f}"


def _echo_metrics(report: MetricsReport) -> None:
    click.echo(f"tp={report.tp} tn={report.tn} fp={report.fp} fn={report.fn}")
    click.echo(f"specificity={_format_ratio(report.specificity)}")
    click.echo(f"sensitivity={_format_ratio(report.sensitivity)}")
    click.echo(f"precision={_format_ratio(report.precision)}")
    click.echo(f"accuracy={_format_ratio(report.accuracy)}")
    click.echo(f"misclassification_rate={_format_ratio(report.misclassification_rate)}")
    if report.undefined:
        click.echo(f"undefined={','.join(report.undefined)}")


@main.command(name="predict")
@click.argument("model_path", type=click.Path())
@click.argument("test_csv", type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Where to write the predictions CSV.")
@click.option("--no-header", is_flag=True, help="Input CSV has no header row.")
@click.option("--label-last", is_flag=True, help="Labels are the last column.")
def predict_cmd(model_path: str, test_csv: str, out_path: str,
                no_header: bool, label_last: bool) -> None:
    """Predict classes for a CSV; print metrics when labels are present."""
    try:
        model = load_model(model_path)
    except (OSError, ValueError, DegenerateClassesError) as exc:
        _fail(2, f"cannot load model {model_path}: {exc}")
        raise AssertionError("unreachable")
    x, labels = _read_csv(test_csv, no_header, label_last, require_labels=False)
    if x.shape[1] != model.p:
        _fail(2, f"{test_csv}: {x.shape[1]} feature columns but model expects {model.p}")

    predicted = np.asarray(predict(model, x))
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("prediction\n")
        fh.writelines(f"{int(v)}\n" for v in predicted)
    click.echo(f"predictions written to {out_path}")
    if labels is not None:
        _echo_metrics(evaluate(predicted, labels))


# ---------------------------------------------------------------------------
# simulate / sweep

def _spec_echo(result: ExperimentResult) -> dict:
    spec = result.spec
    doc = {
        "law": spec.law.kind,
        "kappa": spec.law.kappa,
        "cov": spec.cov.kind,
        "p": spec.p,
        "n1": spec.n1,
        "n2": spec.n2,
        "n_test_per_class": spec.n_test_per_class,
        "s0": spec.s0,
        "reps": spec.reps,
        "base_seed": spec.base_seed,
        "methods": list(spec.methods),
        "cv_folds": spec.cv_folds,
        "n_lambdas": spec.n_lambdas,
    }
    if spec.cov.kind == "explicit":
        doc["cov_matrix"] = spec.cov.matrix.tolist()
    return doc


def _summary_rows(result: ExperimentResult, s0: int | None) -> list[dict]:
    rows = []
    for summary in result.summaries:
        row = {
            "distribution": result.spec.law.kind,
            "model": result.spec.cov.kind,
            "p": result.spec.p,
            "method": summary.method,
            "mean_error_pct": summary.mean_error_pct,
            "sd_pct": summary.sd_pct,
            "reps": summary.reps_used,
            "failures": summary.failures,
        }
        if s0 is not None:
            row["s0"] = s0
        rows.append(row)
    return rows


def _format_pct(value: float | None) -> str:
    return "" if value is None else f"{value:.2f}"


def _write_rows_csv(path: Path, columns: tuple[str, ...], rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([
                _format_pct(row[c]) if c in ("mean_error_pct", "sd_pct") else row[c]
                for c in columns
            ])


def _replication_echo(result: ExperimentResult) -> list[dict]:
    return [
        {
            "rep": r.rep,
            "seed": r.seed,
            "errors": r.errors,
            "lambdas": r.lambdas,
            "failures": r.failures,
        }
        for r in result.replications
    ]


def _failure_fraction_exceeded(results: list[ExperimentResult]) -> bool:
    for result in results:
        for summary in result.summaries:
            if summary.failures > _FAILURE_FRACTION_LIMIT * result.spec.reps:
                return True
    return False


def _echo_table(rows: list[dict], columns: tuple[str, ...]) -> None:
    click.echo(",".join(columns))
    for row in rows:
        click.echo(",".join(
            _format_pct(row[c]) if c in ("mean_error_pct", "sd_pct") else str(row[c])
            for c in columns
        ))


def _load_spec_or_exit(spec_path: str, seed: int | None):
    try:
        spec = load_spec(spec_path)
    except (OSError, ValueError) as exc:
        _fail(2, str(exc))
        raise AssertionError("unreachable")
    if seed is not None:
        spec = dataclasses.replace(spec, base_seed=seed)
    return spec


@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(),
              help="Experiment spec (.json or .toml).")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Output directory for results.csv / results.json.")
@click.option("--seed", type=click.IntRange(min=0), default=None,
              help="Override the spec's base_seed.")
def simulate(spec_path: str, out_dir: str, seed: int | None) -> None:
    """Run a replicated study and write results.csv / results.json."""
    spec = _load_spec_or_exit(spec_path, seed)
    started = time.perf_counter()
    result = run_experiment(spec)
    wall = time.perf_counter() - started

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = _summary_rows(result, s0=None)
    _write_rows_csv(out / "results.csv", RESULTS_CSV_COLUMNS, rows)
    report = {
        "command": "simulate",
        "argv": list(sys.argv[1:]),
        "tool_version": __version__,
        "seed": spec.base_seed,
        "wall_time_seconds": wall,
        "spec": _spec_echo(result),
        "table": rows,
        "replications": _replication_echo(result),
    }
    (out / "results.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")

    _echo_table(rows, RESULTS_CSV_COLUMNS)
    if _failure_fraction_exceeded([result]):
        _fail(3, "solver failures exceeded 10% of replications")


@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(),
              help="Experiment spec (.json or .toml); its s0 is ignored.")
@click.option("--s0", "s0_values", multiple=True, type=int,
              help="Sparsity level; repeat the flag for a curve.")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Output directory for results.csv / results.json.")
@click.option("--seed", type=click.IntRange(min=0), default=None,
              help="Override the spec's base_seed.")
def sweep(spec_path: str, s0_values: tuple[int, ...], out_dir: str,
          seed: int | None) -> None:
    """Run the study across sparsity levels and write the curve CSV."""
    if not s0_values:
        _fail(2, "at least one --s0 value is required")
    spec = _load_spec_or_exit(spec_path, seed)
    started = time.perf_counter()
    try:
        results = sparsity_sweep(spec, list(s0_values))
    except ValueError as exc:
        _fail(2, str(exc))
        raise AssertionError("unreachable")
    wall = time.perf_counter() - started

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for s0, result in results:
        rows.extend(_summary_rows(result, s0=s0))
    _write_rows_csv(out / "results.csv", SWEEP_CSV_COLUMNS, rows)
    report = {
        "command": "sweep",
        "argv": list(sys.argv[1:]),
        "tool_version": __version__,
        "seed": spec.base_seed,
        "wall_time_seconds": wall,
        "spec": _spec_echo(results[0][1]),
        "s0_values": [s0 for s0, _ in results],
        "table": rows,
        "replications": {
            str(s0): _replication_echo(result) for s0, result in results
        },
    }
    (out / "results.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")

    _echo_table(rows, SWEEP_CSV_COLUMNS)
    if _failure_fraction_exceeded([r for _, r in results]):
        _fail(3, "solver failures exceeded 10% of replications")


if __name__ == "__main__":
    main()
