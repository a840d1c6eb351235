"""Command-line surface: dataset ingestion, experiment configuration,
execution, and plot-ready result files.

Two subcommands:

* ``blbkit assess``: run one quality-assessment procedure on a CSV or
  synthetic dataset; writes ``summary.json``, ``trajectory.csv``,
  ``manifest.json``, and ``selection.json`` when adaptive.
* ``blbkit benchmark``: ground-truth evaluation presets; writes a
  cacheable truth file, per-procedure trajectory tables, ``report.json``,
  and (for the grid preset) ``grid.csv``.

All emitted files carry a versioned format tag and round-trip exactly:
parsing a file and re-serializing it reproduces the original bytes.
Summary files contain no timestamps, so identical seeded invocations
produce byte-identical summaries; timestamps live in the manifest.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import re
import sys
from dataclasses import asdict, replace
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .adaptive import run_blb_adaptive
from .errors import BlbkitError, IngestError, ValidationError
from .estimators import EstimatorSpec
from .metrics import MetricSpec, ci_widths
from .model import AdaptiveParams, DataMatrix, ProcedureConfig, QualitySummary, validate
from .procedures import run_blb, run_bofn, run_bootstrap, run_subsampling
from .resample import RngStream
from .simbench import (
    DataGeneratingSpec,
    GroundTruth,
    ProcedureSetup,
    compute_ground_truth,
    generate,
    run_experiment,
    run_grid,
)

OUT_DIR_ENV = "BLBKIT_OUT"

ESTIMATOR_NAMES = {
    "mean": "weighted_mean",
    "linreg": "least_squares",
    "logreg": "logistic_newton",
}
METRIC_NAMES = {"ci": "marginal_ci", "stderr": "stderr"}
METHOD_NAMES = {
    "blb": run_blb,
    "boot": run_bootstrap,
    "bofn": run_bofn,
    "subsampling": run_subsampling,
}

GRID_R_VALUES = (2, 5, 10, 20, 50, 100)
GRID_S_VALUES = (1, 2, 3, 5, 10, 20)
FIG1_GAMMAS = (0.5, 0.6, 0.7, 0.8, 0.9)
LOW_FIDELITY_TRUTH = 100


# ---------------------------------------------------------------------------
# Canonical file formats


def dump_json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode("utf-8")


def write_json(path: str, obj) -> None:
    with open(path, "wb") as fh:
        fh.write(dump_json_bytes(obj))


def read_json(path: str):
    with open(path, "rb") as fh:
        return json.loads(fh.read().decode("utf-8"))


def fmt_float(value) -> str:
    return repr(float(value))


def write_table(path: str, format_tag: str, fieldnames, rows) -> None:
    """Write a delimited table with a versioned comment header."""
    buf = io.StringIO()
    buf.write(f"# {format_tag}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fieldnames)
    writer.writerows(rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def read_table(path: str):
    """Inverse of write_table: returns (format_tag, fieldnames, string rows)."""
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise IngestError(f"{path}: missing format header")
        format_tag = first[2:].rstrip("\n")
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise IngestError(f"{path}: missing column header")
    return format_tag, rows[0], rows[1:]


def summary_to_jsonable(summary: QualitySummary) -> dict:
    if summary.kind == "interval_set":
        return {
            "kind": summary.kind,
            "coverage": summary.coverage,
            "lower": [float(x) for x in summary.lower],
            "upper": [float(x) for x in summary.upper],
        }
    return {"kind": summary.kind, "values": [float(x) for x in summary.values]}


def summary_from_jsonable(obj: dict) -> QualitySummary:
    if obj["kind"] == "interval_set":
        return QualitySummary.intervals(obj["lower"], obj["upper"], obj["coverage"])
    return QualitySummary.scalars(obj["values"])


def mean_width(summary: QualitySummary) -> float:
    """Mean absolute CI width, or the mean scalar for stderr summaries."""
    if summary.kind == "interval_set":
        return float(np.mean(ci_widths(summary)))
    return float(np.mean(summary.values))


def _flat_fieldnames(summary: QualitySummary) -> list[str]:
    d = summary.dim
    if summary.kind == "interval_set":
        return [f"lower_{i}" for i in range(d)] + [f"upper_{i}" for i in range(d)]
    return [f"value_{i}" for i in range(d)]


def digest_of(payload) -> str:
    return hashlib.sha256(dump_json_bytes(payload)).hexdigest()[:16]


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


# ---------------------------------------------------------------------------
# CSV ingestion


def _parse_cell(text: str, line_num: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise IngestError(f"line {line_num}: non-numeric value {text!r}") from None


def ingest_csv(path: str, response_column=None, task: str | None = None) -> DataMatrix:
    """Load a delimited numeric file into a DataMatrix.

    ``response_column`` may be a header name, a 0-based column index, or
    None for feature-only data. A header row is detected by its first row
    failing numeric parsing. Classification responses in {-1, 1} are
    normalized to {0, 1}.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        raw = [(reader.line_num, row) for row in reader if row and any(c.strip() for c in row)]
    if not raw:
        raise IngestError(f"{path}: file is empty")
    header = None
    first_line, first_row = raw[0]
    try:
        [float(cell) for cell in first_row]
    except ValueError:
        header = [cell.strip() for cell in first_row]
        raw = raw[1:]
    if not raw:
        raise IngestError(f"{path}: no data rows")
    width = len(raw[0][1])
    rows = np.empty((len(raw), width))
    for i, (line_num, row) in enumerate(raw):
        if len(row) != width:
            raise IngestError(
                f"line {line_num}: expected {width} columns, found {len(row)}"
            )
        rows[i] = [_parse_cell(cell, line_num) for cell in row]

    response = None
    if response_column is not None:
        if isinstance(response_column, str):
            if header is None:
                raise IngestError(
                    f"response column {response_column!r} needs a header row"
                )
            if response_column not in header:
                raise IngestError(f"missing response column {response_column!r}")
            col = header.index(response_column)
        else:
            col = int(response_column)
            if not 0 <= col < width:
                raise IngestError(f"response column index {col} out of range")
        if width < 2:
            raise IngestError("need at least one feature column besides the response")
        response = rows[:, col]
        features = np.delete(rows, col, axis=1)
    else:
        features = rows

    if task == "classification" and response is not None:
        observed = set(np.unique(response))
        if observed <= {-1.0, 1.0}:
            response = (response + 1.0) / 2.0
    data = DataMatrix(features, response)
    if task is not None:
        validate(data, task)
    return data


# ---------------------------------------------------------------------------
# Synthetic spec mini-language

_DIST_RE = re.compile(r"^(normal|student_t|gamma)(?:\(([^)]*)\))?$")


def parse_synthetic_spec(text: str) -> DataGeneratingSpec:
    """Parse ``key=value`` pairs like
    ``task=classification,dist=student_t(3),d=10,link=linear``.

    Keys: task, d, dist (normal | student_t(df) | gamma(shape,scale)),
    link, noise_sd, nl_scale, coeff (``ones`` or colon-separated floats),
    seed.
    """
    fields: dict = {}
    for chunk in re.split(r",(?![^()]*\))", text):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise ValidationError(f"synthetic spec entry {chunk!r} is not key=value")
        key, value = chunk.split("=", 1)
        key, value = key.strip(), value.strip()
        if key == "task":
            fields["task"] = value
        elif key == "d":
            fields["d"] = int(value)
        elif key == "dist":
            match = _DIST_RE.match(value)
            if not match:
                raise ValidationError(f"unknown distribution {value!r}")
            fields["feature_dist"] = match.group(1)
            args = [a for a in (match.group(2) or "").split(",") if a.strip()]
            if match.group(1) == "student_t" and args:
                fields["df"] = float(args[0])
            elif match.group(1) == "gamma" and args:
                fields["gamma_shape"] = float(args[0])
                if len(args) > 1:
                    fields["gamma_scale"] = float(args[1])
        elif key == "link":
            fields["link"] = value
        elif key == "noise_sd":
            fields["noise_sd"] = float(value)
        elif key == "nl_scale":
            fields["nonlinear_scale"] = float(value)
        elif key == "coeff":
            if value != "ones":
                fields["coefficients"] = tuple(float(v) for v in value.split(":"))
        elif key == "seed":
            fields["seed"] = int(value)
        else:
            raise ValidationError(f"unknown synthetic spec key {key!r}")
    if "task" not in fields or "d" not in fields:
        raise ValidationError("synthetic spec requires at least task= and d=")
    return DataGeneratingSpec(**fields)


def synthetic_spec_to_jsonable(spec: DataGeneratingSpec) -> dict:
    payload = asdict(spec)
    if payload["coefficients"] is not None:
        payload["coefficients"] = list(payload["coefficients"])
    return payload


# ---------------------------------------------------------------------------
# Shared argument plumbing


def _out_dir(args) -> str:
    out = args.out or os.environ.get(OUT_DIR_ENV) or "blbkit-out"
    os.makedirs(out, exist_ok=True)
    return out


def _emit_error(exc: Exception, out_dir: str | None) -> int:
    record = {
        "format": "blbkit-error/1",
        "error": type(exc).__name__,
        "message": str(exc),
    }
    sys.stderr.write(json.dumps(record, sort_keys=True) + "\n")
    if out_dir is not None:
        try:
            write_json(os.path.join(out_dir, "error.json"), record)
        except OSError:
            pass
    return 1


def _build_estimator(args, default_ridge: float = 0.0) -> EstimatorSpec:
    return EstimatorSpec(
        kind=ESTIMATOR_NAMES[args.estimator],
        max_iterations=args.max_iterations,
        gradient_tolerance=args.tolerance,
        ridge_lambda=args.ridge if args.ridge is not None else default_ridge,
    )


def _build_metric(args) -> MetricSpec:
    return MetricSpec(kind=METRIC_NAMES[args.metric], coverage=args.coverage)


def _task_for(args) -> str | None:
    if args.task:
        return args.task
    if args.estimator == "logreg":
        return "classification"
    if args.estimator == "linreg":
        return "regression"
    return None


def _config_jsonable(config: ProcedureConfig) -> dict:
    payload = asdict(config)
    return payload


# ---------------------------------------------------------------------------
# assess


def _load_assess_data(args, task):
    if args.data:
        response = args.response
        if response is not None and re.fullmatch(r"\d+", response):
            response = int(response)
        data = ingest_csv(args.data, response, task)
        with open(args.data, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()[:16]
        source = {"csv": os.path.abspath(args.data), "response": args.response}
        return data, digest, source
    if args.synthetic:
        if args.n is None:
            raise ValidationError("--synthetic requires --n")
        spec = parse_synthetic_spec(args.synthetic)
        data = generate(spec, args.n, RngStream(spec.seed, ("dataset", 0)))
        if task is not None:
            validate(data, task)
        payload = {"synthetic": synthetic_spec_to_jsonable(spec), "n": args.n}
        source = {"synthetic": args.synthetic, "n": args.n}
        return data, digest_of(payload), source
    raise ValidationError("one of --data or --synthetic is required")


def cmd_assess(args) -> int:
    out_dir = None
    try:
        out_dir = _out_dir(args)
        started_at = _utcnow()
        task = _task_for(args)
        data, data_digest, source = _load_assess_data(args, task)
        estimator = _build_estimator(args)
        metric = _build_metric(args)
        adaptive = None
        if args.adaptive:
            adaptive = AdaptiveParams(
                epsilon_r=args.epsilon_r,
                epsilon_s=args.epsilon_s,
                window_r=args.window_r,
                window_s=args.window_s,
                r_max=args.r_max,
                s_max=args.s_max,
            )
        gamma = args.gamma if args.b is None else None
        config = ProcedureConfig(
            gamma=gamma,
            b=args.b,
            s=args.s,
            r=args.r,
            seed=args.seed,
            resample_flavor=args.flavor,
            subsample_mode=args.subsample_mode,
            adaptive=adaptive,
            rate_exponent=args.rate_exponent,
        )
        selection = None
        if args.adaptive:
            if args.method != "blb":
                raise ValidationError("--adaptive applies to --method blb only")
            summary, trajectory, selection = run_blb_adaptive(
                data, estimator, metric, config, workers=args.workers
            )
        else:
            driver = METHOD_NAMES[args.method]
            summary, trajectory = driver(
                data, estimator, metric, config, workers=args.workers
            )

        outputs = ["summary.json", "trajectory.csv", "manifest.json"]
        if selection is not None:
            outputs.append("selection.json")

        summary_payload = {
            "format": "blbkit-summary/1",
            "manifest": "manifest.json",
            "method": args.method,
            "adaptive": bool(args.adaptive),
            "estimator": asdict(estimator),
            "metric": asdict(metric),
            "seed": args.seed,
            "n": data.n,
            "summary": summary_to_jsonable(summary),
            "mean_abs_width": mean_width(summary),
        }
        write_json(os.path.join(out_dir, "summary.json"), summary_payload)

        flat_names = _flat_fieldnames(summary)
        rows = []
        for idx, step in enumerate(trajectory.steps):
            flat = step.summary.flatten()
            rows.append(
                [str(idx), step.work_unit, fmt_float(step.elapsed_seconds),
                 fmt_float(mean_width(step.summary))]
                + [fmt_float(x) for x in flat]
            )
        write_table(
            os.path.join(out_dir, "trajectory.csv"),
            "format=blbkit-trajectory/1 manifest=manifest.json",
            ["step", "work_unit", "elapsed_seconds", "mean_width"] + flat_names,
            rows,
        )

        if selection is not None:
            selection_payload = {
                "format": "blbkit-selection/1",
                "manifest": "manifest.json",
            }
            selection_payload.update(selection.to_dict())
            write_json(os.path.join(out_dir, "selection.json"), selection_payload)

        manifest = {
            "format": "blbkit-manifest/1",
            "command": "assess",
            "argv": sys.argv[1:],
            "version": __version__,
            "seed": args.seed,
            "data_digest": data_digest,
            "data_source": source,
            "config": {
                "estimator": asdict(estimator),
                "metric": asdict(metric),
                "method": args.method,
                "procedure": _config_jsonable(config),
                "task": task,
                "workers": args.workers,
            },
            "started_at": started_at,
            "finished_at": _utcnow(),
            "outputs": sorted(outputs),
        }
        write_json(os.path.join(out_dir, "manifest.json"), manifest)
        return 0
    except (BlbkitError, OSError) as exc:
        return _emit_error(exc, out_dir)


# ---------------------------------------------------------------------------
# benchmark


def _preset_spec(args) -> DataGeneratingSpec:
    if args.preset == "fig1-regression":
        return DataGeneratingSpec(
            task="regression", d=args.d or 20, feature_dist=args.dist or "student_t",
            df=args.df, link=args.link or "linear", noise_sd=args.noise_sd,
        )
    d = args.d or 10
    return DataGeneratingSpec(
        task="classification", d=d, feature_dist=args.dist or "student_t",
        df=args.df, link=args.link or "linear",
    )


def _benchmark_estimator(args, spec: DataGeneratingSpec, n: int) -> EstimatorSpec:
    if args.estimator:
        return _build_estimator(args)
    if spec.task == "classification":
        # Tiny ridge keeps the penalized logistic MLE finite on separable
        # resamples; at 1e-4 per observation it is negligible relative to
        # the CI widths being assessed.
        return EstimatorSpec("logistic_newton", ridge_lambda=1e-4 * n)
    return EstimatorSpec("least_squares")


def _fig1_cells(args, n: int) -> list[ProcedureSetup]:
    gammas = [float(g) for g in args.gammas.split(",")] if args.gammas else list(FIG1_GAMMAS)
    cells = []
    for gamma in gammas:
        cells.append(
            ProcedureSetup(
                f"blb-g{gamma:g}", "blb",
                ProcedureConfig(gamma=gamma, s=args.s, r=args.r),
            )
        )
    for gamma in gammas:
        cells.append(
            ProcedureSetup(
                f"bofn-g{gamma:g}", "bofn",
                ProcedureConfig(gamma=gamma, r=args.r),
            )
        )
    for gamma in gammas:
        cells.append(
            ProcedureSetup(
                f"subsampling-g{gamma:g}", "subsampling",
                ProcedureConfig(gamma=gamma, r=args.r),
            )
        )
    cells.append(ProcedureSetup("boot", "bootstrap", ProcedureConfig(gamma=1.0, r=args.r)))
    return cells


def _truth_payload(spec, n, estimator, metric, truth_realizations, seed) -> dict:
    return {
        "synthetic": synthetic_spec_to_jsonable(spec),
        "n": n,
        "estimator": asdict(estimator),
        "metric": asdict(metric),
        "num_realizations": truth_realizations,
        "truth_seed": seed,
    }


def _load_or_compute_truth(out_dir, spec, n, estimator, metric, args):
    payload = _truth_payload(spec, n, estimator, metric, args.truth_realizations, args.seed)
    digest = digest_of(payload)
    truth_file = f"truth_{digest}.json"
    truth_path = os.path.join(out_dir, truth_file)
    if os.path.exists(truth_path):
        stored = read_json(truth_path)
        truth = GroundTruth(
            summary_from_jsonable(stored["summary"]),
            stored["num_realizations"],
            stored["n"],
        )
        return truth, truth_file, True
    if args.truth_realizations < LOW_FIDELITY_TRUTH:
        sys.stderr.write(
            f"warning: truth from only {args.truth_realizations} realizations "
            "is low-fidelity\n"
        )
    truth = compute_ground_truth(
        spec, n, args.truth_realizations, estimator, metric,
        RngStream(args.seed, ("truth",)), workers=args.workers,
    )
    stored = dict(payload)
    stored["format"] = "blbkit-truth/1"
    stored["digest"] = digest
    stored["summary"] = summary_to_jsonable(truth.summary)
    write_json(truth_path, stored)
    return truth, truth_file, False


def _write_cell_trajectories(out_dir, report, value_name):
    files = {}
    for cell in report.cells:
        if cell.error is not None:
            continue
        name = f"trajectory_{cell.label}.csv"
        rows = [
            [str(i), fmt_float(elapsed), fmt_float(value)]
            for i, (elapsed, value) in enumerate(cell.steps)
        ]
        write_table(
            os.path.join(out_dir, name),
            f"format=blbkit-cell-trajectory/1 label={cell.label}",
            ["step", "elapsed_seconds", value_name],
            rows,
        )
        files[cell.label] = name
    return files


def cmd_benchmark(args) -> int:
    out_dir = None
    try:
        out_dir = _out_dir(args)
        started_at = _utcnow()
        preset = args.preset or "custom"
        if preset == "real-data":
            return _benchmark_real_data(args, out_dir, started_at)

        n = args.n or (2000 if preset == "fig3-grid" else 5000)
        if preset == "custom" and args.task:
            spec = DataGeneratingSpec(
                task=args.task, d=args.d or 10,
                feature_dist=args.dist or "normal", df=args.df,
                link=args.link or "linear", noise_sd=args.noise_sd,
            )
        else:
            spec = _preset_spec(args)
        estimator = _benchmark_estimator(args, spec, n)
        metric = _build_metric(args)
        truth, truth_file, cached = _load_or_compute_truth(
            out_dir, spec, n, estimator, metric, args
        )
        if cached:
            sys.stderr.write(f"reusing cached truth {truth_file}\n")

        rng = RngStream(args.seed, ("benchmark",))
        report_payload = {
            "format": "blbkit-report/1",
            "manifest": "manifest.json",
            "preset": preset,
            "n": n,
            "truth_file": truth_file,
            "truth_cached": cached,
            "truth_realizations": truth.num_realizations,
        }
        outputs = ["report.json", "manifest.json", truth_file]

        if preset == "fig3-grid":
            config = ProcedureConfig(gamma=args.gamma, s=1, r=2)
            grid = run_grid(
                spec, n, config, list(GRID_R_VALUES), list(GRID_S_VALUES),
                estimator, metric, truth, args.dataset_realizations, rng,
                workers=args.workers,
            )
            rows = []
            for si, s in enumerate(grid.s_values):
                for ri, r in enumerate(grid.r_values):
                    rows.append([str(r), str(s), fmt_float(grid.errors[si, ri])])
            write_table(
                os.path.join(out_dir, "grid.csv"),
                "format=blbkit-grid/1",
                ["r", "s", "relative_error"],
                rows,
            )
            outputs.append("grid.csv")
            report_payload["grid_file"] = "grid.csv"
            report_payload["grid_min_error"] = float(grid.errors.min())
        else:
            cells = _fig1_cells(args, n)
            report = run_experiment(
                spec, n, cells, estimator, metric, truth,
                args.dataset_realizations, rng, workers=args.workers,
            )
            files = _write_cell_trajectories(out_dir, report, "relative_error")
            outputs.extend(sorted(files.values()))
            report_payload["cells"] = [
                {
                    "label": cell.label,
                    "method": cell.method,
                    "mean_final_error": cell.mean_final_error,
                    "mean_total_seconds": cell.mean_total_seconds,
                    "trajectory_file": files.get(cell.label),
                    "error": cell.error,
                }
                for cell in report.cells
            ]

        write_json(os.path.join(out_dir, "report.json"), report_payload)
        manifest = {
            "format": "blbkit-manifest/1",
            "command": "benchmark",
            "argv": sys.argv[1:],
            "version": __version__,
            "seed": args.seed,
            "data_digest": digest_of(
                {"synthetic": synthetic_spec_to_jsonable(spec), "n": n}
            ),
            "config": {
                "preset": preset,
                "n": n,
                "estimator": asdict(estimator),
                "metric": asdict(metric),
                "truth_realizations": args.truth_realizations,
                "dataset_realizations": args.dataset_realizations,
                "workers": args.workers,
            },
            "started_at": started_at,
            "finished_at": _utcnow(),
            "outputs": sorted(outputs),
        }
        write_json(os.path.join(out_dir, "manifest.json"), manifest)
        return 0
    except (BlbkitError, OSError) as exc:
        return _emit_error(exc, out_dir)


def _benchmark_real_data(args, out_dir: str, started_at: str) -> int:
    if not args.data:
        raise ValidationError("--preset real-data requires --data")
    if not args.estimator:
        args.estimator = "logreg"
    task = _task_for(args)
    response = args.response
    if response is not None and re.fullmatch(r"\d+", response):
        response = int(response)
    data = ingest_csv(args.data, response, task)
    with open(args.data, "rb") as fh:
        data_digest = hashlib.sha256(fh.read()).hexdigest()[:16]
    n = data.n
    default_ridge = 1e-4 * n if args.estimator == "logreg" else 0.0
    estimator = _build_estimator(args, default_ridge)
    metric = _build_metric(args)
    gammas = [float(g) for g in args.gammas.split(",")] if args.gammas else [0.6, 0.7, 0.8, 0.9]
    adaptive = AdaptiveParams()
    setups = [
        (f"blb-adaptive-g{g:g}", "blb_adaptive",
         ProcedureConfig(gamma=g, adaptive=adaptive))
        for g in gammas
    ]
    setups.append(("boot", "bootstrap", ProcedureConfig(gamma=1.0, r=args.r)))
    setups.extend(
        (f"bofn-g{g:g}", "bofn", ProcedureConfig(gamma=g, r=args.r)) for g in gammas
    )

    rng = RngStream(args.seed, ("realdata",))
    cells_payload = []
    outputs = ["report.json", "manifest.json"]
    from .simbench import DRIVERS

    for c_idx, (label, method, config) in enumerate(setups):
        cell_seed = int(rng.child("proc", c_idx, 0).generator.integers(0, 2**62))
        config = replace(config, seed=cell_seed)
        entry = {"label": label, "method": method, "error": None}
        try:
            result = DRIVERS[method](data, estimator, metric, config, args.workers)
            if method == "blb_adaptive":
                summary, trajectory, selection = result
                entry["selection"] = selection.to_dict()
            else:
                summary, trajectory = result
            name = f"trajectory_{label}.csv"
            rows = [
                [str(i), fmt_float(step.elapsed_seconds),
                 fmt_float(mean_width(step.summary))]
                for i, step in enumerate(trajectory.steps)
            ]
            write_table(
                os.path.join(out_dir, name),
                f"format=blbkit-cell-trajectory/1 label={label}",
                ["step", "elapsed_seconds", "mean_width"],
                rows,
            )
            outputs.append(name)
            entry["trajectory_file"] = name
            entry["final_mean_width"] = mean_width(summary)
            entry["total_seconds"] = trajectory.steps[-1].elapsed_seconds
        except BlbkitError as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
        cells_payload.append(entry)

    report_payload = {
        "format": "blbkit-report/1",
        "manifest": "manifest.json",
        "preset": "real-data",
        "n": n,
        "data_digest": data_digest,
        "cells": cells_payload,
    }
    write_json(os.path.join(out_dir, "report.json"), report_payload)
    manifest = {
        "format": "blbkit-manifest/1",
        "command": "benchmark",
        "argv": sys.argv[1:],
        "version": __version__,
        "seed": args.seed,
        "data_digest": data_digest,
        "config": {
            "preset": "real-data",
            "data": os.path.abspath(args.data),
            "estimator": asdict(estimator),
            "metric": asdict(metric),
            "workers": args.workers,
        },
        "started_at": started_at,
        "finished_at": _utcnow(),
        "outputs": sorted(outputs),
    }
    write_json(os.path.join(out_dir, "manifest.json"), manifest)
    return 0


# ---------------------------------------------------------------------------
# argument parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blbkit",
        description="Assess estimator quality with resampling procedures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--estimator", choices=sorted(ESTIMATOR_NAMES), default="mean")
        p.add_argument("--metric", choices=sorted(METRIC_NAMES), default="ci")
        p.add_argument("--coverage", type=float, default=0.95)
        p.add_argument("--ridge", type=float, default=None,
                       help="L2 penalty (absolute, on the summed objective)")
        p.add_argument("--max-iterations", type=int, default=100)
        p.add_argument("--tolerance", type=float, default=1e-8)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", default=None,
                       help=f"output directory (default ${OUT_DIR_ENV} or ./blbkit-out)")

    assess = sub.add_parser("assess", help="run one procedure on one dataset")
    assess.add_argument("--data", help="CSV dataset path")
    assess.add_argument("--synthetic", help="synthetic data spec, e.g. "
                        "'task=classification,dist=student_t(3),d=10'")
    assess.add_argument("--n", type=int, help="rows to generate for --synthetic")
    assess.add_argument("--response", help="response column name or 0-based index")
    assess.add_argument("--task", choices=["regression", "classification"])
    assess.add_argument("--method", choices=sorted(METHOD_NAMES), default="blb")
    assess.add_argument("--gamma", type=float, default=0.7)
    assess.add_argument("--b", type=int, default=None)
    assess.add_argument("--s", type=int, default=5)
    assess.add_argument("--r", type=int, default=100)
    assess.add_argument("--flavor", choices=["multinomial", "poisson"],
                        default="multinomial")
    assess.add_argument("--subsample-mode",
                        choices=["uniform_without_replacement", "disjoint_partition"],
                        default="uniform_without_replacement")
    assess.add_argument("--rate-exponent", type=float, default=0.5)
    assess.add_argument("--adaptive", action="store_true")
    assess.add_argument("--epsilon-r", type=float, default=0.05)
    assess.add_argument("--window-r", type=int, default=20)
    assess.add_argument("--epsilon-s", type=float, default=0.05)
    assess.add_argument("--window-s", type=int, default=3)
    assess.add_argument("--r-max", type=int, default=500)
    assess.add_argument("--s-max", type=int, default=50)
    add_common(assess)
    assess.set_defaults(func=cmd_assess)

    bench = sub.add_parser("benchmark", help="ground-truth evaluation suites")
    bench.add_argument("--preset",
                       choices=["fig1-classification", "fig1-regression",
                                "fig3-grid", "real-data"])
    bench.add_argument("--n", type=int, default=None)
    bench.add_argument("--truth-realizations", type=int, default=2000)
    bench.add_argument("--dataset-realizations", type=int, default=5)
    bench.add_argument("--task", choices=["regression", "classification"])
    bench.add_argument("--dist", choices=["normal", "student_t", "gamma"])
    bench.add_argument("--df", type=float, default=3.0)
    bench.add_argument("--d", type=int, default=None)
    bench.add_argument("--link",
                       choices=["linear", "linear_scaled_by_sqrt_d", "nonlinear_noisy"])
    bench.add_argument("--noise-sd", type=float, default=1.0)
    bench.add_argument("--gamma", type=float, default=0.7,
                       help="subset exponent for the grid preset")
    bench.add_argument("--gammas", default=None,
                       help="comma list of subset exponents for trajectory presets")
    bench.add_argument("--s", type=int, default=10)
    bench.add_argument("--r", type=int, default=100)
    bench.add_argument("--data", help="CSV dataset (real-data preset)")
    bench.add_argument("--response")
    add_common(bench)
    bench.set_defaults(func=cmd_benchmark, estimator=None)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
