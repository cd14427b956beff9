"""``gpsselect`` command line: fit, simulate, bench, verify, replay.

Exit codes: 0 success, 1 bad input, 2 numerical failure, 3 internal error
(including a failed ``verify`` invariant check or a ``replay --check`` mismatch).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
import traceback
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .criteria import CRITERIA, cross_validate, estimate_tau2, evaluate, select
from .dataset import diabetes_path, load_csv, standardize
from .dof import dense_series, reduced_replay
from .errors import GPSSelectError, InputError, InternalError, NumericalError
from .oracle import verify
from .path import PathOptions, fit
from .penalty import parse_penalty
from .sim import SimConfig, bench_timing, compare_df, loglog_slope, run_example

log = logging.getLogger("gpsselect")

SCHEMA = "gpsselect/1"
BUILTIN_DIABETES = "builtin:diabetes"
FIT_ALL = CRITERIA + ("cv",)
SIM_ALL = ("cp", "aicc", "gcv", "bic", "cv")
# wall-clock dependent fields, ignored by ``replay --check``
TIMING_KEYS = frozenset({"naive_s", "modified_s", "ratio", "loglog_slope"})
# options that only say where output goes
_NON_NUMERIC_OPTIONS = ("func", "command", "out", "manifest", "plot_data", "verbose")

__all__ = ["main", "build_parser", "TIMING_KEYS", "strip_timing"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# serialization helpers


def _clean(obj: Any) -> Any:
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, repr floats, no NaN."""
    return json.dumps(_clean(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    fields = list(rows[0])
    for r in rows[1:]:
        fields.extend(k for k in r if k not in fields)
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if v is None else v) for k, v in _clean(r).items()})
    return buf.getvalue()


def strip_timing(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k not in TIMING_KEYS}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def _write(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# argument helpers


def _positive_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _delta_t(s: str):
    if s == "auto":
        return "auto"
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--delta-t takes 'auto' or a number, got {s!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"--delta-t must be positive and finite, got {s}")
    return v


def _tau2(s: str):
    if s in ("auto", "true"):
        return s
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--tau2 takes 'auto' or a positive number, got {s!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"--tau2 must be positive and finite, got {s}")
    return v


def _float_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {s!r}") from None


def _int_list(s: str) -> list[int]:
    try:
        vals = [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {s!r}") from None
    if not vals or min(vals) < 2:
        raise argparse.ArgumentTypeError(f"sample sizes must be integers >= 2, got {s!r}")
    return vals


def _criteria(values: Optional[list[str]], allowed: tuple[str, ...], all_set: tuple[str, ...]) -> list[str]:
    out: list[str] = []
    for v in values or ["cp"]:
        for name in v.split(","):
            name = name.strip().lower()
            names = all_set if name == "all" else (name,)
            for n in names:
                if n not in allowed:
                    raise InputError(f"unknown criterion {n!r}; choose from {', '.join(allowed)} or all")
                if n not in out:
                    out.append(n)
    return out


def _penalties(names: Optional[list[str]], alphas: Optional[list[float]]):
    specs = []
    for v in names or ["lasso"]:
        for name in v.split(","):
            name = name.strip().lower()
            if name == "lasso":
                specs.append(parse_penalty("lasso"))
            else:
                for a in alphas or [0.5]:
                    specs.append(parse_penalty(name, a))
    labels = [s.label() for s in specs]
    return [s for i, s in enumerate(specs) if s.label() not in labels[:i]]


def _load(data: str, response: str):
    path = diabetes_path() if data == BUILTIN_DIABETES else Path(data)
    raw = load_csv(path, response)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return raw, {"path": data, "sha256": digest}


def _manifest(ns, resolved: dict, data: Optional[dict] = None) -> dict:
    options = {k: v for k, v in sorted(vars(ns).items()) if k not in _NON_NUMERIC_OPTIONS}
    return {
        "schema": "gpsselect.manifest/1",
        "command": ns.command,
        "options": options,
        "resolved": resolved,
        "version": __version__,
        "input": data,
    }


def _emit_manifest(ns, manifest: dict, embedded: bool) -> None:
    if ns.manifest:
        Path(ns.manifest).write_text(dumps(manifest), encoding="utf-8")
    elif embedded:
        return
    elif ns.out:
        Path(ns.out + ".manifest.json").write_text(dumps(manifest), encoding="utf-8")
    else:
        sys.stderr.write("gpsselect: manifest " + json.dumps(_clean(manifest), sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# fit


def _resolve_tau2(ns, design, criteria) -> tuple[Optional[float], str]:
    if isinstance(ns.tau2, float):
        return ns.tau2, "given"
    if ns.tau2 == "true":
        raise InputError("--tau2 true is only meaningful for simulate; pass a number instead")
    needs = any(c in ("cp", "aic", "bic") for c in criteria)
    try:
        return estimate_tau2(design), "estimated"
    except NumericalError:
        if needs:
            raise
        return None, "unavailable"


def _trace_index(spec: Optional[str], names) -> Optional[int]:
    if spec is None:
        return None
    if spec in names:
        return list(names).index(spec)
    try:
        j = int(spec)
    except ValueError:
        raise InputError(f"--trace-var {spec!r} is neither a predictor name nor an index") from None
    if not 1 <= j <= len(names):
        raise InputError(f"--trace-var index {j} outside 1..{len(names)}")
    return j - 1


def _fit_one(ns, design, penalty, opts, tau2, criteria):
    names = list(design.predictor_names)
    path = fit(design, penalty, opts)
    if ns.df == "dense":
        df = dense_series(path)
        df_dense = None
    else:
        df = reduced_replay(path)
        df_dense = dense_series(path) if ns.df == "both" else None
    table = evaluate(path, df, tau2, aicc_form=ns.aicc_form)

    selections, keep, cv_block = {}, [], None
    for crit in criteria:
        if crit == "cv":
            cv = cross_validate(design, penalty, opts, ns.folds, ns.seed)
            sel = cv.selection
            cv_block = {"s_grid": cv.s_grid, "cv_error": cv.cv_error, "cv_se": cv.cv_se, "s_best": cv.s_best}
        else:
            sel = select(path, table, crit)
            keep.append(sel.step)
        d = sel.to_dict(names)
        d["intercept_std"] = design.y_mean
        selections[crit] = d

    idx = path.thin(ns.thin, keep)
    B = path.coef_path(idx)
    steps = []
    for row, s in enumerate(idx):
        rec = {
            "step": int(s),
            "t": path.t[s],
            "l1": path.l1[s],
            "df": df[s],
            "df_zou": int(path.nnz[s]),
            "coef": {names[j]: B[row, j] for j in np.nonzero(B[row])[0]},
        }
        if df_dense is not None:
            rec["df_dense"] = df_dense[s]
        steps.append(rec)
    crit_block = {
        "tau2": tau2,
        "aicc_form": ns.aicc_form,
        "step": idx,
        "values": {c: table.column(c)[idx] for c in table.available()},
    }
    run = {
        "penalty": penalty.label(),
        "path": {
            "status": path.status,
            "n_steps": path.n_steps,
            "delta_t": path.delta_t,
            "alpha": path.alpha,
            "selected": [names[j] for j in path.selected],
            "sign_changes": path.sign_changes,
            "final_df": df[-1],
        },
        "steps": steps,
        "criteria": crit_block,
        "selections": selections,
    }
    if df_dense is not None:
        run["path"]["df_dense_max_gap"] = float(np.abs(df_dense - df).max())
    if cv_block is not None:
        run["cv"] = cv_block
    trace = _trace_index(ns.trace_var, names)
    plot = {"idx": idx, "l1": path.l1[idx], "coef": B, "df": df[idx]}
    if trace is not None:
        plot["trace"] = (names[trace], path.gradient_path(trace, idx))
    return run, plot


def _write_plot_data(directory: Path, names, plot) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    l1 = plot["l1"]

    def two_col(fname, header, y):
        np.savetxt(directory / fname, np.column_stack([l1, y]), fmt="%.17g", header=header)

    for j, name in enumerate(names):
        two_col(f"coef_{name}.txt", f"l1 coef_{name}", plot["coef"][:, j])
    two_col("df.txt", "l1 df", plot["df"])
    if "trace" in plot:
        name, g = plot["trace"]
        two_col(f"trace_{name}.txt", f"l1 g_{name}", g)


def cmd_fit(ns) -> int:
    raw, data = _load(ns.data, ns.response)
    design = standardize(raw)
    criteria = _criteria(ns.criterion, FIT_ALL, FIT_ALL)
    penalties = _penalties([ns.penalty], ns.alpha)
    opts = PathOptions(step_budget=ns.steps, max_vars=ns.max_vars, delta_t=ns.delta_t)
    tau2, tau2_source = _resolve_tau2(ns, design, criteria)

    runs, plots = [], []
    for pen in penalties:
        run, plot = _fit_one(ns, design, pen, opts, tau2, criteria)
        runs.append(run)
        plots.append(plot)

    sweep = {}
    for crit in criteria:
        vals = [r["selections"][crit]["value"] for r in runs]
        best = int(np.nanargmin(np.where(np.isfinite(vals), vals, np.nan))) if np.isfinite(vals).any() else 0
        sweep[crit] = {"penalty": runs[best]["penalty"], "value": vals[best]}

    resolved = {
        "delta_t": {r["penalty"]: r["path"]["delta_t"] for r in runs},
        "tau2": tau2,
        "tau2_source": tau2_source,
        "seed": ns.seed,
    }
    manifest = _manifest(ns, resolved, data)
    doc = {
        "schema": SCHEMA,
        "kind": "fit",
        "manifest": manifest,
        "data": {"N": design.N, "p": design.p, "predictors": list(design.predictor_names),
                 "response": design.response_name, "y_mean": design.y_mean},
        "runs": runs,
        "sweep": sweep,
    }

    if ns.plot_data:
        base = Path(ns.plot_data)
        for run, plot in zip(runs, plots):
            target = base if len(runs) == 1 else base / run["penalty"].replace("(", "_").replace(")", "")
            _write_plot_data(target, design.predictor_names, plot)

    if ns.format == "csv":
        rows = []
        for run in runs:
            for crit, sel in run["selections"].items():
                row = {"penalty": run["penalty"], "criterion": crit}
                row.update({k: sel[k] for k in ("step", "t", "l1", "df", "value", "intercept_std", "intercept")})
                row.update(sel["beta_std"])
                row.update({f"raw_{k}": v for k, v in sel["beta"].items()})
                rows.append(row)
        _write(_csv_text(rows), ns.out)
        _emit_manifest(ns, manifest, embedded=False)
    else:
        _write(dumps(doc), ns.out)
        _emit_manifest(ns, manifest, embedded=True)
    return 0


# ---------------------------------------------------------------------------
# simulate / bench / verify


def cmd_simulate(ns) -> int:
    penalties = tuple(_penalties(ns.penalty, ns.alpha))
    if isinstance(ns.tau2, float):
        raise InputError("simulate takes --tau2 auto (estimated) or --tau2 true")
    tau2_mode = "true" if ns.tau2 == "true" else "estimated"
    common = dict(example=ns.example, reps=ns.reps, seed=ns.seed, step_budget=ns.steps,
                  folds=ns.folds, aicc_form=ns.aicc_form, se_frame=ns.se_frame)
    if ns.compare_df:
        cfg = SimConfig(penalties=penalties, criteria=("cp",),
                        tau2_mode="true" if ns.tau2 == "auto" else tau2_mode, **common)
        cmp = compare_df(cfg)
        lo, hi = cmp.ci95()
        extra = {"mean_diff": cmp.mean_diff, "diff_se": cmp.diff_se, "ci95_lo": lo, "ci95_hi": hi}
        rows = [
            {"example": ns.example, "df": name, "criterion": "cp", **cell.to_dict(), **extra}
            for name, cell in (("gps", cmp.gps), ("zou", cmp.zou))
        ]
        resolved = {"tau2_mode": cfg.tau2_mode, "seed": ns.seed}
        body = {"comparison": cmp.to_dict(), "rows": rows}
    else:
        criteria = tuple(_criteria(ns.criterion, SIM_ALL + ("aic",), SIM_ALL))
        cfg = SimConfig(penalties=penalties, criteria=criteria, tau2_mode=tau2_mode, **common)
        rows = run_example(cfg).rows()
        resolved = {"tau2_mode": tau2_mode, "seed": ns.seed}
        body = {"rows": rows}
    manifest = _manifest(ns, resolved)
    if ns.format == "csv":
        _write(_csv_text(rows), ns.out)
        _emit_manifest(ns, manifest, embedded=False)
    else:
        _write(dumps({"schema": SCHEMA, "kind": "simulate", "manifest": manifest, **body}), ns.out)
        _emit_manifest(ns, manifest, embedded=True)
    return 0


def cmd_bench(ns) -> int:
    rows = bench_timing(ns.n, ns.reps, ns.example, ns.seed, ns.steps)
    manifest = _manifest(ns, {"seed": ns.seed})
    if ns.format == "csv":
        _write(_csv_text(rows), ns.out)
        _emit_manifest(ns, manifest, embedded=False)
    else:
        n = [r["n"] for r in rows]
        slope = None
        if len(n) >= 2:
            slope = {"naive": loglog_slope(n, [r["naive_s"] for r in rows]),
                     "modified": loglog_slope(n, [r["modified_s"] for r in rows])}
        doc = {"schema": SCHEMA, "kind": "bench", "manifest": manifest, "rows": rows, "loglog_slope": slope}
        _write(dumps(doc), ns.out)
        _emit_manifest(ns, manifest, embedded=True)
    return 0


def cmd_verify(ns) -> int:
    raw, data = _load(ns.data, ns.response)
    design = standardize(raw)
    failed = 0
    lines = []
    drift = 0
    for pen in _penalties([ns.penalty], ns.alpha):
        opts = PathOptions(step_budget=ns.steps, max_vars=ns.max_vars, delta_t=ns.delta_t)
        for rep in verify(design, pen, opts):
            if not rep.passed:
                if rep.kind == "invariant":
                    failed += 1
                else:
                    drift += 1
            lines.append(json.dumps(_clean(rep.to_dict()), sort_keys=True) + "\n")
    _write("".join(lines), ns.out)
    _emit_manifest(ns, _manifest(ns, {}, data), embedded=False)
    if drift:
        log.warning("%d fidelity check(s) outside tolerance: the path departs from the exact lasso", drift)
    if failed:
        log.error("%d invariant check(s) failed", failed)
        return 3
    return 0


# ---------------------------------------------------------------------------
# replay


_COMMANDS = {"fit": cmd_fit, "simulate": cmd_simulate, "bench": cmd_bench, "verify": cmd_verify}


def _read_manifest(path: str) -> dict:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read manifest {path}: {exc}") from None
    if isinstance(obj, dict) and "manifest" in obj:
        obj = obj["manifest"]
    if not isinstance(obj, dict) or obj.get("command") not in _COMMANDS or "options" not in obj:
        raise InputError(f"{path} does not contain a run manifest")
    return obj


def _comparable(text: str) -> Any:
    """Parse output for comparison with timing fields dropped."""
    stripped = text.lstrip()
    if stripped.startswith("{") and "\n{" not in stripped:
        return strip_timing(json.loads(text))
    if stripped.startswith("{"):
        return [strip_timing(json.loads(line)) for line in text.splitlines() if line.strip()]
    rows = list(csv.DictReader(io.StringIO(text)))
    return [{k: v for k, v in r.items() if k not in TIMING_KEYS} for r in rows]


def cmd_replay(ns) -> int:
    manifest = _read_manifest(ns.manifest_file)
    if manifest.get("version") != __version__:
        log.warning("manifest was written by version %s, this is %s", manifest.get("version"), __version__)
    inp = manifest.get("input")
    if inp:
        path = diabetes_path() if inp["path"] == BUILTIN_DIABETES else Path(inp["path"])
        if not path.is_file():
            raise InputError(f"input file {inp['path']} named by the manifest is missing")
        if hashlib.sha256(path.read_bytes()).hexdigest() != inp["sha256"]:
            raise InputError(f"input file {inp['path']} has changed since the run (sha256 mismatch)")
    opts = dict(manifest["options"])
    replay_ns = argparse.Namespace(
        **opts, command=manifest["command"], out=None, manifest=None, plot_data=ns.plot_data, verbose=ns.verbose
    )
    buf = io.StringIO()
    real_stdout = sys.stdout
    sys.stdout = buf
    try:
        code = _COMMANDS[manifest["command"]](replay_ns)
    finally:
        sys.stdout = real_stdout
    text = buf.getvalue()
    _write(text, ns.out)
    if ns.check:
        original = Path(ns.check).read_text(encoding="utf-8")
        if _comparable(original) != _comparable(text):
            raise InternalError(f"replayed output differs from {ns.check}")
        log.info("replay matches %s", ns.check)
    return code


# ---------------------------------------------------------------------------
# parser


def _add_output(p):
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--manifest", help="also write the run manifest to this file")


def _add_path_options(p):
    p.add_argument("--penalty", default="lasso", help="lasso, enet or genet")
    p.add_argument("--alpha", type=_float_list, default=None,
                   help="mixing parameter for enet/genet; a comma list sweeps a grid (default 0.5)")
    p.add_argument("--steps", type=_positive_int, default=20000, help="step budget (default 20000)")
    p.add_argument("--delta-t", type=_delta_t, default="auto", help="coefficient step size or 'auto'")
    p.add_argument("--max-vars", type=_positive_int, default=None, help="stop before variable q+1 enters")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gpsselect", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gpsselect {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="compute a path, track df, select by criteria")
    p.add_argument("--data", required=True, help=f"CSV file with a header row, or {BUILTIN_DIABETES}")
    p.add_argument("--response", default="y", help="response column name (default y)")
    _add_path_options(p)
    p.add_argument("--criterion", action="append", help="cp, aic, aicc, bic, gcv, cv or all; repeatable")
    p.add_argument("--tau2", type=_tau2, default="auto", help="'auto' (least squares estimate) or a value")
    p.add_argument("--df", choices=("dense", "reduced", "both"), default="reduced")
    p.add_argument("--aicc-form", choices=("plus", "minus"), default="plus")
    p.add_argument("--thin", type=_positive_int, default=10, help="keep every r-th step in the output")
    p.add_argument("--folds", type=_positive_int, default=10, help="folds for --criterion cv")
    p.add_argument("--seed", type=int, default=0, help="fold assignment seed for cv")
    p.add_argument("--plot-data", help="directory for two-column plot data files")
    p.add_argument("--trace-var", help="also write the gradient trace of this predictor (name or 1-based index)")
    _add_output(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="Monte Carlo comparison of selection criteria")
    p.add_argument("--example", type=int, choices=(1, 2, 3, 4), default=1)
    p.add_argument("--reps", type=_positive_int, default=200)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--penalty", action="append", help="lasso, enet, genet; repeatable or comma separated")
    p.add_argument("--alpha", type=_float_list, default=None)
    p.add_argument("--criterion", action="append", help="cp, aic, aicc, bic, gcv, cv or all (cp aicc gcv bic cv)")
    p.add_argument("--tau2", type=_tau2, default="auto", help="'auto' (estimated per replicate) or 'true'")
    p.add_argument("--steps", type=_positive_int, default=20000)
    p.add_argument("--folds", type=_positive_int, default=10)
    p.add_argument("--aicc-form", choices=("plus", "minus"), default="plus")
    p.add_argument("--se-frame", choices=("centered", "raw"), default="centered",
                   help="score centered fits (default) or include the fitted intercept")
    p.add_argument("--compare-df", action="store_true",
                   help="lasso Cp with tracked df versus the nonzero count (true tau2 unless --tau2 given)")
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="dense versus reduced df tracker timing")
    p.add_argument("--n", type=_int_list, default=[100, 200, 500], help="comma separated sample sizes")
    p.add_argument("--reps", type=_positive_int, default=5)
    p.add_argument("--example", type=int, choices=(1, 2, 3, 4), default=1)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--steps", type=_positive_int, default=20000)
    _add_output(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="run the oracle checks on a data set (JSON lines)")
    p.add_argument("--data", required=True)
    p.add_argument("--response", default="y")
    _add_path_options(p)
    p.add_argument("--out")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("replay", help="rerun a command from its manifest")
    p.add_argument("manifest_file", help="manifest file, or a JSON result document that embeds one")
    p.add_argument("--out")
    p.add_argument("--plot-data")
    p.add_argument("--check", help="compare with this earlier output, ignoring timing fields")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(format="gpsselect: %(levelname)s: %(message)s", stream=sys.stderr)
    try:
        ns = build_parser().parse_args(argv)
        log.setLevel(logging.INFO if ns.verbose else logging.WARNING)
        return ns.func(ns)
    except InputError as exc:
        print(f"gpsselect: error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"gpsselect: numerical error: {exc}", file=sys.stderr)
        return 2
    except GPSSelectError as exc:
        print(f"gpsselect: internal error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"gpsselect: error: {exc}", file=sys.stderr)
        return 1
    except Exception:  # pragma: no cover - last resort
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
