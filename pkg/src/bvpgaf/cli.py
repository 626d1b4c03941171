"""Command-line entry point: ``bvpgaf <command> [--config FILE] [--seed N] [--out DIR]``.

Commands: segment, encode, stationarity, anova, train-sweep, demo.

Every CSV starts with a ``# config_hash=...`` comment followed by a header
row. Exit status is 0 on success, 1 on a fatal error and 2 when some rows
or sweep cells failed; failures are listed in ``errors.json``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import container, plotting
from .config import GAF_SWEEP, RAW_SWEEP, RunConfig, load_config
from .errors import BvpError, ContainerError, EmptyWindowSetError
from .gaf import GafImageSet, GafKind, encode_windows
from .ingest import CONDITIONS, Condition, SyntheticConfig, default_condition_params, generate_synthetic_corpus, load_sessions
from .nn import ModelConfig, TrainConfig, Variant, build_model, train
from .stationarity import stationarity_report
from .stats import (
    FEATURES,
    demo_score_table,
    dump_score_table,
    experience_analysis,
    feature_condition_analysis,
    format_ordering,
    read_score_table,
)
from .windowing import WindowSet, WindowSpec, segment

log = logging.getLogger("bvpgaf")


class RunErrors:
    """Row-level failures collected during one command."""

    def __init__(self):
        self.items: list[dict] = []

    def add(self, where: str, exc: Exception) -> None:
        log.warning("%s: %s", where, exc)
        self.items.append({"where": where, "error": type(exc).__name__, "message": str(exc)})

    def __bool__(self):
        return bool(self.items)

    def write(self, out: Path) -> None:
        path = out / "errors.json"
        if self.items:
            path.write_text(json.dumps({"errors": self.items}, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        elif path.exists():
            path.unlink()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.6g}" if np.isfinite(v) else str(v)
    return str(v)


def write_csv(path: Path, header, rows, config_hash: str) -> Path:
    buf = io.StringIO()
    buf.write(f"# config_hash={config_hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row.get(h)) if isinstance(row, dict) else _fmt(x) for h, x in
                    (zip(header, header) if isinstance(row, dict) else zip(header, row))])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def load_series(cfg: RunConfig, baseline_wander: float | None = None):
    inp = cfg["input"]
    if inp["manifest"] is not None:
        _, series = load_sessions(cfg.resolve(inp["manifest"]))
        return series
    wander = inp["baseline_wander"] if baseline_wander is None else baseline_wander
    syn = SyntheticConfig(cfg.seed, float(inp["duration_s"]), float(inp["sample_rate_hz"]),
                          default_condition_params(float(wander)))
    return generate_synthetic_corpus(syn, int(inp["sessions_per_condition"]))


def _label_array(ws: WindowSet) -> np.ndarray:
    return ws.label_indices.astype(np.float64)


def save_windows(path: Path, ws: WindowSet, config_hash: str) -> None:
    meta = {"kind": "windows", "window_len": ws.spec.window_len, "stride": ws.spec.stride,
            "groups": list(ws.groups), "config_hash": config_hash}
    container.save(path, [("windows", ws.windows), ("labels", _label_array(ws)),
                          ("sources", ws.sources.astype(np.float64))], meta)


def load_windows(path: Path) -> WindowSet:
    tensors, meta = container.load(path)
    if meta.get("kind") != "windows":
        raise ContainerError(f"{path} is not a windows archive")
    t = dict(tensors)
    spec = WindowSpec(int(meta["window_len"]), int(meta["stride"]))
    windows = t["windows"].reshape(-1, spec.window_len)
    if len(windows) == 0:
        raise EmptyWindowSetError(f"{path} holds no windows")
    labels = tuple(Condition.from_index(int(i)) for i in t["labels"])
    return WindowSet(windows, labels, spec, t["sources"].astype(np.int64), tuple(meta["groups"]))


def save_images(path: Path, images: GafImageSet, config_hash: str) -> None:
    ws = images.windows
    meta = {"kind": "gaf", "gaf_kind": images.kind.value, "paa_size": images.paa_size,
            "window_len": ws.spec.window_len, "stride": ws.spec.stride, "groups": list(ws.groups),
            "config_hash": config_hash}
    container.save(path, [("images", images.images), ("labels", _label_array(ws)),
                          ("sources", ws.sources.astype(np.float64)),
                          ("degenerate", images.degenerate.astype(np.float64))], meta)


def _segment_all(cfg: RunConfig, series, specs, errors: RunErrors) -> dict[WindowSpec, WindowSet]:
    out = {}
    for spec in specs:
        try:
            out[spec] = segment(series, spec)
        except BvpError as exc:
            errors.add(f"segment {spec.tag}", exc)
    return out


def cmd_segment(cfg: RunConfig, errors: RunErrors) -> None:
    series = load_series(cfg)
    specs = cfg.specs()
    sets = _segment_all(cfg, series, specs, errors)
    if not sets:
        raise EmptyWindowSetError("no window spec produced any windows")
    rows = []
    for spec, ws in sets.items():
        save_windows(cfg.out / f"windows_{spec.tag}.bvpt", ws, cfg.hash())
        counts = {c.value: ws.labels.count(c) for c in CONDITIONS}
        rows.append({"window_len": spec.window_len, "stride": spec.stride,
                     "effective_length": spec.effective_length, "windows": len(ws), **counts})
        print(f"{spec.tag}: {len(ws)} windows, effective length {spec.effective_length:g}")
        for note in ws.warnings:
            print(f"  warning: {note}")
    write_csv(cfg.out / "segment_summary.csv",
              ["window_len", "stride", "effective_length", "windows", *[c.value for c in CONDITIONS]], rows, cfg.hash())


def cmd_encode(cfg: RunConfig, errors: RunErrors) -> None:
    enc = cfg["encoding"]
    kind = GafKind(enc["kind"])
    sets = _window_sets(cfg, cfg.specs(), errors)
    rows = []
    for spec, ws in sets.items():
        images = encode_windows(ws, kind, enc["paa_size"], cfg["windowing"]["rescale_scope"])
        save_images(cfg.out / f"gaf_{kind.value}_{spec.tag}.bvpt", images, cfg.hash())
        rows.append({"window_len": spec.window_len, "stride": spec.stride, "kind": kind.value,
                     "image_size": images.images.shape[1], "images": len(images),
                     "degenerate": int(images.degenerate.sum())})
        examples, titles = [], []
        for c in CONDITIONS:
            idx = [i for i, lab in enumerate(ws.labels) if lab is c]
            if idx:
                examples.append(images.images[idx[0]])
                titles.append(c.value)
        plotting.gaf_gallery(cfg.out / f"gaf_{kind.value}_{spec.tag}.svg", examples, titles, cfg.deterministic)
        print(f"{spec.tag}: {len(images)} {kind.value.upper()} images of size {images.images.shape[1]}")
    write_csv(cfg.out / "encode_summary.csv",
              ["window_len", "stride", "kind", "image_size", "images", "degenerate"], rows, cfg.hash())


def _window_sets(cfg: RunConfig, specs, errors: RunErrors) -> dict[WindowSpec, WindowSet]:
    """Windows per spec, from archives when configured, else from the input."""
    archives = cfg["train"]["archives"]
    if archives is None:
        sets = _segment_all(cfg, load_series(cfg), specs, errors)
    else:
        root = cfg.resolve(archives)
        sets = {}
        for spec in specs:
            path = root / f"windows_{spec.tag}.bvpt"
            if not path.exists():
                errors.add(f"archive {spec.tag}", FileNotFoundError(f"{path} not found"))
                continue
            sets[spec] = load_windows(path)
    if not sets:
        raise EmptyWindowSetError("no windows available for any spec")
    return sets


def cmd_stationarity(cfg: RunConfig, errors: RunErrors) -> None:
    st = cfg["stationarity"]
    series = load_series(cfg, st["baseline_wander"])
    rows = []
    for c in CONDITIONS:
        parts = [s.samples for s in series if s.condition is c]
        row = {"condition": c.value, "n": sum(p.size for p in parts)}
        if not parts:
            row["status"] = "missing"
            errors.add(f"stationarity {c.value}", BvpError(f"no series for condition {c.value}"))
            rows.append(row)
            continue
        try:
            rep = stationarity_report(np.concatenate(parts), st["alpha"], st["adf_regression"],
                                      st["adf_max_lag"], st["kpss_lags"])
        except BvpError as exc:
            row["status"] = "degenerate"
            errors.add(f"stationarity {c.value}", exc)
            rows.append(row)
            continue
        row.update(
            adf_statistic=rep.adf.statistic, adf_p=rep.adf.p_value, adf_p_bound=rep.adf.p_is_bound,
            adf_lags=rep.adf.lags, kpss_statistic=rep.kpss.statistic, kpss_p=rep.kpss.p_value,
            kpss_p_bound=rep.kpss.p_is_bound, kpss_trend_p=rep.kpss_trend.p_value,
            classification=rep.classification.value, status="ok",
        )
        rows.append(row)
        print(f"{c.value}: ADF p={rep.adf.p_value:.3g}{'(bound)' if rep.adf.p_is_bound else ''} "
              f"KPSS p={rep.kpss.p_value:.3g}{'(bound)' if rep.kpss.p_is_bound else ''} -> {rep.classification.value}")
    header = ["condition", "n", "adf_statistic", "adf_p", "adf_p_bound", "adf_lags", "kpss_statistic", "kpss_p",
              "kpss_p_bound", "kpss_trend_p", "classification", "status"]
    write_csv(cfg.out / "stationarity.csv", header, rows, cfg.hash())
    table = [["ADF", *[r.get("adf_p") for r in rows]], ["KPSS", *[r.get("kpss_p") for r in rows]]]
    write_csv(cfg.out / "stationarity_table.csv", ["test", *[c.value for c in CONDITIONS]], table, cfg.hash())


def cmd_anova(cfg: RunConfig, errors: RunErrors) -> None:
    an = cfg["anova"]
    alpha = float(an["alpha"])
    src = an["scores"]
    if src is None or src == "demo":
        table = demo_score_table()
        (cfg.out / "demo_scores.csv").write_text(dump_score_table(table), encoding="utf-8")
    else:
        table = read_score_table(cfg.resolve(src))
    feat_rows, effect_rows, exp_rows = [], [], []
    for f in FEATURES:
        if not table.select(f):
            continue
        res = feature_condition_analysis(table, f, alpha)
        feat_rows.append({
            "feature": f.value, "variance_p": res.variance_test.test.p_value, "method": res.method.value,
            "f_statistic": res.f_statistic, "df_between": res.df_between, "df_within": res.df_within,
            "anova_p": res.p_value, "significant": res.significant, "ordering": format_ordering(res),
        })
        effect_rows.extend({"feature": f.value, "group": g.key.value, "mean": g.mean} for g in res.group_stats)
        print(f"{f.value}: {res.method.value} p={res.p_value:.3g} {format_ordering(res)}")
        for c in CONDITIONS:
            row = {"feature": f.value, "condition": c.value}
            try:
                e = experience_analysis(table, f, c, alpha)
                row.update(variance_p=e.variance_test.test.p_value, method=e.method.value, anova_p=e.p_value,
                           significant=e.significant, ordering=format_ordering(e), status="ok")
            except BvpError as exc:
                row["status"] = "error"
                errors.add(f"experience {f.value}/{c.value}", exc)
            exp_rows.append(row)
    if not feat_rows:
        raise BvpError("score table contains no rows")
    write_csv(cfg.out / "anova_features.csv",
              ["feature", "variance_p", "method", "f_statistic", "df_between", "df_within", "anova_p",
               "significant", "ordering"], feat_rows, cfg.hash())
    write_csv(cfg.out / "anova_experience.csv",
              ["feature", "condition", "variance_p", "method", "anova_p", "significant", "ordering", "status"],
              exp_rows, cfg.hash())
    plotting.main_effects(cfg.out / "main_effects.svg", effect_rows, cfg.deterministic)


def _train_config(cfg: RunConfig, seed: int) -> TrainConfig:
    t = cfg["train"]
    return TrainConfig(float(t["learning_rate"]), int(t["batch_size"]), int(t["epochs"]), tuple(t["split"]),
                       t["split_mode"], seed, bool(t["standardize"]), t["patience"])


def _run_cell(task):
    """Train one (variant, spec) cell; runs in a worker process when jobs > 1."""
    variant, spec, data, model_cfg, train_cfg = task
    model, report = train(model_cfg, train_cfg, data)
    return model.named_params(), report


def _sweep_cells(cfg: RunConfig, errors: RunErrors):
    variants = [Variant(v) for v in cfg["train"]["variants"]]
    specs_by_variant = {v: cfg.specs(v.value) for v in variants}
    all_specs = list(dict.fromkeys(s for v in variants for s in specs_by_variant[v]))
    sets = _window_sets(cfg, all_specs, errors)
    enc = cfg["encoding"]
    cells = []
    for v in variants:
        for spec in specs_by_variant[v]:
            if spec not in sets:
                continue
            ws = sets[spec]
            seed = cfg.seed ^ len(cells)
            if v is Variant.RAW_1D:
                data, size = ws, spec.window_len
            else:
                data = encode_windows(ws, enc["kind"], enc["paa_size"], cfg["windowing"]["rescale_scope"])
                size = data.images.shape[1]
            cells.append((v, spec, data, ModelConfig(v, size, seed=seed), _train_config(cfg, seed)))
    return cells


def cmd_train_sweep(cfg: RunConfig, errors: RunErrors) -> list[dict]:
    cells = _sweep_cells(cfg, errors)
    jobs = int(cfg["train"]["jobs"])
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            futures = [pool.submit(_run_cell, c) for c in cells]
            outcomes = []
            for f in futures:
                try:
                    outcomes.append(f.result())
                except Exception as exc:  # noqa: BLE001 - recorded per cell
                    outcomes.append(exc)
    else:
        outcomes = []
        for c in cells:
            try:
                outcomes.append(_run_cell(c))
            except BvpError as exc:
                outcomes.append(exc)
    summary = []
    for (variant, spec, data, model_cfg, _), outcome in zip(cells, outcomes):
        name = f"{variant.value}_{spec.tag}"
        row = {"variant": variant.value, "window_len": spec.window_len, "stride": spec.stride,
               "effective_length": spec.effective_length, "samples": len(data), "test_accuracy": None}
        if isinstance(outcome, Exception):
            errors.add(f"train {name}", outcome)
            row["status"] = "failed"
            summary.append(row)
            continue
        params, report = outcome
        model = build_model(model_cfg, init=False)
        model.set_params([p for _, p in params])
        container.save(cfg.out / f"model_{name}.bvpt", model.named_params(),
                       {"kind": "model", "model_config": model_cfg.to_dict(), "config_hash": cfg.hash()})
        curves = [[i + 1, a, b, c] for i, (a, b, c) in
                  enumerate(zip(report.train_accuracy, report.val_accuracy, report.train_loss))]
        write_csv(cfg.out / f"curves_{name}.csv", ["epoch", "train_accuracy", "val_accuracy", "train_loss"],
                  curves, cfg.hash())
        plotting.accuracy_curves(cfg.out / f"curves_{name}.svg", report.train_accuracy, report.val_accuracy,
                                 f"{variant.value} p={spec.window_len}, j={spec.stride}", report.test_accuracy,
                                 cfg.deterministic)
        train_n, val_n, test_n = report.split_sizes
        row.update(train=train_n, val=val_n, test=test_n, epochs=report.epochs_run,
                   final_train_accuracy=report.train_accuracy[-1], final_val_accuracy=report.val_accuracy[-1],
                   test_accuracy=report.test_accuracy, status="ok")
        summary.append(row)
        log.info("%s: %.1f s", name, report.wall_seconds)
        print(f"{name}: effective length {spec.effective_length:g}, test accuracy {report.test_accuracy:.4f}")
    write_csv(cfg.out / "sweep_summary.csv",
              ["variant", "window_len", "stride", "effective_length", "samples", "train", "val", "test", "epochs",
               "final_train_accuracy", "final_val_accuracy", "test_accuracy", "status"], summary, cfg.hash())
    plotting.accuracy_vs_effective_length(cfg.out / "accuracy_vs_effective_length.svg",
                                          [r for r in summary if r["status"] == "ok"], cfg.deterministic)
    return summary


def cmd_demo(cfg: RunConfig, errors: RunErrors) -> None:
    """Whole synthetic pipeline: segment, encode, stationarity, ANOVA and both sweeps."""
    out = cfg.out
    steps = [
        ("segment", cmd_segment, {"windowing": {"specs": [list(s) for s in RAW_SWEEP]}}),
        ("encode", cmd_encode, {"windowing": {"specs": [list(s) for s in GAF_SWEEP]}}),
        ("stationarity", cmd_stationarity, {}),
        ("anova", cmd_anova, {}),
        ("train-sweep", cmd_train_sweep, {}),
    ]
    for name, fn, over in steps:
        sub = RunConfig(_deep_update(cfg.data, over), cfg.base_dir)
        sub.data["out"] = str(out / name)
        sub.out.mkdir(parents=True, exist_ok=True)
        print(f"== {name}")
        fn(sub, errors)


def _deep_update(base: dict, over: dict) -> dict:
    out = json.loads(json.dumps(base))
    for k, v in over.items():
        out[k] = _deep_update(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out


COMMANDS = {
    "segment": cmd_segment,
    "encode": cmd_encode,
    "stationarity": cmd_stationarity,
    "anova": cmd_anova,
    "train-sweep": cmd_train_sweep,
    "demo": cmd_demo,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bvpgaf", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML run configuration")
    common.add_argument("--seed", type=int, help="global seed (overrides config)")
    common.add_argument("--out", type=Path, help="output directory (overrides config)")
    common.add_argument("--deterministic", action="store_true", default=None,
                        help="suppress timestamps in figures so reruns are byte-identical")
    common.add_argument("--manifest", help="session manifest CSV instead of synthetic input")
    common.add_argument("--window", type=int, action="append", metavar="P",
                        help="window length; pair each with --stride (repeatable)")
    common.add_argument("--stride", type=int, action="append", metavar="J")
    common.add_argument("--scores", help="score table CSV for the anova command ('demo' for the bundled table)")
    common.add_argument("--epochs", type=int, help="training epochs per sweep cell")
    common.add_argument("--variant", action="append", choices=["raw1d", "gaf2d"], help="restrict sweep variants")
    common.add_argument("--archives", help="directory of windows archives for train-sweep")
    common.add_argument("--jobs", type=int, help="parallel sweep cells")
    common.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=(COMMANDS[name].__doc__ or name).splitlines()[0])
    return parser


def _overrides(args) -> dict:
    o: dict = {}
    if args.seed is not None:
        o["seed"] = args.seed
    if args.out is not None:
        o["out"] = str(args.out)
    if args.deterministic:
        o["deterministic"] = True
    if args.manifest is not None:
        o.setdefault("input", {})["manifest"] = str(Path(args.manifest).resolve())
    if args.window or args.stride:
        if len(args.window or []) != len(args.stride or []):
            raise BvpError("--window and --stride must be given the same number of times")
        specs = [[p, j] for p, j in zip(args.window, args.stride)]
        o["windowing"] = {"specs": specs}
        o["train"] = {"raw1d": {"specs": specs}, "gaf2d": {"specs": specs}}
    if args.scores is not None:
        o["anova"] = {"scores": args.scores if args.scores == "demo" else str(Path(args.scores).resolve())}
    train_over = o.setdefault("train", {})
    if args.epochs is not None:
        train_over["epochs"] = args.epochs
    if args.variant:
        train_over["variants"] = args.variant
    if args.archives is not None:
        train_over["archives"] = str(Path(args.archives).resolve())
    if args.jobs is not None:
        train_over["jobs"] = args.jobs
    if not train_over:
        o.pop("train")
    return o


def demo_overrides() -> dict:
    """Settings that turn a plain config into the demo run."""
    return {
        "stationarity": {"baseline_wander": 0.1},
        "anova": {"scores": "demo"},
    }


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        over = _overrides(args)
        if args.command == "demo":
            cfg = load_config(args.config, _deep_update(demo_overrides(), over))
        else:
            cfg = load_config(args.config, over)
        cfg.out.mkdir(parents=True, exist_ok=True)
        errors = RunErrors()
        COMMANDS[args.command](cfg, errors)
    except (BvpError, OSError) as exc:
        print(f"bvpgaf {args.command}: error: {exc}", file=sys.stderr)
        return 1
    errors.write(cfg.out)
    if errors:
        print(f"bvpgaf {args.command}: {len(errors.items)} row-level error(s); see {cfg.out / 'errors.json'}",
              file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
