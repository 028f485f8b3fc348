"""``trajauth`` command line: synth, ingest, build-windows, train, eval, sweep, report.

Exit codes: 0 ok, 1 configuration or input error, 2 partial sweep failure,
3 numerical abort.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import GRIDS, PRESETS, VARIANTS, expand_variant
from .errors import ConfigError, DataError, NumericalError, ParseError
from .ingest import Corpus, ingest_manifest
from .runconfig import RunConfig, load_run_config, parse_grid
from .synth import generate_corpus, generate_raw, write_dataset
from .train_eval.reference import PUBLISHED_EER, PUBLISHED_EER_AVG
from .train_eval.report import eer_rows, render_eer_csv, write_report
from .train_eval.sweep import CellResult, SweepResult, sweep
from .train_eval.training import (
    ExperimentSpec,
    eval_user,
    load_bundle,
    save_bundle,
    train_user,
    windows_code,
    write_training_log,
)
from .windows import dump_csv, load_window_set, save_window_set, session_split

log = logging.getLogger("trajauth")

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL, EXIT_NUMERICAL = 0, 1, 2, 3


class CLIError(Exception):
    def __init__(self, msg: str, code: int = EXIT_CONFIG):
        super().__init__(msg)
        self.code = code


# ---------------------------------------------------------------------------
# helpers


def _run_config(args) -> RunConfig:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.preset is not None:
        cfg.preset = args.preset
    if getattr(args, "corpus", None):
        cfg.corpus = args.corpus
    if getattr(args, "synthetic", None) is not None:
        cfg.synthetic_users = args.synthetic
        if args.synthetic_seed is not None:
            cfg.synthetic_seed = args.synthetic_seed
    if getattr(args, "grid", None):
        cfg.grid = parse_grid(args.grid, "--grid")
    if getattr(args, "variant", None):
        cfg.variants = tuple(expand_variant(v) for v in args.variant)
    if getattr(args, "workers", None) is not None:
        cfg.workers = args.workers
    if getattr(args, "users", None):
        cfg.users = tuple(args.users)
    t = cfg.train
    for name, attr in (("epochs", "epochs"), ("batch_size", "batch_size"), ("lr", "lr"), ("lam", "lam"), ("stride", "stride")):
        v = getattr(args, name, None)
        if v is not None:
            setattr(t, attr, v)
    return cfg


def _spec(cfg: RunConfig, variant: str, w: int, w_in: int) -> ExperimentSpec:
    t = cfg.train
    return ExperimentSpec(
        variant, w, w_in, stride=t.stride, seed=cfg.seed, epochs=t.epochs,
        batch_size=t.batch_size, lr=t.lr, lam=t.lam, preset=cfg.preset,
    )


def load_corpus(cfg: RunConfig) -> Corpus:
    if cfg.corpus:
        path = Path(cfg.corpus)
        if not path.exists():
            raise CLIError(f"corpus path does not exist: {path}")
        if path.suffix == ".npz":
            return Corpus.load(path)
        return ingest_manifest(path)
    if cfg.synthetic_users is not None:
        return generate_corpus(cfg.synthetic_users, cfg.synthetic_seed)
    raise CLIError("no corpus given: pass --corpus PATH or --synthetic N")


def _out(args, default=".") -> Path:
    out = Path(args.out if args.out is not None else default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _users(cfg: RunConfig, available) -> list[str]:
    if not cfg.users:
        return list(available)
    missing = [u for u in cfg.users if u not in available]
    if missing:
        raise CLIError(f"unknown user {missing[0]!r}; corpus has {list(available)}")
    return list(cfg.users)


def _single_pair(cfg: RunConfig, args) -> tuple[int, int]:
    if args.w is not None and args.w_in is not None:
        return parse_grid([[args.w, args.w_in]], "--w/--w-in")[0]
    if args.w is not None or args.w_in is not None:
        raise CLIError("--w and --w-in must be given together")
    return cfg.grid[0]


def _cell_to_json(c: CellResult) -> dict:
    return {
        "variant": c.variant, "w": c.w, "w_in": c.w_in, "user": c.user,
        "forecast_mse": None if np.isnan(c.forecast_mse) else c.forecast_mse,
        "eer": None if np.isnan(c.eer) else c.eer,
        "threshold": None if np.isnan(c.threshold) else c.threshold,
        "genuine_scores": c.genuine_scores.tolist(), "impostor_scores": c.impostor_scores.tolist(),
        "notes": c.notes, "error": c.error, "numerical": c.numerical,
    }


def _cell_from_json(d: dict) -> CellResult:
    nan = float("nan")
    return CellResult(
        d["variant"], d["w"], d["w_in"], d["user"],
        nan if d["forecast_mse"] is None else d["forecast_mse"],
        nan if d["eer"] is None else d["eer"],
        nan if d["threshold"] is None else d["threshold"],
        np.asarray(d["genuine_scores"], dtype=np.float64), np.asarray(d["impostor_scores"], dtype=np.float64),
        d["notes"], d["error"], d["numerical"],
    )


# ---------------------------------------------------------------------------
# commands


def cmd_synth(args) -> int:
    seed = args.seed if args.seed is not None else 0
    out = _out(args, "synthetic")
    raw = generate_raw(args.users, seed, noise_scale=args.noise)
    path = write_dataset(raw, out, args.layout)
    print(f"wrote {len({r.user_id for r in raw})} users, {len(raw)} trials; manifest {path}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    src = Path(args.path)
    if not src.exists():
        raise CLIError(f"corpus path does not exist: {src}")
    corpus = ingest_manifest(src)
    out = _out(args, src if src.is_dir() else src.parent)
    dst = out / "corpus.npz"
    corpus.save(dst)
    print(f"ingested {len(corpus.users)} users, {len(corpus.trials)} trials -> {dst} (digest {corpus.digest()[:16]})")
    return EXIT_OK


def cmd_build_windows(args) -> int:
    cfg = _run_config(args)
    corpus = load_corpus(cfg)
    w, w_in = _single_pair(cfg, args)
    variant = cfg.variants[0]
    stride = cfg.train.stride or PRESETS[cfg.preset].stride
    root = _out(args) / "windows"
    for user in _users(cfg, corpus.users):
        train, test = session_split(corpus, user, w, w_in, stride, cfg.seed, windows_code(variant))
        d = root / user
        d.mkdir(parents=True, exist_ok=True)
        for name, ws in (("train", train), ("test", test)):
            ws.meta = {"variant": variant, "corpus_digest": corpus.digest()[:16]}
            save_window_set(ws, d / f"{name}.taws")
            if args.dump_csv:
                dump_csv(ws, d / f"{name}.csv")
        print(f"{user}: {len(train)} train / {len(test)} test windows (w={w}, w_in={w_in}, stride={stride})")
    return EXIT_OK


def _window_dir(args) -> Path:
    root = Path(args.windows) if args.windows else Path(args.out or ".") / "windows"
    if not root.is_dir() or not any(root.glob("*/train.taws")):
        raise CLIError(f"no window sets under {root}; run build-windows first")
    return root


def cmd_train(args) -> int:
    cfg = _run_config(args)
    root = _window_dir(args)
    available = sorted(p.parent.name for p in root.glob("*/train.taws"))
    models = _out(args) / "models"
    models.mkdir(exist_ok=True)
    for user in _users(cfg, available):
        ws = load_window_set(root / user / "train.taws")
        variant = cfg.variants[0] if args.variant else ws.meta.get("variant", cfg.variants[0])
        spec = _spec(cfg, variant, ws.w, ws.w_in)
        try:
            result = train_user(spec, ws)
        except NumericalError as exc:
            raise CLIError(f"{user}: {exc}", EXIT_NUMERICAL) from None
        save_bundle(models / f"{user}.tack", result, spec, {"user": user})
        write_training_log(models / f"{user}.log.jsonl", result.log)
        print(f"{user}: {result.steps} steps, final loss {result.log[-1]['loss']:.5f}")
    return EXIT_OK


def cmd_eval(args) -> int:
    ckpt = Path(args.checkpoint)
    if not ckpt.exists():
        raise CLIError(f"checkpoint not found: {ckpt}")
    traj, auth, meta = load_bundle(ckpt)
    user = meta.get("user") or args.user
    if not user:
        raise CLIError(f"{ckpt}: bundle does not record a user; pass --user")
    test_path = _window_dir(args) / user / "test.taws"
    if not test_path.exists():
        raise CLIError(f"no test windows for {user}: {test_path}")
    row = eval_user(traj, auth, load_window_set(test_path), meta["spec"]["variant"])
    rec = {
        "user": user, "variant": row.variant, "w": row.w, "w_in": row.w_in,
        "forecast_mse": row.forecast_mse, "eer": row.eer, "threshold": row.threshold, "notes": row.notes,
    }
    out = _out(args) / "eval"
    out.mkdir(exist_ok=True)
    (out / f"{user}.json").write_text(json.dumps(rec, indent=2, sort_keys=True) + "\n")
    print(f"{user}: eer {row.eer:.4f}  mse {row.forecast_mse:.4f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _run_config(args)
    corpus = load_corpus(cfg)
    users = _users(cfg, corpus.users)
    workers = cfg.workers or os.cpu_count() or 1
    base = _spec(cfg, cfg.variants[0], *cfg.grid[0])
    result = sweep(corpus, cfg.grid, cfg.variants, base, users, workers)
    out = _out(args, "report")
    (out / "run_config.yaml").write_text(cfg.to_yaml())
    with open(out / "cells.json", "w") as fh:
        json.dump(
            {
                "config_digest": cfg.digest(), "corpus_digest": corpus.digest(),
                "grid": [list(g) for g in result.grid], "variants": list(result.variants),
                "users": list(result.users), "base": base.to_dict(),
                "cells": [_cell_to_json(c) for c in result.cells],
            },
            fh, sort_keys=True,
        )
    write_report(result, out, cfg.digest(), corpus.digest())
    ok = len(result.cells) - len(result.failed)
    print(f"sweep: {ok}/{len(result.cells)} cells ok; report in {out}")
    if result.failed:
        for c in result.failed:
            print(f"  failed {c.variant} {c.w}/{c.w_in} {c.user}: {c.error}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_report(args) -> int:
    out = _out(args, "report")
    if args.published:
        body, avg = eer_rows(PUBLISHED_EER)
        (out / "published_eer_summary.csv").write_text(render_eer_csv(PUBLISHED_EER, VARIANTS, "{:.4f}"))
        gap = max(abs(a - b) for a, b in zip(avg, PUBLISHED_EER_AVG))
        print(f"published table re-rendered; max |AVG - printed AVG| = {gap:.5f}")
        return EXIT_OK
    src = Path(args.source) / "cells.json" if args.source else out / "cells.json"
    if not src.exists():
        raise CLIError(f"no sweep results at {src}; run sweep first")
    doc = json.loads(src.read_text())
    base = ExperimentSpec(**doc["base"])
    result = SweepResult(
        [_cell_from_json(c) for c in doc["cells"]],
        tuple(tuple(g) for g in doc["grid"]), tuple(doc["variants"]), tuple(doc["users"]), base,
    )
    write_report(result, out, doc["config_digest"], doc["corpus_digest"])
    print(f"report written to {out}")
    return EXIT_PARTIAL if result.failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="global seed (default 0)")
    p.add_argument("--config", default=None, help="YAML run configuration")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)
    p.add_argument("-v", "--verbose", action="store_true")


def _corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", default=None, help="corpus.npz, manifest.yaml or a dataset directory")
    p.add_argument("--synthetic", type=int, default=None, metavar="N", help="use an N-user synthetic corpus")
    p.add_argument("--synthetic-seed", type=int, default=None)
    p.add_argument("--users", nargs="+", default=None, help="restrict to these user ids")


def _train_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", action="append", default=None, help=f"one of {VARIANTS} or a bare joint code")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--stride", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trajauth", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"trajauth {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic keypoint/controller dataset")
    _common(p)
    p.add_argument("--users", type=int, default=4)
    p.add_argument("--noise", type=float, default=0.03)
    p.add_argument("--layout", default="body25")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="parse a dataset manifest into corpus.npz")
    _common(p)
    p.add_argument("path", help="dataset directory or manifest.yaml")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-windows", help="cut session-1/2 window sets per user")
    _common(p)
    _corpus_args(p)
    p.add_argument("--variant", action="append", default=None)
    p.add_argument("--w", type=int, default=None)
    p.add_argument("--w-in", dest="w_in", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--dump-csv", action="store_true", help="also write one CSV per window set")
    p.set_defaults(func=cmd_build_windows)

    p = sub.add_parser("train", help="train one model pair per user on session-1 windows")
    _common(p)
    _train_args(p)
    p.add_argument("--windows", default=None, help="window directory (default OUT/windows)")
    p.add_argument("--users", nargs="+", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained bundle on session-2 windows")
    _common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--windows", default=None)
    p.add_argument("--user", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="train and evaluate every (variant, w, w_in, user) cell")
    _common(p)
    _corpus_args(p)
    _train_args(p)
    p.add_argument("--grid", default=None, choices=sorted(GRIDS))
    p.add_argument("--workers", type=int, default=None, help="parallel jobs (default: logical cores)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="re-render reports from a sweep, or the published table")
    _common(p)
    p.add_argument("--from", dest="source", default=None, help="sweep output directory")
    p.add_argument("--published", action="store_true", help="render the published EER table and re-derive AVG")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
