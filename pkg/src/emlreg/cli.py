"""Command-line front end: benchmarking, bandwidth sweeps, real-data runs.

Subcommands
  bench            scenario benchmark over losses -> bench.csv
  sweep-bandwidth  EML benchmark across neighborhood proportions -> sweep.csv
  realdata         CSV ingestion, repeated 4:1 splits, warm-started losses -> realdata.csv (+ qq.csv)
  train            fit one model on a CSV and save a checkpoint
  evaluate         prediction error of a checkpoint on a CSV

Every command writes a run manifest (JSON) next to its outputs; passing a
manifest back as --config replays the run and reproduces the numeric
outputs bitwise. The EMLREG_SEED environment variable overrides the
configured seed. Exit status: 0 success, 2 usage error, 1 runtime error.
"""

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .kde import Fixed, KnnProportion
from .losses import EML, LAD, LS, Cauchy, Huber, Tukey
from .neuralnet import MlpConfig
from .numerics import RngState
from .simbench import (
    Dataset,
    ErrorKind,
    ScenarioConfig,
    compute_bias_sd_rmse,
    generate_scenario,
    prediction_error,
    residual_qq_data,
    sample_errors,
    target_values,
)
from .trainer import TrainConfig, fine_tune, load_checkpoint, save_checkpoint, train

__all__ = ["main", "ingest_csv", "SplitSpec", "UsageError"]


class UsageError(ValueError):
    """Bad command-line input; maps to exit status 2."""


LOSS_NAMES = ("LS", "LAD", "Huber", "Cauchy", "Tukey", "EML")

# Stream allocation under the master seed (simbench uses 0..R for data):
# per-replication training seeds, held-out test sets, and split shuffles
# live in disjoint high ranges.
_TRAIN_SEED_BASE = 100_000
_TEST_STREAM_BASE = 200_000
_SPLIT_STREAM_BASE = 300_000


@dataclass(frozen=True)
class SplitSpec:
    """Repeated random train/test split recipe for real-data runs."""

    train_fraction: float = 0.8
    repeats: int = 50
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


def make_loss(name, eml_cfg):
    """Loss instance from its CLI name; EML takes bandwidth options."""
    if name == "LS":
        return LS()
    if name == "LAD":
        return LAD()
    if name == "Huber":
        return Huber()
    if name == "Cauchy":
        return Cauchy()
    if name == "Tukey":
        return Tukey()
    if name == "EML":
        if eml_cfg.get("fixed_h") is not None:
            bw = Fixed(float(eml_cfg["fixed_h"]))
        else:
            bw = KnnProportion(float(eml_cfg.get("v", 0.3)))
        return EML(bandwidth=bw, clamp=float(eml_cfg.get("clamp", 1e-5)))
    raise UsageError(f"unknown loss {name!r}; valid names: {', '.join(LOSS_NAMES)}")


def _train_seed(master_seed, replication):
    # Shared across losses so every method sees the same init and dropout.
    ss = np.random.SeedSequence(entropy=(int(master_seed), _TRAIN_SEED_BASE, int(replication)))
    return int(ss.generate_state(1)[0])


def ingest_csv(path, response, standardize_response=False):
    """Load a numeric CSV with a header row into a Dataset.

    Predictor columns are z-scored with population SD (divisor n); the
    response is left as-is unless standardize_response. Returns
    (Dataset, feature_names, standardization dict).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise UsageError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if response not in header:
            raise UsageError(f"{path}: response column {response!r} not found in header")
        rows = []
        for irow, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: row {irow} has {len(row)} cells, expected {len(header)}")
            vals = []
            for icol, cell in enumerate(row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric cell at row {irow}, column {header[icol]!r}: {cell!r}"
                    ) from None
            rows.append(vals)
    data = np.asarray(rows, dtype=np.float64)
    yidx = header.index(response)
    y = data[:, yidx]
    X = np.delete(data, yidx, axis=1)
    names = [h for i, h in enumerate(header) if i != yidx]

    means = X.mean(axis=0)
    sds = X.std(axis=0)  # population SD, divisor n
    for i, s in enumerate(sds):
        if s == 0.0:
            raise ValueError(f"{path}: degenerate (constant) predictor column {names[i]!r}")
    X = (X - means) / sds
    std_info = {
        "predictors": names,
        "means": means.tolist(),
        "sds": sds.tolist(),
        "response_standardized": bool(standardize_response),
    }
    if standardize_response:
        y_mean, y_sd = float(y.mean()), float(y.std())
        if y_sd == 0.0:
            raise ValueError(f"{path}: degenerate (constant) response column {response!r}")
        y = (y - y_mean) / y_sd
        std_info["response_mean"] = y_mean
        std_info["response_sd"] = y_sd
    return Dataset(X=X, Y=y), names, std_info


# --------------------------------------------------------------------------
# Config and manifest handling


def load_config(path):
    """Read a JSON config; accepts a previously written manifest too."""
    with open(path) as fh:
        doc = json.load(fh)
    if "command" in doc and "config" in doc:  # manifest replay
        return doc["config"]
    return doc


def resolve_config(args, defaults):
    """Merge defaults, config file, env seed, and CLI flag overrides."""
    cfg = dict(defaults)
    if getattr(args, "config", None):
        cfg.update(load_config(args.config))
    for key in ("seed", "jobs", "repeats", "epochs", "response"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "loss", None):
        cfg["losses"] = [s.strip() for s in args.loss.split(",") if s.strip()]
    if getattr(args, "v", None):
        cfg["v_values"] = [float(s) for s in args.v.split(",") if s.strip()]
    env_seed = os.environ.get("EMLREG_SEED")
    if env_seed is not None:
        cfg["seed"] = int(env_seed)
    return cfg


def write_manifest(out_dir, command, cfg, started_at, finished_at):
    manifest = {
        "command": command,
        "config": cfg,
        "master_seed": cfg.get("seed", 0),
        "tool_version": __version__,
        "started_at": started_at,
        "finished_at": finished_at,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
    return path


def _write_csv(path, headers, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(headers)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _now():
    import datetime

    return datetime.datetime.now(datetime.timezone.utc).isoformat()


# --------------------------------------------------------------------------
# Scenario plumbing shared by bench and sweep


_ERROR_NAMES = {
    "normal": ErrorKind.NORMAL_STD,
    "mixture": ErrorKind.MIXTURE_GAUSS,
    "t2": ErrorKind.STUDENT_T2,
    "hetero": ErrorKind.HETERO,
}

BENCH_DEFAULTS = {
    "p": 5,
    "d": 100,
    "n": 256,
    "error": "normal",
    "n_grid": 2048,
    "replications": 100,
    "seed": 0,
    "losses": ["LS", "LAD", "Huber", "Cauchy", "Tukey", "EML"],
    "eml": {"v": 0.3, "clamp": 1e-5},
    "epochs": None,
    "min_epochs": 1000,
    "max_epochs": 5000,
    "learning_rate": 3e-4,
    "dropout_rate": 0.01,
    "hidden_widths": [256, 256, 256],
    "jobs": 1,
    "test_size": None,
    "scale_is_variance": True,
}


def _scenario_from_cfg(cfg):
    error = cfg["error"]
    if isinstance(error, str):
        if error not in _ERROR_NAMES:
            raise UsageError(f"unknown error kind {error!r}; valid: {', '.join(_ERROR_NAMES)}")
        error = _ERROR_NAMES[error]
    return ScenarioConfig(
        p=int(cfg["p"]),
        d=int(cfg["d"]),
        n=int(cfg["n"]),
        error=error,
        n_grid=int(cfg["n_grid"]),
        replications=int(cfg["replications"]),
        master_seed=int(cfg["seed"]),
        scale_is_variance=bool(cfg.get("scale_is_variance", True)),
    )


def _train_cfg_from_cfg(cfg, seed):
    epochs = cfg.get("epochs")
    min_epochs = int(cfg.get("min_epochs", 1000))
    max_epochs = int(cfg.get("max_epochs", 5000))
    if epochs is not None:
        min_epochs = max_epochs = int(epochs)
    return TrainConfig(
        learning_rate=float(cfg.get("learning_rate", 3e-4)),
        min_epochs=min_epochs,
        max_epochs=max_epochs,
        dropout_rate=float(cfg.get("dropout_rate", 0.01)),
        seed=seed,
    )


def _net_from_cfg(cfg, d):
    return MlpConfig(widths=(d, *[int(w) for w in cfg.get("hidden_widths", [256, 256, 256])], 1))


def _bench_one(task):
    """Train one (loss, replication) cell; returns grid predictions and PE."""
    cfg, loss_name, replication, want_pe = task
    scenario = _scenario_from_cfg(cfg)
    loss = make_loss(loss_name, cfg.get("eml", {}))
    train_data, grid = generate_scenario(scenario, replication)
    tcfg = _train_cfg_from_cfg(cfg, _train_seed(scenario.master_seed, replication))
    net = _net_from_cfg(cfg, scenario.d)
    report = train(train_data, loss, net, tcfg)
    from .neuralnet import forward

    preds, _ = forward(report.model, grid.X)
    pe = None
    if want_pe:
        t = int(cfg.get("test_size") or scenario.n_grid)
        test_rng = RngState(scenario.master_seed, _TEST_STREAM_BASE + replication)
        Xt = test_rng.uniform01(t * scenario.d).reshape(t, scenario.d)
        gt = target_values(scenario.p, Xt)
        eps = sample_errors(scenario.error, test_rng, Xt, scenario.scale_is_variance)
        pe = prediction_error(report.model, Dataset(X=Xt, Y=gt + eps))
    return loss_name, replication, preds, pe


def _run_cells(tasks, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_bench_one, tasks))
    else:
        results = [_bench_one(t) for t in tasks]
    results.sort(key=lambda r: (r[0], r[1]))
    return results


def run_bench(cfg, out_dir, want_pe=False):
    """Benchmark every configured loss; returns metric rows."""
    scenario = _scenario_from_cfg(cfg)
    losses = cfg["losses"]
    for name in losses:
        make_loss(name, cfg.get("eml", {}))  # validate names up front
    tasks = [(cfg, name, r, want_pe) for name in losses for r in range(scenario.replications)]
    results = _run_cells(tasks, int(cfg.get("jobs", 1)))

    _, grid = generate_scenario(scenario, 0)
    rows = []
    for name in losses:
        cell = [res for res in results if res[0] == name]
        preds = np.vstack([res[2] for res in cell])
        m = compute_bias_sd_rmse(preds, grid.g_true)
        pes = [res[3] for res in cell if res[3] is not None]
        rows.append(
            {
                "loss": name,
                "p": scenario.p,
                "d": scenario.d,
                "n": scenario.n,
                "error": cfg["error"],
                "replications": scenario.replications,
                "bias": m.bias,
                "sd": m.sd,
                "rmse": m.rmse,
                "pe": float(np.mean(pes)) if pes else None,
            }
        )
    return rows


def cmd_bench(args):
    cfg = resolve_config(args, BENCH_DEFAULTS)
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    started = _now()
    rows = run_bench(cfg, out_dir)
    _write_csv(
        os.path.join(out_dir, "bench.csv"),
        ["loss", "p", "d", "n", "error", "replications", "bias", "sd", "rmse"],
        [
            [r["loss"], r["p"], r["d"], r["n"], r["error"], r["replications"], r["bias"], r["sd"], r["rmse"]]
            for r in rows
        ],
    )
    write_manifest(out_dir, "bench", cfg, started, _now())
    for r in rows:
        print(f"{r['loss']}: bias={r['bias']:.4f} sd={r['sd']:.4f} rmse={r['rmse']:.4f}")
    return 0


SWEEP_DEFAULTS = dict(BENCH_DEFAULTS, v_values=[0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8])


def cmd_sweep_bandwidth(args):
    cfg = resolve_config(args, SWEEP_DEFAULTS)
    v_values = cfg["v_values"]
    for v in v_values:
        if not 0.0 < v <= 1.0:
            raise UsageError(f"bandwidth proportion v={v} outside (0, 1]")
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    started = _now()
    rows = []
    for v in v_values:
        vcfg = dict(cfg, losses=["EML"], eml=dict(cfg.get("eml", {}), v=v, fixed_h=None))
        (res,) = run_bench(vcfg, out_dir, want_pe=True)
        rows.append([float(v), res["bias"], res["sd"], res["rmse"], res["pe"]])
        print(f"v={v}: bias={res['bias']:.4f} sd={res['sd']:.4f} rmse={res['rmse']:.4f} pe={res['pe']:.4f}")
    _write_csv(os.path.join(out_dir, "sweep.csv"), ["v", "bias", "sd", "rmse", "pe"], rows)
    write_manifest(out_dir, "sweep-bandwidth", cfg, started, _now())
    return 0


REALDATA_DEFAULTS = {
    "losses": ["Cauchy", "LS", "LAD", "Huber", "Tukey", "EML"],
    "eml": {"v": 0.3, "clamp": 1e-5},
    "train_fraction": 0.8,
    "repeats": 50,
    "seed": 0,
    "epochs": None,
    "min_epochs": 1000,
    "max_epochs": 5000,
    "learning_rate": 3e-4,
    "fine_tune_learning_rate": 3e-5,
    "dropout_rate": 0.01,
    "hidden_widths": [256, 256, 256],
    "standardize_response": False,
    "jobs": 1,
}


def run_realdata(data, cfg):
    """Repeated-split PEs per loss; the first listed loss trains the base model.

    Returns (rows, qq_pairs) where qq_pairs comes from the EML model's
    training residuals on the last repeat (None when EML is not run).
    """
    from .neuralnet import forward

    losses = cfg["losses"]
    for name in losses:
        make_loss(name, cfg.get("eml", {}))
    if data.n < 10:
        raise ValueError(f"insufficient data: {data.n} rows (need at least 10)")
    split = SplitSpec(
        train_fraction=float(cfg.get("train_fraction", 0.8)),
        repeats=int(cfg.get("repeats", 50)),
        seed=int(cfg.get("seed", 0)),
    )
    net = _net_from_cfg(cfg, data.X.shape[1])
    n_train = int(round(data.n * split.train_fraction))
    n_train = min(max(n_train, 1), data.n - 1)
    pes = {name: [] for name in losses}
    qq_pairs = None
    for rep in range(split.repeats):
        perm = RngState(split.seed, _SPLIT_STREAM_BASE + rep).permutation(data.n)
        tr = Dataset(X=data.X[perm[:n_train]], Y=data.Y[perm[:n_train]])
        te = Dataset(X=data.X[perm[n_train:]], Y=data.Y[perm[n_train:]])
        tcfg = _train_cfg_from_cfg(cfg, _train_seed(split.seed, rep))
        base_loss = make_loss(losses[0], cfg.get("eml", {}))
        base = train(tr, base_loss, net, tcfg).model
        for name in losses:
            loss = make_loss(name, cfg.get("eml", {}))
            report = fine_tune(
                base, tr, loss, net, tcfg,
                learning_rate=float(cfg.get("fine_tune_learning_rate", 3e-5)),
            )
            pes[name].append(prediction_error(report.model, te))
            if name == "EML":
                preds, _ = forward(report.model, tr.X)
                qq_pairs = residual_qq_data(tr.Y - preds)
    rows = [
        {
            "loss": name,
            "repeats": split.repeats,
            "mean_pe": float(np.mean(pes[name])),
            "sd_pe": float(np.std(pes[name])) if split.repeats > 1 else 0.0,
        }
        for name in losses
    ]
    return rows, qq_pairs


def cmd_realdata(args):
    cfg = resolve_config(args, REALDATA_DEFAULTS)
    response = cfg.get("response")
    if not response:
        raise UsageError("realdata requires --response NAME")
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    started = _now()
    data, names, std_info = ingest_csv(
        args.csv, response, standardize_response=bool(cfg.get("standardize_response", False))
    )
    cfg["standardization"] = std_info
    rows, qq_pairs = run_realdata(data, cfg)
    _write_csv(
        os.path.join(out_dir, "realdata.csv"),
        ["loss", "repeats", "mean_pe", "sd_pe"],
        [[r["loss"], r["repeats"], r["mean_pe"], r["sd_pe"]] for r in rows],
    )
    if qq_pairs is not None:
        _write_csv(
            os.path.join(out_dir, "qq.csv"),
            ["theoretical", "empirical"],
            [[float(a), float(b)] for a, b in qq_pairs],
        )
    write_manifest(out_dir, "realdata", cfg, started, _now())
    for r in rows:
        print(f"{r['loss']}: mean PE = {r['mean_pe']:.4f} (sd {r['sd_pe']:.4f})")
    return 0


def cmd_train(args):
    cfg = resolve_config(args, REALDATA_DEFAULTS)
    response = cfg.get("response")
    if not response:
        raise UsageError("train requires --response NAME")
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    started = _now()
    data, _, std_info = ingest_csv(args.csv, response)
    cfg["standardization"] = std_info
    losses = cfg["losses"]
    loss = make_loss(losses[0] if losses else "LS", cfg.get("eml", {}))
    net = _net_from_cfg(cfg, data.X.shape[1])
    tcfg = _train_cfg_from_cfg(cfg, _train_seed(int(cfg.get("seed", 0)), 0))
    report = train(data, loss, net, tcfg)
    ckpt = os.path.join(out_dir, "model.json")
    save_checkpoint(report.model, net, ckpt)
    write_manifest(out_dir, "train", cfg, started, _now())
    print(f"trained {report.epochs_run} epochs, final loss {report.loss_history[-1]:.6g}")
    print(f"checkpoint written to {ckpt}")
    return 0


def cmd_evaluate(args):
    cfg = resolve_config(args, REALDATA_DEFAULTS)
    response = cfg.get("response")
    if not response:
        raise UsageError("evaluate requires --response NAME")
    model, net = load_checkpoint(args.checkpoint)
    data, _, _ = ingest_csv(args.csv, response)
    if data.X.shape[1] != net.widths[0]:
        raise ValueError(
            f"data has {data.X.shape[1]} features, checkpoint expects {net.widths[0]}"
        )
    pe = prediction_error(model, data)
    print(repr(pe))
    return 0


# --------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="emlreg",
        description="Nonparametric regression with kernel-density (EML) and robust losses.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (or a manifest to replay)")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--jobs", type=int, help="parallel worker limit")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--epochs", type=int, help="fixed epoch count (sets min=max)")
        p.add_argument("--loss", help="comma-separated loss names")

    p = sub.add_parser("bench", help="scenario benchmark over losses")
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep-bandwidth", help="EML metrics across neighborhood proportions")
    common(p)
    p.add_argument("--v", help="comma-separated v values in (0, 1]")
    p.set_defaults(func=cmd_sweep_bandwidth)

    p = sub.add_parser("realdata", help="repeated-split evaluation on a CSV dataset")
    common(p)
    p.add_argument("csv", help="input CSV with header row")
    p.add_argument("--response", help="response column name")
    p.add_argument("--repeats", type=int, help="number of random splits")
    p.set_defaults(func=cmd_realdata)

    p = sub.add_parser("train", help="train one model on a CSV and save a checkpoint")
    common(p)
    p.add_argument("csv", help="input CSV with header row")
    p.add_argument("--response", help="response column name")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="prediction error of a checkpoint on a CSV")
    common(p)
    p.add_argument("checkpoint", help="model checkpoint (JSON)")
    p.add_argument("csv", help="input CSV with header row")
    p.add_argument("--response", help="response column name")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
