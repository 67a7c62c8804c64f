"""Command-line driver: simulate campaigns, select on data files, report.

Subcommands::

    catnet simulate --config cfg.json --out DIR
    catnet select   --config cfg.json --data data.csv --out DIR
    catnet report   --glob 'runs/*/metrics.json' --out agg.csv

One JSON config document describes a campaign; its resolved form is echoed
into every metrics file.  All randomness derives from the config seed, so
rerunning any command overwrites outputs with identical bytes.  Exit
codes: 0 success, 1 input/config error, 2 success with per-feature
warnings.  CATNET_WORKERS>1 parallelizes simulate over repeats.
"""
from __future__ import annotations

import argparse
import glob as globmod
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from . import datagen
from .datagen import Dataset, LinkKind, apply_link, gen_brownian_design, gen_linear_design
from .dependence import KernelKind
from .errors import ConfigError
from .pipelines import PipelineConfig, run_catnet, run_gm_linear, run_scatnet
from .rng import child_seed

MODES = ("catnet", "scatnet", "gm")
BACKENDS = ("linear", "lstm")
DESIGNS = ("gaussian", "brownian")
LINKS = tuple(l.value for l in LinkKind)
KERNELS = tuple(k.value for k in KernelKind)


@dataclass
class RunConfig:
    mode: str = "catnet"
    backend: str = "linear"
    q: float = 0.1
    p: int = 20
    n: int = 200
    k: int = 4
    corr: float = 0.0
    design: str = "gaussian"
    link: str = "linear"
    seed: int = 0
    repeats: int = 1
    name: str = "sim"
    dependence: dict = field(default_factory=dict)  # kernel, max_lag, grid_size
    shap: dict = field(default_factory=dict)        # permutations, background, rows_per_perm
    lstm: dict = field(default_factory=dict)        # epochs, learning_rate, batch_size,
                                                    # lookback, hidden, patience


_NESTED_KEYS = {
    "dependence": {"kernel", "max_lag", "grid_size"},
    "shap": {"permutations", "background", "rows_per_perm"},
    "lstm": {"epochs", "learning_rate", "batch_size", "lookback", "hidden", "patience"},
}


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")

    cfg = RunConfig()
    known = set(cfg.__dataclass_fields__)
    for key, value in raw.items():
        _require(key in known, f"unknown config key {key!r}")
        if key in _NESTED_KEYS:
            _require(isinstance(value, dict), f"{key!r} must be an object")
            unknown = set(value) - _NESTED_KEYS[key]
            _require(not unknown, f"unknown {key} keys {sorted(unknown)}")
        setattr(cfg, key, value)

    _require(cfg.mode in MODES, f"mode must be one of {MODES}, got {cfg.mode!r}")
    _require(cfg.backend in BACKENDS, f"backend must be one of {BACKENDS}, got {cfg.backend!r}")
    _require(not (cfg.mode == "gm" and cfg.backend != "linear"),
             "gm mode requires the linear backend")
    _require(0.0 < cfg.q < 1.0, f"q must lie in (0, 1), got {cfg.q}")
    _require(cfg.repeats >= 1, f"repeats must be >= 1, got {cfg.repeats}")
    _require(cfg.design in DESIGNS, f"design must be one of {DESIGNS}, got {cfg.design!r}")
    _require(cfg.link in LINKS, f"link must be one of {LINKS}, got {cfg.link!r}")
    _require(0 <= cfg.k <= cfg.p, f"need 0 <= k <= p, got k={cfg.k}, p={cfg.p}")
    _require(0.0 <= cfg.corr < 1.0, f"corr must lie in [0, 1), got {cfg.corr}")
    kern = cfg.dependence.get("kernel", "rbf")
    _require(kern in KERNELS, f"dependence.kernel must be one of {KERNELS}, got {kern!r}")
    return cfg


def pipeline_config(cfg: RunConfig, seed: int) -> PipelineConfig:
    shap = cfg.shap
    dep = cfg.dependence
    net = cfg.lstm
    return PipelineConfig(
        backend=cfg.backend,
        q=cfg.q,
        seed=seed,
        shap_permutations=shap.get("permutations"),
        shap_background=shap.get("background", 64),
        shap_rows_per_perm=shap.get("rows_per_perm", "auto"),
        kernel=KernelKind(dep.get("kernel", "rbf")),
        max_lag=dep.get("max_lag"),
        dependence_grid=dep.get("grid_size", 15),
        epochs=net.get("epochs", 200),
        learning_rate=net.get("learning_rate", 1e-3),
        batch_size=net.get("batch_size", 32),
        lookback=net.get("lookback", 5),
        hidden_size=net.get("hidden"),
        patience=net.get("patience", 10),
    )


def _atomic_write(path: str, payload: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def _simulate_one(cfg_dict: dict, repeat: int, outdir: str) -> None:
    cfg = RunConfig(**cfg_dict)
    seed = child_seed(cfg.seed, "repeat", repeat)
    if cfg.design == "brownian":
        data = gen_brownian_design(cfg.p, cfg.n, cfg.k, seed)
    else:
        data = gen_linear_design(cfg.p, cfg.n, cfg.k, cfg.corr, seed)
    y = apply_link(data.y, LinkKind(cfg.link))
    data = Dataset(X=data.X, y=y, truth=data.truth)
    stem = os.path.join(outdir, f"{cfg.name}_r{repeat}")
    tmp_csv = f"{stem}.csv.tmp"
    datagen.save_dataset_csv(data, tmp_csv)
    os.replace(tmp_csv, f"{stem}.csv")
    tmp_json = f"{stem}.truth.json.tmp"
    datagen.save_truth_json(data.truth, tmp_json)
    os.replace(tmp_json, f"{stem}.truth.json")


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    workers = int(os.environ.get("CATNET_WORKERS", "1"))
    if workers > 1 and cfg.repeats > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_simulate_one, asdict(cfg), r, args.out)
                for r in range(cfg.repeats)
            ]
            for f in futures:
                f.result()
    else:
        for r in range(cfg.repeats):
            _simulate_one(asdict(cfg), r, args.out)
    print(f"wrote {cfg.repeats} dataset(s) under {args.out}")
    return 0


def _setting_key(cfg: RunConfig) -> str:
    return (
        f"{cfg.mode}-{cfg.backend}-p{cfg.p}-n{cfg.n}-k{cfg.k}"
        f"-corr{cfg.corr}-{cfg.design}-{cfg.link}-q{cfg.q}"
    )


def cmd_select(args) -> int:
    cfg = load_config(args.config)
    try:
        data = datagen.load_dataset_csv(args.data)
    except OSError as exc:
        raise ConfigError(f"cannot read data {args.data}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _require(data.p == cfg.p, f"data has {data.p} feature columns, config says {cfg.p}")

    truth_path = args.data[:-4] + ".truth.json" if args.data.endswith(".csv") \
        else args.data + ".truth.json"
    if os.path.exists(truth_path):
        data = Dataset(X=data.X, y=data.y, truth=datagen.load_truth_json(truth_path))

    pcfg = pipeline_config(cfg, cfg.seed)
    runner = {"catnet": run_catnet, "scatnet": run_scatnet, "gm": run_gm_linear}[cfg.mode]
    result = runner(data, pcfg)

    os.makedirs(args.out, exist_ok=True)
    rows = ["feature,M,selected"]
    chosen = set(result.selected.tolist())
    for j, mval in enumerate(result.stats.m):
        rows.append(f"{j},{float(mval)!r},{int(j in chosen)}")
    _atomic_write(os.path.join(args.out, "selection.csv"), "\n".join(rows) + "\n")

    metrics = {
        "setting": _setting_key(cfg),
        "q": cfg.q,
        "threshold": result.threshold,
        "n_selected": len(result.selected),
        "warnings": result.warnings,
        "config": asdict(cfg),
    }
    if result.metrics is not None:
        metrics["fdp"], metrics["power"] = result.metrics
    _atomic_write(
        os.path.join(args.out, "metrics.json"),
        json.dumps(metrics, sort_keys=True, indent=2) + "\n",
    )
    print(f"selected {len(result.selected)} feature(s); outputs in {args.out}")
    return 2 if result.warnings else 0


def cmd_report(args) -> int:
    paths = sorted(globmod.glob(args.glob))
    if not paths:
        print(f"no metrics files match {args.glob!r}", file=sys.stderr)
        return 1
    groups: dict[str, dict[str, list]] = {}
    for path in paths:
        with open(path) as fh:
            payload = json.load(fh)
        g = groups.setdefault(payload["setting"], {"fdp": [], "power": []})
        if "fdp" in payload:
            g["fdp"].append(payload["fdp"])
            g["power"].append(payload["power"])
        g.setdefault("count", 0)
        g["count"] += 1

    def stats(vals):
        if not vals:
            return float("nan"), float("nan")
        mean = sum(vals) / len(vals)
        var = sum((v - mean) ** 2 for v in vals) / len(vals)
        return mean, var**0.5

    lines = [["setting", "mean_fdr", "mean_power", "std_fdr", "std_power", "repeats"]]
    for key in sorted(groups):
        g = groups[key]
        mf, sf = stats(g["fdp"])
        mp, sp = stats(g["power"])
        lines.append([key, repr(mf), repr(mp), repr(sf), repr(sp), str(g["count"])])
    payload = "\n".join(",".join(row) for row in lines) + "\n"
    if args.out:
        _atomic_write(args.out, payload)
    print(payload, end="")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="catnet", description="FDR-controlled feature selection campaigns"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate datasets from a config")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_sel = sub.add_parser("select", help="run feature selection on a dataset CSV")
    p_sel.add_argument("--config", required=True)
    p_sel.add_argument("--data", required=True)
    p_sel.add_argument("--out", required=True)
    p_sel.set_defaults(func=cmd_select)

    p_rep = sub.add_parser("report", help="aggregate metrics files into a table")
    p_rep.add_argument("--glob", required=True)
    p_rep.add_argument("--out", default=None)
    p_rep.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
