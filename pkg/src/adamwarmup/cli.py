"""Command-line entry point: ``adamwarmup {simulate,schedule,fact1,train}``.

Every command resolves its settings as defaults < ``--config`` JSON <
explicit flags, writes CSV outputs plus ``<command>.manifest.json`` into the
output directory (``--out-dir``, else ``$ADAMWARMUP_OUT``, else ``.``).
A manifest can be passed back through ``--config`` to reproduce a run.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
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
from .errors import IdxParseError, InvalidArgumentError, InvalidConfigurationError, NumericFailureError
from .optim import AdamHyperparams
from .schedules import (
    RHO_THRESHOLD,
    WarmupSchedule,
    effective_warmup_period,
    radam_rho,
)
from .sim import SimConfig, run_local_minimum_sim, stationary_median

OUT_ENV = "ADAMWARMUP_OUT"

DEFAULTS = {
    "simulate": {
        "params": 25000, "iters": 1000, "grad_variance": 1e-9, "beta1": 0.9, "beta2": 0.999,
        "epsilon": 0.0, "quantiles": [0.025, 0.25, 0.5, 0.75, 0.975], "seed": 0,
        "stationary": False, "workers": 1,
    },
    "schedule": {
        "beta2": 0.999, "kind": ["linear-untuned", "expo-untuned", "radam"], "tau": None,
        "t_max": 5000, "effective_period": False, "tolerance": 1e-8,
    },
    "fact1": {
        "beta2_min": 0.8, "beta2_max": 0.999, "beta2_step": 0.001,
        "beta2_extra": [0.9995, 0.9999], "t_max": 100000,
    },
    "train": {
        "images": None, "labels": None, "optimizer": "adam", "warmup": "linear-untuned",
        "tau": None, "alpha": 1e-3, "beta1": 0.9, "beta2": 0.999, "epsilon": 1e-8,
        "weight_decay": 1e-4, "batch_size": 256, "iters": 2000, "hidden": [200, 100, 50],
        "probe": False, "probe_every": 10, "grad_samples": 64, "params_per_matrix": 500,
        "seed": 0, "compare_warmups": False, "seeds": 3,
    },
}

SCHEDULE_KINDS = ("constant", "linear", "expo", "linear-untuned", "expo-untuned", "radam")


class UsageError(Exception):
    pass


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _kinds(text):
    return [k.strip() for k in text.split(",") if k.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adamwarmup", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def common(sp):
        sp.add_argument("--config", default=S, help="JSON config or manifest; flags override it")
        sp.add_argument("--out-dir", dest="out_dir", default=S)
        return sp

    s = common(sub.add_parser("simulate", help="update magnitudes at a simulated local minimum"))
    s.add_argument("--params", type=int, default=S)
    s.add_argument("--iters", type=int, default=S)
    s.add_argument("--grad-variance", type=float, default=S)
    s.add_argument("--beta1", type=float, default=S)
    s.add_argument("--beta2", type=float, default=S)
    s.add_argument("--epsilon", type=float, default=S)
    s.add_argument("--quantiles", type=_floats, default=S, help="comma-separated levels")
    s.add_argument("--seed", type=int, default=S)
    s.add_argument("--workers", type=int, default=S)
    s.add_argument("--stationary", action="store_true", default=S,
                   help="run 10000 iterations and print the final median")

    s = common(sub.add_parser("schedule", help="tabulate warmup schedules"))
    s.add_argument("--beta2", type=float, default=S)
    s.add_argument("--kind", type=_kinds, default=S, help=f"comma list of {', '.join(SCHEDULE_KINDS)}")
    s.add_argument("--tau", type=float, default=S, help="period for plain linear/expo kinds")
    s.add_argument("--t-max", type=int, default=S)
    s.add_argument("--effective-period", action="store_true", default=S)
    s.add_argument("--tolerance", type=float, default=S)

    s = common(sub.add_parser("fact1", help="check rho_t <= 4 iff t <= 4 over a beta2 grid"))
    s.add_argument("--beta2-min", type=float, default=S)
    s.add_argument("--beta2-max", type=float, default=S)
    s.add_argument("--beta2-step", type=float, default=S)
    s.add_argument("--beta2-extra", type=_floats, default=S)
    s.add_argument("--t-max", type=int, default=S)

    s = common(sub.add_parser("train", help="train the MLP on an IDX digit dataset"))
    s.add_argument("--images", default=S)
    s.add_argument("--labels", default=S)
    s.add_argument("--optimizer", choices=("sgd", "adam", "radam"), default=S)
    s.add_argument("--warmup", choices=("none", "linear", "expo", "linear-untuned", "expo-untuned"), default=S)
    s.add_argument("--tau", type=float, default=S)
    s.add_argument("--alpha", type=float, default=S)
    s.add_argument("--beta1", type=float, default=S)
    s.add_argument("--beta2", type=float, default=S)
    s.add_argument("--epsilon", type=float, default=S)
    s.add_argument("--weight-decay", type=float, default=S)
    s.add_argument("--batch-size", type=int, default=S)
    s.add_argument("--iters", type=int, default=S)
    s.add_argument("--hidden", type=lambda t: [int(x) for x in t.split(",")], default=S)
    s.add_argument("--probe", action="store_true", default=S)
    s.add_argument("--probe-every", type=int, default=S)
    s.add_argument("--grad-samples", type=int, default=S)
    s.add_argument("--params-per-matrix", type=int, default=S)
    s.add_argument("--seed", type=int, default=S)
    s.add_argument("--compare-warmups", action="store_true", default=S)
    s.add_argument("--seeds", type=int, default=S, help="number of seeds for --compare-warmups")
    return p


def resolve(command: str, ns: argparse.Namespace) -> dict:
    explicit = {k: v for k, v in vars(ns).items() if k not in ("command", "config", "out_dir")}
    cfg = dict(DEFAULTS[command])
    if hasattr(ns, "config"):
        try:
            with open(ns.config) as f:
                loaded = json.load(f)
        except json.JSONDecodeError as e:
            raise UsageError(f"{ns.config}: not valid JSON ({e})")
        if "config" in loaded and "command" in loaded:
            if loaded["command"] != command:
                raise UsageError(f"manifest is for {loaded['command']!r}, not {command!r}")
            loaded = loaded["config"]
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    cfg.update(explicit)
    return cfg


def _out_dir(ns) -> Path:
    d = Path(getattr(ns, "out_dir", None) or os.environ.get(OUT_ENV) or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def write_manifest(out: Path, command: str, cfg: dict, outputs: list) -> Path:
    path = out / f"{command}.manifest.json"
    manifest = {
        "command": command,
        "config": cfg,
        "seed": cfg.get("seed"),
        "version": __version__,
        "outputs": [str(Path(o).name) for o in outputs],
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def cmd_simulate(cfg: dict, out: Path) -> int:
    if cfg["stationary"]:
        cfg["iters"] = 10000
    try:
        config = SimConfig(
            n_params=cfg["params"], n_iters=cfg["iters"], grad_variance=cfg["grad_variance"],
            hp=AdamHyperparams(alpha=1.0, beta1=cfg["beta1"], beta2=cfg["beta2"], epsilon=cfg["epsilon"]),
            quantiles=cfg["quantiles"], seed=cfg["seed"],
        )
    except InvalidArgumentError as e:
        raise UsageError(str(e))
    if cfg["workers"] < 1:
        raise UsageError("--workers must be >= 1")
    traj = run_local_minimum_sim(config, workers=cfg["workers"])
    csv_path = out / "simulate.csv"
    traj.to_csv(csv_path)
    if cfg["stationary"]:
        if 0.5 in config.quantiles:
            median = float(traj.column(0.5)[-1])
        else:
            median = stationary_median(config, workers=cfg["workers"])
        print(f"stationary median |update|/alpha at t={config.n_iters}: {median:.6f}")
    write_manifest(out, "simulate", cfg, [csv_path])
    return 0


def _schedule_for(kind, beta2, tau):
    if kind == "constant":
        return WarmupSchedule.constant()
    if kind == "linear-untuned":
        return WarmupSchedule.untuned_linear(beta2)
    if kind == "expo-untuned":
        return WarmupSchedule.untuned_exponential(beta2)
    if kind == "radam":
        return WarmupSchedule.radam(beta2)
    if tau is None:
        raise UsageError(f"--tau is required for kind {kind!r}")
    return WarmupSchedule.linear(tau) if kind == "linear" else WarmupSchedule.exponential(tau)


def cmd_schedule(cfg: dict, out: Path) -> int:
    beta2 = cfg["beta2"]
    if not 0.0 < beta2 < 1.0:
        raise UsageError(f"--beta2 must lie in (0, 1), got {beta2}")
    kinds = cfg["kind"]
    bad = [k for k in kinds if k not in SCHEDULE_KINDS]
    if bad or not kinds:
        raise UsageError(f"unknown schedule kind(s) {bad}; choose from {', '.join(SCHEDULE_KINDS)}")
    if cfg["t_max"] < 1:
        raise UsageError("--t-max must be >= 1")
    try:
        schedules = [_schedule_for(k, beta2, cfg["tau"]) for k in kinds]
    except InvalidArgumentError as e:
        raise UsageError(str(e))

    t = np.arange(1, cfg["t_max"] + 1)
    cols = [s(t) for s in schedules]
    header = ["t", "omega"] if len(kinds) == 1 else ["t", *kinds]
    csv_path = out / "schedule.csv"
    with open(csv_path, "w") as f:
        f.write(",".join(header) + "\n")
        for i, ti in enumerate(t):
            f.write(",".join([str(ti)] + [f"{c[i]:.9g}" for c in cols]) + "\n")

    outputs = [csv_path]
    if cfg["effective_period"]:
        lines = []
        for k, s in zip(kinds, schedules):
            try:
                period = effective_warmup_period(s, cfg["tolerance"])
            except InvalidArgumentError as e:
                raise UsageError(str(e))
            lines.append(f"{k}\t{period:.6f}")
            print(f"{k}: effective warmup period {period:.6f}")
        ep_path = out / "effective_period.tsv"
        ep_path.write_text("kind\tperiod\n" + "\n".join(lines) + "\n")
        outputs.append(ep_path)
    write_manifest(out, "schedule", cfg, outputs)
    return 0


def fact1_grid(beta2_min, beta2_max, beta2_step, extra=()) -> np.ndarray:
    n = int(np.floor((beta2_max - beta2_min) / beta2_step + 1e-9)) + 1
    grid = np.round(beta2_min + beta2_step * np.arange(n), 12)
    return np.unique(np.concatenate([grid, np.asarray(extra, dtype=np.float64)]))


def check_fact1(grid, t_max):
    """Return a list of ``(beta2, t, rho_t)`` counterexamples."""
    t = np.arange(1, t_max + 1)
    bad = []
    for b in grid:
        rho_t = np.asarray(radam_rho(t, float(b)).rho_t)
        mismatch = (rho_t <= RHO_THRESHOLD) != (t <= 4)
        for i in np.flatnonzero(mismatch)[:5]:
            bad.append((float(b), int(t[i]), float(rho_t[i])))
    return bad


def cmd_fact1(cfg: dict, out: Path) -> int:
    lo, hi, step = cfg["beta2_min"], cfg["beta2_max"], cfg["beta2_step"]
    extra = list(cfg["beta2_extra"])
    if lo < 0.8 or hi >= 1.0 or lo > hi or step <= 0 or any(not 0.8 <= b < 1.0 for b in extra):
        raise UsageError("beta2 grid must lie within [0.8, 1) with a positive step")
    if cfg["t_max"] < 1:
        raise UsageError("--t-max must be >= 1")
    grid = fact1_grid(lo, hi, step, extra)
    bad = check_fact1(grid, cfg["t_max"])
    lines = [f"grid: {len(grid)} beta2 values in [{grid.min():g}, {grid.max():g}], t in [1, {cfg['t_max']}]"]
    if cfg["t_max"] <= 4:
        lines.append("note: t_max <= 4, so the direction t > 4 => rho_t > 4 is vacuous; only t <= 4 => rho_t <= 4 was checked")
    if bad:
        lines += [f"counterexample: beta2={b} t={t} rho_t={r!r}" for b, t, r in bad]
    else:
        lines.append("verified")
    report = "\n".join(lines) + "\n"
    print(report, end="")
    path = out / "fact1.txt"
    path.write_text(report)
    write_manifest(out, "fact1", cfg, [path])
    return 1 if bad else 0


def _train_config(cfg, seed=None):
    from .train import ProbeSettings, TrainConfig

    hp = AdamHyperparams(
        alpha=cfg["alpha"], beta1=cfg["beta1"], beta2=cfg["beta2"],
        epsilon=cfg["epsilon"], weight_decay=cfg["weight_decay"],
    )
    warmup = cfg["warmup"]
    if cfg["optimizer"] == "radam" or warmup == "none":
        sched = WarmupSchedule.constant()
    else:
        sched = _schedule_for(warmup, hp.beta2, cfg["tau"])
    probe = None
    if cfg["probe"]:
        probe = ProbeSettings(cfg["probe_every"], cfg["grad_samples"], cfg["params_per_matrix"])
    return TrainConfig(
        hp=hp, optimizer=cfg["optimizer"], warmup=sched, batch_size=cfg["batch_size"],
        n_iters=cfg["iters"], hidden=cfg["hidden"], probe=probe,
        seed=cfg["seed"] if seed is None else seed,
    )


def cmd_train(cfg: dict, out: Path) -> int:
    from .train import WARMUP_METHODS, compare_warmups, interchangeability, load_idx, train

    if not cfg["images"] or not cfg["labels"]:
        raise UsageError("--images and --labels are required")
    try:
        base = _train_config(cfg)
    except (InvalidArgumentError, InvalidConfigurationError) as e:
        raise UsageError(str(e))
    dataset = load_idx(cfg["images"], cfg["labels"])

    if cfg["compare_warmups"]:
        seeds = [cfg["seed"] + i for i in range(cfg["seeds"])]
        overrides = dict(hp=base.hp, batch_size=base.batch_size, n_iters=base.n_iters, hidden=base.hidden)
        table = compare_warmups(dataset, seeds, **overrides)
        path = out / "compare.csv"
        with open(path, "w") as f:
            f.write("method,seed,final_loss\n")
            for m in WARMUP_METHODS:
                for s, loss in zip(seeds, table[m]):
                    f.write(f"{m},{s},{loss:.9g}\n")
        print("method          " + "  ".join(f"seed={s:<8d}" for s in seeds) + "  mean")
        for m in WARMUP_METHODS:
            print(f"{m:<15s} " + "  ".join(f"{x:<13.6g}" for x in table[m]) + f"  {np.mean(table[m]):.6g}")
        if len(seeds) >= 2:
            gap, spread = interchangeability(table)
            print(f"cross-method gap of means {gap:.6g}; max seed std {spread:.6g}")
        write_manifest(out, "train", cfg, [path])
        return 0

    result = train(base, dataset)
    outputs = [out / "loss.csv", out / "model.npz", out / "optimizer.json"]
    result.write_loss_csv(outputs[0])
    result.model.save(outputs[1])
    result.optimizer.save(outputs[2])
    if result.probes:
        outputs.append(out / "probe.csv")
        result.write_probe_csv(outputs[-1])
    print(f"initial loss {result.initial_loss:.6f}, final loss {result.final_loss:.6f}")
    write_manifest(out, "train", cfg, outputs)
    return 0


COMMANDS = {"simulate": cmd_simulate, "schedule": cmd_schedule, "fact1": cmd_fact1, "train": cmd_train}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve(ns.command, ns)
        out = _out_dir(ns)
        return COMMANDS[ns.command](cfg, out)
    except UsageError as e:
        parser.error(str(e))
    except (OSError, IdxParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (NumericFailureError, InvalidArgumentError, InvalidConfigurationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
