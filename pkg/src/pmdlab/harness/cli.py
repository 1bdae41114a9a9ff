"""Command-line surface: train, sweep, report, eval.

Exit codes: 0 on success, 2 for usage and configuration errors (unknown
flags, malformed spec files), 1 for runtime failures. The default output
directory comes from the PMDLAB_OUT environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .. import __version__
from ..agent import AgentConfig, MDPOAgent, evaluate
from ..environments import ENV_KINDS, EnvConfig, bounds
from ..errors import ConfigurationError, PmdlabError
from ..metrics import MIN_TEMP_THRESHOLD, normalize_return
from ..neural.nets import load_checkpoint, load_mlp, save_checkpoint, save_mlp
from ..regularizers import DriftSpec, RegularizerSpec
from .reports import (
    emit_frequency,
    emit_heatmap,
    emit_min_temp,
    emit_quantiles,
    emit_robustness,
)
from .serialize import env_from_dict, env_label, env_to_dict
from .sweep import (
    ResultStore,
    SweepSpec,
    config_id,
    run_sweep,
    schedule_for,
)

H_CHOICES = ("neg_shannon", "neg_tsallis", "sq_l2", "max")
DRIFT_CHOICES = ("rkl", "fkl", "bregman")
REPORT_KINDS = ("heatmap", "robustness", "frequency", "quantiles", "min_temp")
CHECKPOINT_FORMAT = "pmdlab-checkpoint"


def default_out() -> str:
    return os.environ.get("PMDLAB_OUT", "pmdlab-out")


def _regularizer_from_args(args) -> RegularizerSpec:
    if args.h == "neg_tsallis":
        if args.m is None:
            raise ConfigurationError("--h neg_tsallis requires --m")
        return RegularizerSpec.neg_tsallis(args.m)
    if args.h == "sq_l2":
        return RegularizerSpec.sq_l2(args.p)
    if args.h == "max":
        return RegularizerSpec.max_()
    return RegularizerSpec.neg_shannon()


def _drift_from_args(args, regularizer: RegularizerSpec) -> DriftSpec:
    if args.drift == "rkl":
        return DriftSpec.reverse_kl()
    if args.drift == "fkl":
        return DriftSpec.forward_kl()
    return DriftSpec.bregman_of(regularizer)


def _add_train_parser(sub) -> None:
    p = sub.add_parser("train", help="train one configuration and record it")
    p.add_argument("--env", required=True, choices=ENV_KINDS)
    p.add_argument("--reward-scale", type=float, default=1.0)
    p.add_argument("--h", choices=H_CHOICES, default="neg_shannon")
    p.add_argument("--m", type=float, default=None, help="Tsallis order")
    p.add_argument("--p", type=float, default=2.0, help="Lp exponent")
    p.add_argument("--drift", choices=DRIFT_CHOICES, default="rkl")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--alpha-schedule", choices=("constant", "linear", "learned"),
                   default="constant")
    p.add_argument("--lambda-schedule", choices=("constant", "linear"),
                   default="constant")
    p.add_argument("--apmd", action="store_true",
                   help="critic tracks the unregularized Q function")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--evals", type=int, default=10)
    p.add_argument("--out", default=None)


def cmd_train(args) -> int:
    out_dir = Path(args.out or default_out())
    regularizer = _regularizer_from_args(args)
    drift = _drift_from_args(args, regularizer)
    env_config = EnvConfig(kind=args.env, reward_scale=args.reward_scale)
    config = AgentConfig(
        regularizer=regularizer,
        drift=drift,
        alpha_schedule=schedule_for(args.alpha_schedule, args.alpha, args.steps),
        lambda_schedule=schedule_for(args.lambda_schedule, args.lam, args.steps),
        use_regularized_q=not args.apmd,
        total_env_steps=args.steps,
    )
    name = env_label(env_config)
    cid = config_id(args.alpha, args.lam)
    run_key = f"{cid}.{name}.s{args.seed}"

    start = time.perf_counter()
    root = np.random.SeedSequence(args.seed)
    train_entropy, eval_entropy = root.spawn(2)
    agent = MDPOAgent(config, env_config, train_entropy)
    logs = agent.train()
    returns = evaluate(agent.policy, env_config, args.evals, eval_entropy)
    elapsed = time.perf_counter() - start

    store = ResultStore(out_dir)
    store.append({
        "config_id": cid,
        "env": name,
        "seed": args.seed,
        "alpha": args.alpha,
        "lambda": args.lam,
        "eval_returns": returns,
        "run_seed": args.seed,
    })
    import dataclasses
    import math
    store.write_iteration_log(run_key, [
        {k: (None if isinstance(v, float) and math.isnan(v) else v)
         for k, v in dataclasses.asdict(row).items()}
        for row in logs
    ])
    ckpt_dir = out_dir / "checkpoints"
    ckpt_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = ckpt_dir / f"{run_key}.json"
    save_checkpoint(str(ckpt_path), {
        "format": CHECKPOINT_FORMAT,
        "version": 1,
        "env": env_to_dict(env_config),
        "policy": save_mlp(agent.policy),
    })

    b = bounds(env_config)
    mean_raw = float(np.mean(returns))
    print(f"run {run_key}: mean return {mean_raw:.3f} "
          f"(normalized {normalize_return(mean_raw, b):.3f}) "
          f"over {args.evals} episodes in {elapsed:.1f}s")
    print(f"checkpoint: {ckpt_path}")
    return 0


def _add_sweep_parser(sub) -> None:
    p = sub.add_parser("sweep", help="run a temperature-grid sweep from a JSON spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--resume", action="store_true",
                   help="continue into an existing store directory")
    p.add_argument("--preset", choices=("desk",), default=None)
    p.add_argument("--out", default=None)


def cmd_sweep(args) -> int:
    spec_path = Path(args.spec)
    if not spec_path.exists():
        raise ConfigurationError(f"spec file not found: {spec_path}")
    try:
        spec_dict = json.loads(spec_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"spec file is not valid JSON: {exc}") from exc
    spec = SweepSpec.from_dict(spec_dict)
    if args.preset == "desk":
        spec = spec.with_desk_preset()

    out_dir = Path(args.out) if args.out else Path(default_out()) / spec.name
    records_path = out_dir / "records.ndjson"
    if records_path.exists() and records_path.stat().st_size > 0 and not args.resume:
        raise ConfigurationError(
            f"store {out_dir} already has records; pass --resume to continue"
        )

    done = 0

    def progress(result):
        nonlocal done
        done += 1
        status = "failed" if result["error"] else "ok"
        print(f"[{done}] {result['run_key']}: {status} "
              f"({result['wall_clock_s']:.1f}s)", flush=True)

    store = run_sweep(spec, out_dir, parallelism=args.parallelism, progress=progress)
    from .sweep import RunManifest
    failed = RunManifest(out_dir, spec).failed_runs()
    print(f"sweep {spec.name}: {len(store)} records in {out_dir}")
    if failed:
        print(f"failed runs ({len(failed)}): {', '.join(failed[:10])}", file=sys.stderr)
        return 1
    return 0


def _add_report_parser(sub) -> None:
    p = sub.add_parser("report", help="derive CSV tables from sweep stores")
    p.add_argument("--store", action="append", required=True,
                   help="sweep store directory (repeatable)")
    p.add_argument("--kind", required=True, choices=REPORT_KINDS)
    p.add_argument("--threshold", type=float, default=MIN_TEMP_THRESHOLD,
                   help="success threshold for min_temp")
    p.add_argument("--out", default=None)


def _load_store(directory) -> tuple:
    directory = Path(directory)
    spec_path = directory / "spec.json"
    if not spec_path.exists():
        raise ConfigurationError(f"no spec.json in store {directory}")
    spec = SweepSpec.from_dict(json.loads(spec_path.read_text(encoding="utf-8")))
    return ResultStore(directory), spec


def cmd_report(args) -> int:
    out_dir = Path(args.out or (Path(default_out()) / "reports"))
    out_dir.mkdir(parents=True, exist_ok=True)
    stores_specs = [_load_store(d) for d in args.store]
    written = []
    if args.kind == "heatmap":
        for store, spec in stores_specs:
            written.append(emit_heatmap(store, spec, out_dir / f"heatmap_{spec.name}.csv"))
    elif args.kind == "robustness":
        written.append(emit_robustness(stores_specs, out_dir / "robustness.csv"))
    elif args.kind == "frequency":
        written.append(emit_frequency(stores_specs, out_dir / "frequency.csv"))
    elif args.kind == "quantiles":
        written.append(emit_quantiles(stores_specs, out_dir / "quantiles.csv"))
    else:
        if len(stores_specs) != 1:
            raise ConfigurationError("min_temp takes exactly one --store")
        store, spec = stores_specs[0]
        written.extend(emit_min_temp(store, spec, out_dir, args.threshold))
    for path in written:
        print(path)
    return 0


def _add_eval_parser(sub) -> None:
    p = sub.add_parser("eval", help="roll out a saved policy checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--episodes", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)


def cmd_eval(args) -> int:
    path = Path(args.checkpoint)
    if not path.exists():
        raise ConfigurationError(f"checkpoint not found: {path}")
    blob = load_checkpoint(str(path))
    if blob.get("format") != CHECKPOINT_FORMAT:
        raise ConfigurationError(f"not a policy checkpoint: {path}")
    env_config = env_from_dict(blob["env"])
    policy = load_mlp(blob["policy"])
    returns = evaluate(policy, env_config, args.episodes, args.seed)
    b = bounds(env_config)
    mean_raw = float(np.mean(returns))
    print(json.dumps({
        "env": env_label(env_config),
        "episodes": args.episodes,
        "returns": returns,
        "mean_return": mean_raw,
        "mean_normalized": normalize_return(mean_raw, b),
    }))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmdlab",
        description="Mirror-descent policy optimization sweeps on small tasks.",
    )
    parser.add_argument("--version", action="version", version=f"pmdlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_train_parser(sub)
    _add_sweep_parser(sub)
    _add_report_parser(sub)
    _add_eval_parser(sub)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    commands = {
        "train": cmd_train,
        "sweep": cmd_sweep,
        "report": cmd_report,
        "eval": cmd_eval,
    }
    try:
        return commands[args.command](args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PmdlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
