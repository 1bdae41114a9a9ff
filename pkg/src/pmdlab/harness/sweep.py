"""Grid-sweep planning, deterministic seeding, execution, and storage.

A sweep is the cross product (alpha grid) x (lambda grid) x (environments)
x (seed indices). Each run gets a stable seed hashed from its coordinates,
so re-running any subset reproduces identical results regardless of
ordering or worker count. Results persist as newline-delimited JSON with
one row per run plus a per-run iteration log; a manifest tracks status and
wall-clock so an interrupted sweep resumes where it stopped.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import time
import traceback
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..agent import MDPOAgent, AgentConfig, TemperatureSchedule, evaluate
from ..environments import EnvConfig
from ..errors import ConfigurationError, DuplicateRunError
from ..regularizers import DriftSpec, RegularizerSpec
from .serialize import (
    drift_from_dict,
    drift_to_dict,
    env_from_dict,
    env_label,
    env_to_dict,
    reg_from_dict,
    reg_to_dict,
)

ALPHA_GRID = (
    0.0,
    0.001, 0.002, 0.003, 0.004, 0.005, 0.006, 0.007, 0.008, 0.009,
    0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1,
    0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0,
)
LAMBDA_GRID = (
    0.0,
    5e-5, 7.5e-5, 1e-4, 2.5e-4, 5e-4, 7.5e-4, 1e-3,
    5e-3, 1e-2, 2.5e-2, 5e-2, 1e-1, 2.5e-1, 5e-1,
    1.0, 2.5, 5.0, 7.5, 10.0, 25.0, 50.0,
    1e2, 5e2, 1e3, 2.5e3, 5e3, 1e4, 5e4,
)

# Desk-scale preset: a 9x9 log-spaced subset of the full grids, 3 seeds,
# and a 2e5-step budget per run.
DESK_ALPHA_GRID = (0.0, 0.001, 0.005, 0.01, 0.05, 0.1, 0.3, 0.6, 1.0)
DESK_LAMBDA_GRID = (0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3)
DESK_TOTAL_STEPS = 200_000
DESK_SEEDS = 3
DESK_EVALS = 10

SCHEDULE_MODES_ALPHA = ("constant", "linear", "learned")
SCHEDULE_MODES_LAMBDA = ("constant", "linear")

_OVERRIDE_FIELDS = (
    "use_regularized_q", "gamma", "env_count", "steps_per_update", "batch_size",
    "critic_epochs", "actor_epochs", "tau", "total_env_steps", "learning_rate",
    "max_grad_norm", "buffer_capacity", "hidden_sizes",
)


def default_grids() -> tuple:
    """The full published temperature grids: 29 alphas and 29 lambdas."""
    return list(ALPHA_GRID), list(LAMBDA_GRID)


def default_env_suite() -> tuple:
    return (
        EnvConfig(kind="cartpole"),
        EnvConfig(kind="acrobot"),
        EnvConfig(kind="catch"),
        EnvConfig(kind="deepsea"),
    )


@dataclass(frozen=True)
class SweepSpec:
    name: str
    regularizer: RegularizerSpec
    drift: DriftSpec
    alpha_grid: tuple = ALPHA_GRID
    lambda_grid: tuple = LAMBDA_GRID
    alpha_schedule_mode: str = "constant"
    lambda_schedule_mode: str = "constant"
    env_suite: tuple = dataclasses.field(default_factory=default_env_suite)
    seeds_per_config: int = 5
    evals_per_seed: int = 10
    agent_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.name or any(c in self.name for c in "|/\\\n"):
            raise ConfigurationError("sweep name must be a simple identifier")
        if self.alpha_schedule_mode not in SCHEDULE_MODES_ALPHA:
            raise ConfigurationError(
                f"alpha schedule must be one of {SCHEDULE_MODES_ALPHA}"
            )
        if self.lambda_schedule_mode not in SCHEDULE_MODES_LAMBDA:
            raise ConfigurationError(
                f"lambda schedule must be one of {SCHEDULE_MODES_LAMBDA}"
            )
        if not self.alpha_grid or not self.lambda_grid:
            raise ConfigurationError("temperature grids must be nonempty")
        for v in list(self.alpha_grid) + list(self.lambda_grid):
            if v < 0 or not math.isfinite(v):
                raise ConfigurationError("grid temperatures must be finite and >= 0")
        if self.seeds_per_config < 1 or self.evals_per_seed < 1:
            raise ConfigurationError("seeds_per_config and evals_per_seed must be >= 1")
        if not self.env_suite:
            raise ConfigurationError("environment suite is empty")
        labels = [env_label(e) for e in self.env_suite]
        if len(set(labels)) != len(labels):
            raise ConfigurationError("environment suite has duplicate entries")
        unknown = set(self.agent_overrides) - set(_OVERRIDE_FIELDS)
        if unknown:
            raise ConfigurationError(f"unknown agent overrides: {sorted(unknown)}")

    def n_configs(self) -> int:
        return len(self.alpha_grid) * len(self.lambda_grid)

    def total_runs(self) -> int:
        return self.n_configs() * len(self.env_suite) * self.seeds_per_config

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "regularizer": reg_to_dict(self.regularizer),
            "drift": drift_to_dict(self.drift),
            "alpha_grid": list(self.alpha_grid),
            "lambda_grid": list(self.lambda_grid),
            "alpha_schedule": self.alpha_schedule_mode,
            "lambda_schedule": self.lambda_schedule_mode,
            "envs": [env_to_dict(e) for e in self.env_suite],
            "seeds_per_config": self.seeds_per_config,
            "evals_per_seed": self.evals_per_seed,
            "agent": dict(self.agent_overrides),
        }

    @staticmethod
    def from_dict(d: dict) -> "SweepSpec":
        known = {
            "name", "regularizer", "drift", "alpha_grid", "lambda_grid",
            "alpha_schedule", "lambda_schedule", "envs", "seeds_per_config",
            "evals_per_seed", "agent",
        }
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown sweep spec keys: {sorted(unknown)}")
        try:
            spec = SweepSpec(
                name=d["name"],
                regularizer=reg_from_dict(d["regularizer"]),
                drift=drift_from_dict(d["drift"]),
                alpha_grid=tuple(d.get("alpha_grid", ALPHA_GRID)),
                lambda_grid=tuple(d.get("lambda_grid", LAMBDA_GRID)),
                alpha_schedule_mode=d.get("alpha_schedule", "constant"),
                lambda_schedule_mode=d.get("lambda_schedule", "constant"),
                env_suite=tuple(env_from_dict(e) for e in d.get("envs", []))
                or default_env_suite(),
                seeds_per_config=int(d.get("seeds_per_config", 5)),
                evals_per_seed=int(d.get("evals_per_seed", 10)),
                agent_overrides=dict(d.get("agent", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed sweep spec: {exc}") from exc
        return spec

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def with_desk_preset(self) -> "SweepSpec":
        overrides = dict(self.agent_overrides)
        overrides["total_env_steps"] = DESK_TOTAL_STEPS
        return dataclasses.replace(
            self,
            alpha_grid=DESK_ALPHA_GRID,
            lambda_grid=DESK_LAMBDA_GRID,
            seeds_per_config=DESK_SEEDS,
            evals_per_seed=DESK_EVALS,
            agent_overrides=overrides,
        )


def config_id(alpha: float, lam: float) -> str:
    return f"a{alpha:.10g}-l{lam:.10g}"


def stable_seed(*parts) -> int:
    """63-bit seed hashed from string/int coordinates; stable across runs."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def schedule_for(mode: str, value: float, total_steps: int) -> TemperatureSchedule:
    if mode == "constant":
        return TemperatureSchedule.constant(value)
    if mode == "linear":
        return TemperatureSchedule.linear(value, total_steps)
    if mode == "learned":
        # The grid value plays the role of the target weight w.
        return TemperatureSchedule.learned(TemperatureSchedule.constant(value))
    raise ConfigurationError(f"unknown schedule mode: {mode!r}")


def build_agent_config(spec: SweepSpec, alpha: float, lam: float) -> AgentConfig:
    overrides = dict(spec.agent_overrides)
    if "hidden_sizes" in overrides:
        overrides["hidden_sizes"] = tuple(overrides["hidden_sizes"])
    total = int(overrides.get("total_env_steps", 1_000_000))
    overrides["total_env_steps"] = total
    return AgentConfig(
        regularizer=spec.regularizer,
        drift=spec.drift,
        alpha_schedule=schedule_for(spec.alpha_schedule_mode, alpha, total),
        lambda_schedule=schedule_for(spec.lambda_schedule_mode, lam, total),
        **overrides,
    )


@dataclass(frozen=True)
class RunTask:
    config_id: str
    alpha: float
    lam: float
    env_config: EnvConfig
    env_name: str
    seed_index: int
    run_seed: int
    agent_config: AgentConfig
    evals: int

    def run_key(self) -> str:
        return f"{self.config_id}.{self.env_name}.s{self.seed_index}"


def plan_runs(spec: SweepSpec) -> list:
    """Every (config, env, seed) run of the sweep, in deterministic order."""
    tasks = []
    for alpha in spec.alpha_grid:
        for lam in spec.lambda_grid:
            cid = config_id(alpha, lam)
            agent_config = build_agent_config(spec, alpha, lam)
            for env_config in spec.env_suite:
                name = env_label(env_config)
                for seed_index in range(spec.seeds_per_config):
                    tasks.append(RunTask(
                        config_id=cid,
                        alpha=alpha,
                        lam=lam,
                        env_config=env_config,
                        env_name=name,
                        seed_index=seed_index,
                        run_seed=stable_seed(spec.name, cid, name, seed_index),
                        agent_config=agent_config,
                        evals=spec.evals_per_seed,
                    ))
    return tasks


def execute_run(task: RunTask) -> dict:
    """Train and evaluate one run; never raises, errors come back in the result."""
    start = time.perf_counter()
    try:
        root = np.random.SeedSequence(task.run_seed)
        train_entropy, eval_entropy = root.spawn(2)
        agent = MDPOAgent(task.agent_config, task.env_config, train_entropy)
        logs = agent.train()
        returns = evaluate(agent.policy, task.env_config, task.evals, eval_entropy)
        record = {
            "config_id": task.config_id,
            "env": task.env_name,
            "seed": task.seed_index,
            "alpha": task.alpha,
            "lambda": task.lam,
            "eval_returns": returns,
            "run_seed": task.run_seed,
        }
        log_rows = [_sanitize_row(dataclasses.asdict(row)) for row in logs]
        return {
            "run_key": task.run_key(),
            "record": record,
            "log_rows": log_rows,
            "wall_clock_s": time.perf_counter() - start,
            "error": None,
        }
    except Exception:
        return {
            "run_key": task.run_key(),
            "record": None,
            "log_rows": [],
            "wall_clock_s": time.perf_counter() - start,
            "error": traceback.format_exc(),
        }


def _sanitize_row(row: dict) -> dict:
    return {
        k: (None if isinstance(v, float) and math.isnan(v) else v)
        for k, v in row.items()
    }


class ResultStore:
    """Append-only run records; one ndjson row per (config, env, seed)."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.records_path = self.directory / "records.ndjson"
        self.logs_dir = self.directory / "logs"
        self._records = []
        self._keys = set()
        if self.records_path.exists():
            with open(self.records_path, encoding="utf-8") as f:
                for line in f:
                    if line.strip():
                        rec = json.loads(line)
                        self._records.append(rec)
                        self._keys.add(self._key_of(rec))

    @staticmethod
    def _key_of(rec: dict) -> tuple:
        return (rec["config_id"], rec["env"], rec["seed"])

    def __len__(self) -> int:
        return len(self._records)

    def has(self, config_id_: str, env: str, seed: int) -> bool:
        return (config_id_, env, seed) in self._keys

    def append(self, record: dict) -> None:
        key = self._key_of(record)
        if key in self._keys:
            raise DuplicateRunError(f"run already stored: {key}")
        with open(self.records_path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record, sort_keys=True) + "\n")
        self._records.append(record)
        self._keys.add(key)

    def records(self) -> list:
        return list(self._records)

    def records_sorted(self) -> list:
        return sorted(self._records, key=self._key_of)

    def write_iteration_log(self, run_key: str, rows: list) -> None:
        self.logs_dir.mkdir(parents=True, exist_ok=True)
        path = self.logs_dir / f"{run_key}.ndjson"
        with open(path, "w", encoding="utf-8") as f:
            for row in rows:
                f.write(json.dumps(row, sort_keys=True) + "\n")


class RunManifest:
    """Status ledger for one sweep directory, persisted as JSON."""

    def __init__(self, directory, spec: SweepSpec):
        self.path = Path(directory) / "manifest.json"
        spec_hash = spec.content_hash()
        if self.path.exists():
            with open(self.path, encoding="utf-8") as f:
                data = json.load(f)
            if data.get("spec_hash") != spec_hash:
                raise ConfigurationError(
                    "store directory belongs to a different sweep spec; "
                    "use a fresh --out directory"
                )
            self.data = data
        else:
            self.data = {
                "sweep": spec.name,
                "spec_hash": spec_hash,
                "code_version": __version__,
                "runs": {},
            }
            self.save()

    def mark(self, run_key: str, status: str, wall_clock_s: float | None = None,
             error: str | None = None) -> None:
        entry: dict = {"status": status}
        if wall_clock_s is not None:
            entry["wall_clock_s"] = wall_clock_s
        if error is not None:
            entry["error"] = error
        self.data["runs"][run_key] = entry
        self.save()

    def status(self, run_key: str) -> str | None:
        entry = self.data["runs"].get(run_key)
        return entry["status"] if entry else None

    def failed_runs(self) -> list:
        return sorted(k for k, v in self.data["runs"].items()
                      if v["status"] == "failed")

    def save(self) -> None:
        tmp = self.path.with_suffix(".json.tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(self.data, f, indent=1, sort_keys=True)
        tmp.replace(self.path)


def run_sweep(spec: SweepSpec, out_dir, parallelism: int = 1,
              progress=None) -> ResultStore:
    """Execute all runs of the sweep not already present in the store."""
    if parallelism < 1:
        raise ConfigurationError("parallelism must be >= 1")
    store = ResultStore(out_dir)
    manifest = RunManifest(out_dir, spec)
    spec_path = store.directory / "spec.json"
    if not spec_path.exists():
        with open(spec_path, "w", encoding="utf-8") as f:
            json.dump(spec.to_dict(), f, indent=1, sort_keys=True)
    tasks = [t for t in plan_runs(spec)
             if not store.has(t.config_id, t.env_name, t.seed_index)]

    def consume(result: dict) -> None:
        if result["error"] is not None:
            manifest.mark(result["run_key"], "failed",
                          wall_clock_s=result["wall_clock_s"],
                          error=result["error"])
        else:
            store.append(result["record"])
            store.write_iteration_log(result["run_key"], result["log_rows"])
            manifest.mark(result["run_key"], "done",
                          wall_clock_s=result["wall_clock_s"])
        if progress is not None:
            progress(result)

    if parallelism == 1:
        for task in tasks:
            consume(execute_run(task))
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(execute_run, task) for task in tasks]
            for future in as_completed(futures):
                consume(future.result())
    return store
