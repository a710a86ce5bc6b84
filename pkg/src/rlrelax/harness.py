"""Experiment orchestration: meta-training over a problem set, budget-matched
evaluation with paired seeds, schedule baselines, leave-one-out and
train/test-split protocols, ablations, and deterministic result files.

Outputs are byte-reproducible for a fixed (config, seed): floats are
written at 17 significant digits, rows are sorted before writing, and all
randomness flows from named integer seed sequences.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import agent as qnet
from .agent import CheckpointMetadata, NetworkParams, ReplayBuffer
from .config import ConfigError, ExperimentConfig
from .env import ActionSpace, EpsilonControlEnv, epsilon_from_action
from .problems import ProblemRegistry, load_shift_table

BASELINES = ("static-eps", "scheduled-eps", "feasibility-rule", "untrained-agent")
ABLATION_VARIANTS = ("no-state", "aa", "ca", "r1", "r2", "r1r2", "no-train")

_SCHEME_BY_VARIANT = {"aa": "linear-aa", "ca": "linear-ca"}

METHOD_TRAINED = "trained-agent"


def _crc(name: str) -> int:
    return zlib.crc32(name.encode())


def _rng(*parts) -> np.random.Generator:
    return np.random.default_rng([p if isinstance(p, int) else _crc(str(p)) for p in parts])


def _registry(cfg: ExperimentConfig) -> ProblemRegistry:
    table = load_shift_table(cfg.shift_file) if cfg.shift_file else None
    return ProblemRegistry(table)


@dataclass
class RunRecord:
    """One optimization run: identity, final score, per-generation trace."""

    problem: str
    dim: int
    method: str
    run: int
    final_sco: float
    steps: list[dict] = field(default_factory=list)


@dataclass
class TrainResult:
    params: NetworkParams
    metadata: CheckpointMetadata
    episodes: list[dict]  # one row per training episode


# ---------------------------------------------------------------------------
# Training (meta-level loop)
# ---------------------------------------------------------------------------

def train(cfg: ExperimentConfig, problems: list[str] | None = None,
          registry: ProblemRegistry | None = None) -> TrainResult:
    """Train the controller over epochs x problems x dims.

    Every meta-step pushes one transition and, once the buffer holds a
    batch, performs one gradient-descent update; the target network is
    refreshed every ``target_sync_period`` gradient steps.  The learning
    rate follows the cosine schedule across epochs.
    """
    cfg.validate()
    names = problems if problems is not None else (cfg.train_problems or cfg.problems)
    if not names:
        raise ConfigError("training requires a non-empty problem list")
    registry = registry or _registry(cfg)
    tc = cfg.train_config()
    space = ActionSpace.for_scheme(cfg.action_scheme)

    instances = [(name, dim) for dim in cfg.dims for name in names]
    steps_per = {(n, d): (cfg.maxfes(d) - cfg.pop_size) // cfg.pop_size for n, d in instances}
    total_steps = tc.max_epoch * sum(steps_per.values())

    params = qnet.init_params(n_out=space.n_actions, rng=_rng(cfg.seed, 101))
    target = params.copy()
    buffer = ReplayBuffer(tc.buffer_capacity)
    actor_rng = _rng(cfg.seed, 103)

    agentbest: dict[tuple[str, int], float] = {}
    episodes: list[dict] = []
    meta_step = 0
    grad_steps = 0

    for epoch in range(tc.max_epoch):
        lr = qnet.cosine_lr(epoch, tc)
        for k, (name, dim) in enumerate(instances):
            problem = registry.lookup(name, dim)
            env = EpsilonControlEnv(
                problem, _rng(cfg.seed, 105, epoch, k),
                n_pop=cfg.pop_size, maxfes=cfg.maxfes(dim), action_space=space,
                delta=cfg.delta, delta_acc=cfg.delta_acc,
                reward_variant=cfg.reward_variant, mask_state=cfg.mask_state,
                lpsr=cfg.lpsr, f_agentbest=agentbest.get((name, dim)),
            )
            state = env.reset()
            ep_return = 0.0
            ep_steps = 0
            while not env.terminal:
                q = qnet.forward(state, params)
                eps_greedy = qnet.explore_rate(meta_step, total_steps, tc)
                action = qnet.act_eps_greedy(q, eps_greedy, actor_rng)
                tr, _ = env.step(action)
                buffer.push(tr)
                if len(buffer) >= tc.batch_size:
                    batch = buffer.sample(tc.batch_size, actor_rng)
                    _, grads = qnet.loss_and_grad(batch, params, target, tc.discount)
                    qnet.sgd_step(params, grads, lr)
                    grad_steps += 1
                    if grad_steps % tc.target_sync_period == 0:
                        qnet.sync_target(params, target)
                state = tr.next_state
                ep_return += tr.reward
                meta_step += 1
                ep_steps += 1
            agentbest[(name, dim)] = env.f_agentbest
            episodes.append({
                "epoch": epoch, "problem": name, "dim": dim,
                "steps": ep_steps, "return": ep_return,
            })

    best = min(agentbest.values()) if agentbest else float("inf")
    metadata = CheckpointMetadata(
        action_scheme=cfg.action_scheme,
        f_agentbest=best,
        seed=cfg.seed,
        epochs=tc.max_epoch,
        extra={
            "problem_set_hash": _hash_instances(names, cfg.dims),
            "reward_variant": cfg.reward_variant,
            "lr_start": f"{tc.lr_start:.17g}",
            "lr_end": f"{tc.lr_end:.17g}",
            "discount": f"{tc.discount:.17g}",
        },
    )
    return TrainResult(params=params, metadata=metadata, episodes=episodes)


def _hash_instances(names: list[str], dims: list[int]) -> int:
    return zlib.crc32(";".join(f"{n}@{d}" for d in dims for n in names).encode())


# ---------------------------------------------------------------------------
# Single runs and evaluation
# ---------------------------------------------------------------------------

def _run_env(cfg: ExperimentConfig, name: str, dim: int, run: int, method: str,
             registry: ProblemRegistry, policy, *, mask_state: bool = False,
             reward_variant: str | None = None,
             f_agentbest: float | None = None) -> RunRecord:
    """One budget-matched run; ``policy(env)`` performs a single meta-step."""
    problem = registry.lookup(name, dim)
    env = EpsilonControlEnv(
        problem, _rng(cfg.seed, dim, run, name),
        n_pop=cfg.pop_size, maxfes=cfg.maxfes(dim),
        action_space=ActionSpace.for_scheme(cfg.action_scheme),
        delta=cfg.delta, delta_acc=cfg.delta_acc,
        reward_variant=reward_variant or cfg.reward_variant,
        mask_state=mask_state, lpsr=cfg.lpsr, f_agentbest=f_agentbest,
    )
    env.reset()
    steps = []
    while not env.terminal:
        _, info = policy(env)
        steps.append(info)
    return RunRecord(problem=name, dim=dim, method=method, run=run,
                     final_sco=steps[-1]["sco"], steps=steps)


def _greedy_policy(params: NetworkParams):
    def policy(env: EpsilonControlEnv):
        return env.step(int(np.argmax(qnet.forward(env.state, params))))
    return policy


def _baseline_policy(cfg: ExperimentConfig, kind: str):
    if kind == "feasibility-rule":
        def policy(env: EpsilonControlEnv):
            return env.step_with_epsilon(np.zeros(env.problem.n_constraints), 0.0)
    elif kind == "static-eps":
        def policy(env: EpsilonControlEnv):
            eps = epsilon_from_action(cfg.static_level, env.eps_base)
            return env.step_with_epsilon(eps, cfg.static_level)
    elif kind == "scheduled-eps":
        def policy(env: EpsilonControlEnv):
            factor = (1.0 - env.budget.fes / env.maxfes) ** cfg.sched_power
            return env.step_with_epsilon(env.eps_base.values * factor, factor)
    else:
        raise ConfigError(f"unknown baseline {kind!r}; valid: {', '.join(BASELINES)}")
    return policy


def evaluate(cfg: ExperimentConfig, params: NetworkParams,
             metadata: CheckpointMetadata | None = None,
             problems: list[str] | None = None,
             registry: ProblemRegistry | None = None,
             method: str = METHOD_TRAINED,
             mask_state: bool | None = None) -> list[RunRecord]:
    """Greedy-policy evaluation: cfg.runs paired-seed runs per (problem, dim)."""
    cfg.validate()
    if metadata is not None:
        if metadata.action_scheme != cfg.action_scheme:
            raise ConfigError(
                f"checkpoint was trained with scheme {metadata.action_scheme!r}, "
                f"config requests {cfg.action_scheme!r}"
            )
        trained_variant = metadata.extra.get("reward_variant")
        if trained_variant is not None and trained_variant != cfg.reward_variant:
            raise ConfigError(
                f"checkpoint was trained with reward variant {trained_variant!r}, "
                f"config requests {cfg.reward_variant!r}"
            )
    names = problems if problems is not None else (cfg.test_problems or cfg.problems)
    if not names:
        raise ConfigError("evaluation requires a non-empty problem list")
    registry = registry or _registry(cfg)
    policy = _greedy_policy(params)
    agentbest = metadata.f_agentbest if metadata is not None else None
    mask = cfg.mask_state if mask_state is None else mask_state
    records = []
    for dim in cfg.dims:
        for name in names:
            for run in range(cfg.runs):
                records.append(_run_env(cfg, name, dim, run, method, registry, policy,
                                        mask_state=mask, f_agentbest=agentbest))
    return records


def run_baseline(cfg: ExperimentConfig, name: str,
                 problems: list[str] | None = None,
                 registry: ProblemRegistry | None = None) -> list[RunRecord]:
    """Evaluate one epsilon-schedule baseline under the shared seeds."""
    cfg.validate()
    if name not in BASELINES:
        raise ConfigError(f"unknown baseline {name!r}; valid: {', '.join(BASELINES)}")
    if name == "untrained-agent":
        space = ActionSpace.for_scheme(cfg.action_scheme)
        params = qnet.init_params(n_out=space.n_actions, rng=_rng(cfg.seed, 101))
        return evaluate(cfg, params, problems=problems, registry=registry,
                        method="untrained-agent")
    names = problems if problems is not None else (cfg.test_problems or cfg.problems)
    if not names:
        raise ConfigError("baseline evaluation requires a non-empty problem list")
    registry = registry or _registry(cfg)
    method = name if name != "static-eps" else f"static-eps[{cfg.static_level:g}]"
    if name == "scheduled-eps":
        method = f"scheduled-eps[{cfg.sched_power:g}]"
    policy = _baseline_policy(cfg, name)
    records = []
    for dim in cfg.dims:
        for pname in names:
            for run in range(cfg.runs):
                records.append(_run_env(cfg, pname, dim, run, method, registry, policy))
    return records


# ---------------------------------------------------------------------------
# Protocols
# ---------------------------------------------------------------------------

def leave_one_out(cfg: ExperimentConfig, out_dir) -> list[RunRecord]:
    """For each problem: train on the rest, evaluate on the held-out one."""
    cfg.validate()
    names = cfg.problems
    if len(names) < 2:
        raise ConfigError("leave-one-out needs at least two problems")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    registry = _registry(cfg)
    all_records: list[RunRecord] = []
    train_log: list[dict] = []
    for held_out in names:
        rest = [n for n in names if n != held_out]
        result = train(cfg, problems=rest, registry=registry)
        for row in result.episodes:
            assert row["problem"] != held_out, "held-out problem leaked into training"
            train_log.append({"holdout": held_out, **row})
        ckpt_path = out / f"checkpoint_{_safe_name(held_out)}.txt"
        qnet.save_checkpoint(result.params, result.metadata, ckpt_path)
        all_records.extend(
            evaluate(cfg, result.params, result.metadata, problems=[held_out],
                     registry=registry)
        )
    write_records_jsonl(all_records, out / "records.jsonl")
    write_jsonl(train_log, out / "train_log.jsonl")
    write_table_csv(aggregate_table(all_records), out / "loo_results.csv")
    return all_records


def split_protocol(cfg: ExperimentConfig, train_names: list[str],
                   test_names: list[str], out_dir) -> list[RunRecord]:
    """Train once on train_names, evaluate on the disjoint test_names."""
    cfg.validate()
    if not train_names or not test_names:
        raise ConfigError("split protocol needs non-empty train and test lists")
    overlap = set(train_names) & set(test_names)
    if overlap:
        raise ConfigError(f"train/test lists overlap: {sorted(overlap)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    registry = _registry(cfg)
    result = train(cfg, problems=train_names, registry=registry)
    for row in result.episodes:
        assert row["problem"] not in test_names, "test problem leaked into training"
    qnet.save_checkpoint(result.params, result.metadata, out / "checkpoint.txt")
    records = evaluate(cfg, result.params, result.metadata, problems=test_names,
                       registry=registry)
    write_records_jsonl(records, out / "records.jsonl")
    write_jsonl(result.episodes, out / "train_log.jsonl")
    write_table_csv(aggregate_table(records), out / "split_results.csv")
    return records


def ablate(cfg: ExperimentConfig, variant: str, out_dir) -> list[RunRecord]:
    """Compare the full method against one ablated configuration.

    no-state masks the constraint features at evaluation only; aa/ca
    retrain under the linear adjustment schemes; r1/r2/r1r2 retrain with
    the reduced rewards; no-train evaluates a freshly initialized network.
    All variants share evaluation seeds with the full method.
    """
    cfg.validate()
    if variant not in ABLATION_VARIANTS:
        raise ConfigError(
            f"unknown ablation {variant!r}; valid: {', '.join(ABLATION_VARIANTS)}"
        )
    if not cfg.train_problems or not cfg.test_problems:
        raise ConfigError("ablation needs train_problems and test_problems")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    registry = _registry(cfg)

    full = train(cfg, problems=cfg.train_problems, registry=registry)
    records = evaluate(cfg, full.params, full.metadata, problems=cfg.test_problems,
                       registry=registry, method=METHOD_TRAINED)

    if variant == "no-state":
        records += evaluate(cfg, full.params, full.metadata, problems=cfg.test_problems,
                            registry=registry, method="no-state", mask_state=True)
    elif variant == "no-train":
        records += [r for r in run_baseline(cfg, "untrained-agent",
                                            problems=cfg.test_problems, registry=registry)]
        for r in records:
            if r.method == "untrained-agent":
                r.method = "no-train"
    elif variant in _SCHEME_BY_VARIANT:
        import copy

        alt = copy.deepcopy(cfg)
        alt.action_scheme = _SCHEME_BY_VARIANT[variant]
        alt_result = train(alt, problems=alt.train_problems, registry=registry)
        records += evaluate(alt, alt_result.params, alt_result.metadata,
                            problems=alt.test_problems, registry=registry, method=variant)
    else:  # reward variants
        import copy

        alt = copy.deepcopy(cfg)
        alt.reward_variant = variant
        alt_result = train(alt, problems=alt.train_problems, registry=registry)
        records += evaluate(alt, alt_result.params, alt_result.metadata,
                            problems=alt.test_problems, registry=registry, method=variant)

    write_records_jsonl(records, out / "records.jsonl")
    write_table_csv(aggregate_table(records), out / f"ablate_{variant}.csv")
    return records


# ---------------------------------------------------------------------------
# Aggregation and persistence
# ---------------------------------------------------------------------------

def aggregate_table(records: list[RunRecord]) -> list[dict]:
    """mean / std / min of final score per (problem, dim, method)."""
    groups: dict[tuple, list[float]] = {}
    for r in records:
        groups.setdefault((r.problem, r.dim, r.method), []).append(r.final_sco)
    rows = []
    for (problem, dim, method), scores in sorted(groups.items()):
        arr = np.array(scores)
        rows.append({
            "problem": problem, "dim": dim, "method": method,
            "mean": float(arr.mean()), "std": float(arr.std()),
            "min": float(arr.min()), "runs": arr.size,
        })
    return rows


def _fmt(v) -> str:
    return f"{v:.17g}" if isinstance(v, float) else str(v)


def write_table_csv(rows: list[dict], path) -> None:
    header = ["problem", "dim", "method", "mean", "std", "min", "runs"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in header))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_jsonl(rows: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def write_records_jsonl(records: list[RunRecord], path) -> None:
    """Per-generation trace lines, one JSON object per meta-step."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            for s in r.steps:
                fh.write(json.dumps({
                    "problem": r.problem, "dim": r.dim, "method": r.method,
                    "run": r.run, "step": s["step"], "fes": s["fes"],
                    "level": s["level"], "eps_min": s["eps_min"],
                    "eps_mean": s["eps_mean"], "eps_max": s["eps_max"],
                    "reward": s["reward"], "sco": s["sco"],
                }) + "\n")


def load_records_jsonl(path) -> list[RunRecord]:
    """Rebuild RunRecords from a trace file written by write_records_jsonl."""
    runs: dict[tuple, RunRecord] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            key = (row["problem"], row["dim"], row["method"], row["run"])
            if key not in runs:
                runs[key] = RunRecord(problem=row["problem"], dim=row["dim"],
                                      method=row["method"], run=row["run"],
                                      final_sco=row["sco"])
            runs[key].steps.append(row)
            runs[key].final_sco = row["sco"]
    return list(runs.values())


def export_curves(records: list[RunRecord], out_dir, stem: str = "curves") -> tuple[Path, Path]:
    """Write per-generation traces plus per-problem normalized mean curves.

    Normalization pools every intermediate and final score of a (problem,
    dim) across all methods and runs, then min-max rescales; a zero range
    maps everything to zero.  The CSV holds one row per (problem, dim,
    method, step) with the run-mean of the normalized score.
    """
    if not records:
        raise ValueError("no records to export")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jsonl_path = out / f"{stem}.jsonl"
    write_records_jsonl(records, jsonl_path)

    bounds: dict[tuple, tuple[float, float]] = {}
    for r in records:
        scores = [s["sco"] for s in r.steps]
        lo, hi = min(scores), max(scores)
        key = (r.problem, r.dim)
        if key in bounds:
            bounds[key] = (min(bounds[key][0], lo), max(bounds[key][1], hi))
        else:
            bounds[key] = (lo, hi)

    series: dict[tuple, dict[int, list[float]]] = {}
    fes_of: dict[tuple, int] = {}
    for r in records:
        lo, hi = bounds[(r.problem, r.dim)]
        span = hi - lo
        for s in r.steps:
            norm = (s["sco"] - lo) / span if span > 0 else 0.0
            key = (r.problem, r.dim, r.method)
            series.setdefault(key, {}).setdefault(s["step"], []).append(norm)
            fes_of[(r.problem, r.dim, s["step"])] = s["fes"]

    lines = ["problem,dim,method,step,fes,norm_sco"]
    for (problem, dim, method) in sorted(series):
        for step in sorted(series[(problem, dim, method)]):
            vals = series[(problem, dim, method)][step]
            fes = fes_of[(problem, dim, step)]
            lines.append(
                f"{problem},{dim},{method},{step},{fes},{_fmt(float(np.mean(vals)))}"
            )
    csv_path = out / f"{stem}.csv"
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return jsonl_path, csv_path


def _safe_name(name: str) -> str:
    return name.replace("/", "_")
