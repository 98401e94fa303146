"""Experiment runner: train conjectures, play the dynamics, analyze outcomes.

Verbs:
    train      build datasets and fit every run's conjecture models
    play       run each labelled dynamics configuration and dump traces
    analyze    equilibrium reports, comparison table, bound checks, references
    reproduce  train + play + analyze with a shipped experiment config

Every artifact lands in the configured output directory; reruns with the
same seed overwrite files with byte-identical content. Exit codes: 0 on
success, 2 for configuration or usage problems, 3 for numeric failures.
"""
from __future__ import annotations

import argparse
import copy
import json
import sys
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from . import analysis, dynamics, games, training
from .conjectures import (
    Affine,
    ConjectureSet,
    LeaderConjectures,
    NeuralNet,
    ParseError,
    Polynomial,
    deserialize,
    dumps_document,
    serialize,
)
from ._io import atomic_write_text, write_csv

USAGE_ERROR = 2
NUMERIC_ERROR = 3

DEFAULT_TRAIN = {
    "samples": 2000,
    "noise_std": 0.1,
    "batch_size": 32,
    "epochs": 200,
    "learning_rate": 0.01,
}
DEFAULT_PLAY = {
    "iterations": 5000,
    "schedule": {"kind": "robbins_monro", "eta0": 0.01, "alpha": 0.6},
    "gradient_noise_std": 0.0,
    "stop_tolerance": 0.0,
    "initial": "center",
}


def derive_seed(base: int, tag: str) -> int:
    """Stable per-purpose stream: base seed XOR a CRC of the purpose tag."""
    return (int(base) ^ zlib.crc32(tag.encode())) & 0x7FFFFFFF


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunSpec:
    label: str
    algorithm: str
    mode: str
    conjecture: dict | None
    train: dict
    play: dict


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    out_dir: str
    game: dict
    runs: tuple[RunSpec, ...]

    def effective_document(self) -> dict:
        return {
            "version": 1,
            "seed": self.seed,
            "out_dir": self.out_dir,
            "game": self.game,
            "runs": [
                {
                    "label": r.label,
                    "algorithm": r.algorithm,
                    "mode": r.mode,
                    **({"conjecture": r.conjecture} if r.conjecture is not None else {}),
                    "train": r.train,
                    "play": r.play,
                }
                for r in self.runs
            ],
        }


def _fail(path: str, reason: str) -> None:
    raise games.ConfigError(f"{path}: {reason}")


def _require(doc: dict, key: str, path: str) -> Any:
    if not isinstance(doc, dict) or key not in doc:
        _fail(path, f"missing field {key!r}")
    return doc[key]


def load_config(doc: dict) -> ExperimentConfig:
    """Validate a raw config document and resolve defaults into every run."""
    if not isinstance(doc, dict):
        _fail("$", "config must be an object")
    if doc.get("version", 1) != 1:
        _fail("$.version", f"unsupported config version {doc.get('version')!r}")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        _fail("$.seed", "expected an integer")
    out_dir = doc.get("out_dir", "runs/experiment")
    game_doc = _require(doc, "game", "$")
    name = _require(game_doc, "name", "$.game")
    if name not in games.BUILTIN_GAMES:
        _fail("$.game.name", f"unknown game {name!r}; choices: {sorted(games.BUILTIN_GAMES)}")
    shared_train = {**DEFAULT_TRAIN, **doc.get("train", {})}
    shared_play = {**DEFAULT_PLAY, **doc.get("play", {})}
    runs_doc = _require(doc, "runs", "$")
    if not isinstance(runs_doc, list) or not runs_doc:
        _fail("$.runs", "expected a non-empty list of run specs")
    runs = []
    seen = set()
    for idx, run_doc in enumerate(runs_doc):
        path = f"$.runs[{idx}]"
        label = _require(run_doc, "label", path)
        if label in seen:
            _fail(f"{path}.label", f"duplicate label {label!r}")
        seen.add(label)
        algorithm = run_doc.get("algorithm", "costal")
        if algorithm not in ("costal", "gd"):
            _fail(f"{path}.algorithm", f"unknown algorithm {algorithm!r}")
        mode = run_doc.get("mode", "stackelberg")
        if mode not in (dynamics.STACKELBERG, dynamics.SIMULTANEOUS):
            _fail(f"{path}.mode", f"unknown mode {mode!r}")
        conjecture = run_doc.get("conjecture")
        if algorithm == "costal":
            if conjecture is None:
                _fail(f"{path}.conjecture", "conjectured play needs a conjecture spec")
            kind = _require(conjecture, "kind", f"{path}.conjecture")
            if kind not in ("affine", "polynomial", "neural"):
                _fail(f"{path}.conjecture.kind", f"unknown kind {kind!r}")
        train = {**shared_train, **run_doc.get("train", {})}
        play = {**shared_play, **run_doc.get("play", {})}
        # Fail fast on bad numbers; the real objects are rebuilt later.
        _train_config(train, seed)
        _schedule_from(play.get("schedule"), f"{path}.play.schedule")
        runs.append(
            RunSpec(
                label=label,
                algorithm=algorithm,
                mode=mode,
                conjecture=copy.deepcopy(conjecture),
                train=train,
                play=play,
            )
        )
    return ExperimentConfig(seed=seed, out_dir=out_dir, game=copy.deepcopy(game_doc), runs=tuple(runs))


def load_config_file(path: Path | str) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise games.ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise games.ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return load_config(doc)


def build_game(game_doc: dict, mode: str) -> games.GameSpec:
    import dataclasses

    name = game_doc["name"]
    skip = {"name", "m1", "m2"}
    if name == "leaders_dilemma":
        game = games.leaders_dilemma(
            k=game_doc.get("k", -1.5),
            lower=game_doc.get("lower", -2.0),
            upper=game_doc.get("upper", 2.0),
        )
    elif name == "olsder":
        game = games.olsder(mode=mode, cap=game_doc.get("cap", 400.0))
    else:
        game = games.linear_quadratic(**{k: v for k, v in game_doc.items() if k not in skip})
    if "m1" in game_doc or "m2" in game_doc:
        game = dataclasses.replace(
            game,
            lipschitz_objective=game_doc.get("m1"),
            lipschitz_response=game_doc.get("m2"),
        )
    return game


def _train_config(train_doc: dict, seed: int, tag: str = "train") -> training.TrainConfig:
    return training.TrainConfig(
        samples=train_doc["samples"],
        noise_std=train_doc["noise_std"],
        batch_size=train_doc["batch_size"],
        epochs=train_doc["epochs"],
        learning_rate=train_doc["learning_rate"],
        seed=derive_seed(seed, tag),
    )


def _schedule_from(doc: Any, path: str) -> dynamics.StepSchedule:
    if not isinstance(doc, dict):
        _fail(path, "expected a schedule object")
    kind = doc.get("kind")
    if kind == "constant":
        return dynamics.ConstantStep(eta=doc.get("eta", 0.01))
    if kind == "robbins_monro":
        return dynamics.RobbinsMonroStep(eta0=doc.get("eta0", 0.01), alpha=doc.get("alpha", 0.6))
    _fail(f"{path}.kind", f"unknown schedule kind {kind!r}")


def _play_config(run: RunSpec, seed: int) -> dynamics.PlayConfig:
    play = run.play
    return dynamics.PlayConfig(
        iterations=play["iterations"],
        schedule=_schedule_from(play["schedule"], f"run {run.label} schedule"),
        mode=run.mode,
        gradient_noise_std=play["gradient_noise_std"],
        seed=derive_seed(seed, f"play.{run.label}"),
        stop_tolerance=play["stop_tolerance"],
    )


def _initial_profile(game: games.GameSpec, play_doc: dict) -> tuple[float, ...]:
    initial = play_doc.get("initial", "center")
    if initial == "center":
        return tuple(0.5 * (b.lower + b.upper) for b in game.boxes)
    if isinstance(initial, (int, float)):
        return tuple(float(initial) for _ in game.boxes)
    values = tuple(float(v) for v in initial)
    if len(values) != game.leader_count:
        raise games.ConfigError(
            f"initial profile has {len(values)} entries, game needs {game.leader_count}"
        )
    return values


def build_conjecture_set(
    game: games.GameSpec, spec: dict, seed: int, label: str
) -> ConjectureSet:
    """One model per (leader, target) slot, all of the run's configured kind.

    Fixed-form polynomials (explicit coefficients) are frozen unless the
    spec says otherwise; affine/neural models start trainable.
    """
    kind = spec["kind"]
    n = game.leader_count
    has_follower = game.follower is not None

    def make(slot: int):
        if kind == "affine":
            model = Affine(spec.get("a", 0.0), spec.get("b", 0.0))
            model.trainable = not spec.get("frozen", False)
            return model
        if kind == "polynomial":
            if "coefficients" in spec:
                coeffs = tuple(float(c) for c in spec["coefficients"])
                return Polynomial(coeffs, trainable=not spec.get("frozen", True))
            degree = spec.get("degree", 1)
            return Polynomial(tuple(0.0 for _ in range(degree + 1)),
                              trainable=not spec.get("frozen", False))
        width = spec.get("hidden_width", 10)
        return NeuralNet.initialize(
            width,
            seed=derive_seed(seed, f"init.{label}.{slot}"),
            trainable=not spec.get("frozen", False),
        )

    leaders = []
    slot = 0
    for i in range(n):
        about = {}
        for j in range(n):
            if j != i:
                about[j] = make(slot)
                slot += 1
        follower = None
        if has_follower:
            follower = make(slot)
            slot += 1
        leaders.append(LeaderConjectures(about=about, follower=follower))
    return ConjectureSet(leaders)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _select_runs(config: ExperimentConfig, labels: Sequence[str] | None) -> list[RunSpec]:
    if not labels:
        return list(config.runs)
    by_label = {r.label: r for r in config.runs}
    missing = [l for l in labels if l not in by_label]
    if missing:
        raise games.ConfigError(f"labels not in config: {missing}")
    return [by_label[l] for l in labels]


def _echo_config(config: ExperimentConfig, out: Path) -> None:
    atomic_write_text(
        out / "effective_config.json",
        json.dumps(config.effective_document(), indent=2, sort_keys=True) + "\n",
    )


def cmd_train(config: ExperimentConfig, out: Path, labels: Sequence[str] | None = None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    _echo_config(config, out)
    runs = [r for r in _select_runs(config, labels) if r.algorithm == "costal"]
    sample_cache: dict[tuple[str, int], list[training.SampleSet]] = {}
    for run in runs:
        game = build_game(config.game, run.mode)
        train_cfg = _train_config(run.train, config.seed, f"samples.{run.mode}")
        cache_key = (run.mode, train_cfg.samples)
        if cache_key not in sample_cache:
            sample_cache[cache_key] = training.generate_samples(game, train_cfg)
            write_csv(out / f"samples_{run.mode}.csv",
                      training.samples_to_rows(sample_cache[cache_key]))
        conjectures = build_conjecture_set(game, run.conjecture, config.seed, run.label)
        fit_cfg = _train_config(run.train, config.seed, f"train.{run.label}")
        _, losses = training.train_conjectures(sample_cache[cache_key], conjectures, fit_cfg)
        atomic_write_text(
            out / f"conjectures_{run.label}.json",
            dumps_document(serialize(conjectures)) + "\n",
        )
        write_csv(out / f"loss_{run.label}.csv", training.losses_to_rows(losses))


def _load_conjectures(path: Path) -> ConjectureSet:
    if not path.exists():
        raise games.ConfigError(f"missing conjectures file {path}; run `train` first")
    return deserialize(json.loads(path.read_text()))


def cmd_play(
    config: ExperimentConfig,
    out: Path,
    labels: Sequence[str] | None = None,
    conjectures_dir: Path | None = None,
) -> None:
    out.mkdir(parents=True, exist_ok=True)
    _echo_config(config, out)
    source = conjectures_dir or out
    finals = []
    for run in _select_runs(config, labels):
        game = build_game(config.game, run.mode)
        cfg = _play_config(run, config.seed)
        x0 = _initial_profile(game, run.play)
        if run.algorithm == "gd":
            trace = dynamics.gd_baseline_run(game, cfg, x0)
        else:
            conjectures = _load_conjectures(source / f"conjectures_{run.label}.json")
            trace = dynamics.costal_run(game, conjectures, cfg, x0)
        write_csv(out / f"trace_{run.label}.csv", trace.to_rows())
        finals.append((run, game, trace))
    rows = [["label", "mode", "algorithm", "x_1", "x_2", "y", "f_1", "f_2"]]
    for run, game, trace in finals:
        final = trace.final
        actions = analysis._player_actions_at(
            game, games.StrategyProfile(final.actions, final.follower)
        )
        objectives = analysis.final_player_objectives(game, trace)
        pad = lambda seq: [repr(v) for v in seq] + [""] * (2 - len(seq))
        y_cell = "" if final.follower is None else repr(final.follower)
        rows.append([run.label, run.mode, run.algorithm, *pad(actions), y_cell, *pad(objectives)])
    write_csv(out / "final_profiles.csv", rows)


def _references_for(config: ExperimentConfig):
    name = config.game["name"]
    if name == "olsder":
        return analysis.olsder_reference()
    if name == "leaders_dilemma":
        return analysis.dilemma_reference(config.game.get("k", -1.5))
    return None


def _references_rows(refs) -> list[list[str]]:
    rows = [["name", "x1", "x2", "f1", "f2"]]
    if isinstance(refs, analysis.ReferenceEquilibria):
        for name, point in refs.entries.items():
            rows.append(
                [name, repr(point.actions[0]), repr(point.actions[1]),
                 repr(point.objectives[0]), repr(point.objectives[1])]
            )
    else:
        rows.append(["saddle", "0.0", "0.0", "0.0", "0.0"])
        rows.append(
            ["separation", repr(refs.separation), repr(refs.separation),
             repr(refs.payoff), repr(refs.payoff)]
        )
    return rows


def cmd_analyze(
    config: ExperimentConfig,
    out: Path,
    labels: Sequence[str] | None = None,
    trace_paths: Sequence[Path] | None = None,
) -> None:
    out.mkdir(parents=True, exist_ok=True)
    runs = _select_runs(config, labels)
    refs = _references_for(config)
    if refs is not None:
        write_csv(out / "references.csv", _references_rows(refs))

    traces: list[tuple[RunSpec, games.GameSpec, dynamics.RunTrace]] = []
    explicit = {p.name: p for p in (trace_paths or [])}
    for run in runs:
        path = explicit.get(f"trace_{run.label}.csv", out / f"trace_{run.label}.csv")
        if not Path(path).exists():
            raise games.ConfigError(f"missing trace for {run.label!r}: {path}")
        trace = dynamics.read_trace_csv(path)
        traces.append((run, build_game(config.game, run.mode), trace))

    # Comparison table across all labels.
    summary_lines = []
    if refs is not None:
        rows = []
        for run, game, trace in traces:
            rows.extend(analysis.compare_runs(game, [(run.label, trace)], refs))
        ref_names = sorted(rows[0].deltas) if rows else []
        flag_names = sorted(rows[0].flags) if rows else []
        table = [["label", "f_1", "f_2"]
                 + [f"delta_{n}_{p}" for n in ref_names for p in (1, 2)]
                 + flag_names]
        for row in rows:
            pad2 = list(row.objectives) + [float("nan")] * (2 - len(row.objectives))
            cells = [row.label] + [repr(v) for v in pad2]
            for name in ref_names:
                deltas = list(row.deltas[name]) + [float("nan")] * (2 - len(row.deltas[name]))
                cells += [repr(v) for v in deltas]
            cells += [str(row.flags[n]).lower() for n in flag_names]
            table.append(cells)
        write_csv(out / "comparison.csv", table)
        summary_lines.append("final objectives and reference flags: comparison.csv")

    # Equilibrium report per conjectured run.
    report_rows = [
        ["label", "leader", "grad_norm", "projected_residual", "second_derivative",
         "second_order_ok", "follower_residual", "max_consistency_gap",
         "cse_candidate", "ccse_candidate"]
    ]
    gap_rows = [["label", "owner", "target", "gap"]]
    for run, game, trace in traces:
        if run.algorithm != "costal":
            continue
        conjectures = _load_conjectures(out / f"conjectures_{run.label}.json")
        final = trace.final
        profile = games.StrategyProfile(final.actions, final.follower)
        ref_entries = refs if isinstance(refs, analysis.ReferenceEquilibria) else None
        report = analysis.equilibrium_report(game, conjectures, profile, ref_entries)
        worst_gap = max(report.consistency_gaps.values()) if report.consistency_gaps else 0.0
        for (owner, target), gap in sorted(
            report.consistency_gaps.items(), key=lambda kv: (kv[0][0], kv[0][1] is None, kv[0][1] or 0)
        ):
            gap_rows.append(
                [run.label, str(owner), "y" if target is None else str(target), repr(gap)]
            )
        for i in range(game.leader_count):
            report_rows.append(
                [
                    run.label,
                    str(i),
                    repr(report.residual.gradient_norms[i]),
                    repr(report.residual.projected_residuals[i]),
                    repr(report.residual.second_derivatives[i]),
                    str(report.residual.second_order_ok[i]).lower(),
                    "" if report.residual.follower_residual is None
                    else repr(report.residual.follower_residual),
                    repr(worst_gap),
                    str(report.cse_candidate).lower(),
                    str(report.ccse_candidate).lower(),
                ]
            )
        summary_lines.append(
            f"{run.label}: cse={report.cse_candidate} ccse={report.ccse_candidate} "
            f"max_gap={worst_gap:.3e}"
        )
    write_csv(out / "equilibrium_report.csv", report_rows)
    write_csv(out / "consistency_gaps.csv", gap_rows)

    # Objective-gap bound between the anticipating-leader reference point and
    # every conjectured run, for games with a follower.
    bound_rows = [["label", "lhs_max", "rhs", "holds"]]
    for run, game, trace in traces:
        if run.algorithm != "costal" or game.follower is None:
            continue
        m1, m2 = analysis.estimate_lipschitz(game, samples=1000,
                                             seed=derive_seed(config.seed, "lipschitz"))
        if isinstance(refs, analysis.ReferenceEquilibria):
            anchor = refs.entries["SE"].actions[: game.leader_count]
        elif refs is not None:
            half = refs.separation / 2.0
            anchor = (-half, half)
        else:
            continue
        check = analysis.bound_check(game, anchor, trace.final.actions, m1, m2)
        bound_rows.append([run.label, repr(max(check.lhs)), repr(check.rhs),
                           str(check.holds).lower()])
        summary_lines.append(f"{run.label}: bound holds={check.holds}")
    write_csv(out / "bound_check.csv", bound_rows)
    atomic_write_text(out / "summary.txt", "\n".join(summary_lines) + "\n")


# ---------------------------------------------------------------------------
# Shipped experiment configurations
# ---------------------------------------------------------------------------

OLSDER_CONFIG = {
    "version": 1,
    "seed": 7,
    "out_dir": "runs/olsder",
    "game": {"name": "olsder", "cap": 400.0},
    "train": {"samples": 3000, "noise_std": 0.5, "batch_size": 64,
              "epochs": 200, "learning_rate": 0.05},
    "play": {"iterations": 5000,
             "schedule": {"kind": "robbins_monro", "eta0": 0.02, "alpha": 0.6},
             "gradient_noise_std": 0.0, "stop_tolerance": 0.0, "initial": 200.0},
    "runs": [
        {"label": "N_GD", "algorithm": "gd", "mode": "simultaneous",
         "play": {"schedule": {"kind": "robbins_monro", "eta0": 0.01, "alpha": 0.6}}},
        {"label": "S_GD", "algorithm": "gd", "mode": "stackelberg",
         "play": {"schedule": {"kind": "robbins_monro", "eta0": 0.01, "alpha": 0.6}}},
        {"label": "N_affine", "algorithm": "costal", "mode": "simultaneous",
         "conjecture": {"kind": "affine"}},
        {"label": "S_affine", "algorithm": "costal", "mode": "stackelberg",
         "conjecture": {"kind": "affine"}},
        {"label": "N_NN_10", "algorithm": "costal", "mode": "simultaneous",
         "conjecture": {"kind": "neural", "hidden_width": 10},
         "train": {"epochs": 2500}},
        {"label": "S_NN_10", "algorithm": "costal", "mode": "stackelberg",
         "conjecture": {"kind": "neural", "hidden_width": 10},
         "train": {"epochs": 2500}},
    ],
}

DILEMMA_CONFIG = {
    "version": 1,
    "seed": 2,
    "out_dir": "runs/dilemma",
    "game": {"name": "leaders_dilemma", "k": -1.5},
    "train": {"samples": 2000, "noise_std": 0.1, "batch_size": 32,
              "epochs": 300, "learning_rate": 0.01},
    "play": {"iterations": 10000,
             "schedule": {"kind": "robbins_monro", "eta0": 0.3, "alpha": 0.6},
             "gradient_noise_std": 0.01, "stop_tolerance": 0.0, "initial": 0.5},
    "runs": [
        {"label": "GD", "algorithm": "gd", "mode": "stackelberg",
         "play": {"gradient_noise_std": 0.0,
                  "schedule": {"kind": "robbins_monro", "eta0": 0.05, "alpha": 0.6}}},
        {"label": "quadratic", "algorithm": "costal", "mode": "stackelberg",
         "conjecture": {"kind": "polynomial", "coefficients": [0.0, 0.0, 1.0]}},
        {"label": "quadratic_11", "algorithm": "costal", "mode": "stackelberg",
         "conjecture": {"kind": "polynomial", "coefficients": [0.0, 1.0, 1.0]}},
        {"label": "NN_5", "algorithm": "costal", "mode": "stackelberg",
         "conjecture": {"kind": "neural", "hidden_width": 5}},
        {"label": "NN_10", "algorithm": "costal", "mode": "stackelberg",
         "conjecture": {"kind": "neural", "hidden_width": 10}},
    ],
}

EXPERIMENTS = {"dilemma": DILEMMA_CONFIG, "olsder": OLSDER_CONFIG}


def cmd_reproduce(
    name: str,
    out: Path | None = None,
    seed: int | None = None,
    labels: Sequence[str] | None = None,
) -> Path:
    if name not in EXPERIMENTS:
        raise games.ConfigError(
            f"unknown experiment {name!r}; choices: {sorted(EXPERIMENTS)}"
        )
    doc = copy.deepcopy(EXPERIMENTS[name])
    if seed is not None:
        doc["seed"] = seed
    if out is not None:
        doc["out_dir"] = str(out)
    config = load_config(doc)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out_dir / "config.json",
                      json.dumps(doc, indent=2, sort_keys=True) + "\n")
    cmd_train(config, out_dir, labels)
    cmd_play(config, out_dir, labels)
    cmd_analyze(config, out_dir, labels)
    return out_dir


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conjstack", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="experiment config JSON")
        p.add_argument("--out", default=None, help="output directory (default: config out_dir)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--labels", default=None,
                       help="comma-separated run labels to restrict to")

    common(sub.add_parser("train", help="generate datasets and fit conjectures"))
    play = sub.add_parser("play", help="run the labelled dynamics")
    common(play)
    play.add_argument("--conjectures-dir", default=None,
                      help="directory holding conjectures_<label>.json (default: --out)")
    analyze = sub.add_parser("analyze", help="reports, comparisons, bound checks")
    common(analyze)
    analyze.add_argument("traces", nargs="*", help="explicit trace CSV paths")
    rep = sub.add_parser("reproduce", help="train + play + analyze a shipped experiment")
    rep.add_argument("experiment", help="experiment name: dilemma or olsder")
    rep.add_argument("--out", default=None)
    rep.add_argument("--seed", type=int, default=None)
    rep.add_argument("--labels", default=None)
    return parser


def _config_from_args(args) -> tuple[ExperimentConfig, Path, list[str] | None]:
    config = load_config_file(args.config)
    if args.seed is not None:
        doc = config.effective_document()
        doc["seed"] = args.seed
        config = load_config(doc)
    out = Path(args.out) if args.out else Path(config.out_dir)
    labels = args.labels.split(",") if args.labels else None
    return config, out, labels


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        if args.command == "reproduce":
            labels = args.labels.split(",") if args.labels else None
            out = Path(args.out) if args.out else None
            cmd_reproduce(args.experiment, out, args.seed, labels)
        else:
            config, out, labels = _config_from_args(args)
            if args.command == "train":
                cmd_train(config, out, labels)
            elif args.command == "play":
                source = Path(args.conjectures_dir) if args.conjectures_dir else None
                cmd_play(config, out, labels, source)
            elif args.command == "analyze":
                cmd_analyze(config, out, labels,
                            [Path(p) for p in args.traces] or None)
        return 0
    except (games.ConfigError, games.DomainError, ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (games.SolverError, training.TrainingError, dynamics.DivergenceError, ValueError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return NUMERIC_ERROR


if __name__ == "__main__":
    sys.exit(main())
