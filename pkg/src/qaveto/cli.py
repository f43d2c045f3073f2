"""Command-line front end.

Subcommands: run, sweep-noise, efficiency-table, attack-sim,
iteration-profile. Settings come from defaults, then an optional JSON file
(``--config``), then flags; the effective configuration is printed to stderr.
Exit codes: 0 success, 2 eavesdrop abort, 3 configuration error,
4 internal invariant violation, 1 unreadable or unwritable file.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np

from .adversary import Attack, detection_experiment, expected_detection
from .analysis import (
    EFFICIENCY_COLUMNS,
    FIDELITY_COLUMNS,
    NoiseSweep,
    efficiency_rows,
    efficiency_table,
    eta_grid,
    fidelity_rows,
    iteration_profile,
    noise_sweep,
    table_formula,
    to_csv,
)
from .errors import ConfigError, InvariantViolation
from .primitives.decoys import DecoyConfig
from .protocols import PROTOCOLS, ProtocolConfig, VoteVector, run_protocol
from .qsim import make_channel

EXIT_OK, EXIT_IO, EXIT_ABORT, EXIT_CONFIG, EXIT_INVARIANT = 0, 1, 2, 3, 4
FORMATS = ("csv", "structured-log", "pretty")

# every setting a subcommand reads, with its default
PROTOCOL_KEYS = {
    "protocol": None, "voters": 4, "votes": None, "veto_count": None, "l": 10, "key_method": None,
    "noise": None, "eta": 0.0, "decoy_ratio": 1.0, "decoy_subroutine": "bb84_decoys", "threshold": 0.0,
    "delta0": 0.0, "m": None, "travel": None, "state": None, "qds": False,
}
ATTACK_KEYS = {"attack": None, "beta2": 0.5, "ancilla_basis": "diagonal", "segment_fraction": 1.0,
               "qubit_fraction": 1.0}
COMMON_KEYS = {"seed": None, "output": None, "format": None, "workers": 1}
COMMAND_KEYS = {
    "run": {**PROTOCOL_KEYS, **ATTACK_KEYS, "trials": 1, "transcript": None},
    "sweep-noise": {"protocol": None, "channel": "amplitude", "eta_start": 0.0, "eta_stop": 0.9,
                    "eta_step": 0.1, "voters": 4, "l": 1, "method": "exact_enumeration", "trials": 1000},
    "efficiency-table": {"voters": 4, "l": 10, "delta0": 1, "delta1": 1, "ring_l": 2, "m": None},
    "attack-sim": {**PROTOCOL_KEYS, **ATTACK_KEYS, "target": "decoy", "decoys": 20, "trials": 100000,
                   "engine": "vectorized", "labels": "01+-"},
    "iteration-profile": {"protocol": None, "voters": 4},
}
DEFAULT_FORMAT = {"run": "pretty", "sweep-noise": "csv", "efficiency-table": "csv", "attack-sim": "pretty",
                  "iteration-profile": "csv"}


def _protocol_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--protocol", choices=PROTOCOLS)
    p.add_argument("--voters", type=int)
    p.add_argument("--votes", help="explicit vote bitstring, e.g. 0110")
    p.add_argument("--veto-count", type=int, help="k vetoes placed uniformly at random")
    p.add_argument("--l", type=int, help="key length, copies or iteration budget")
    p.add_argument("--key-method")
    p.add_argument("--noise", choices=("amplitude", "phase"))
    p.add_argument("--eta", type=float)
    p.add_argument("--decoy-ratio", type=float)
    p.add_argument("--decoy-subroutine", choices=("bb84_decoys", "gv_decoys"))
    p.add_argument("--threshold", type=float, help="decoy error-rate threshold")
    p.add_argument("--delta0", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--travel", type=int)
    p.add_argument("--state", choices=("bell", "ghz", "cluster4"))
    p.add_argument("--qds", action="store_const", const=True)


def _attack_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--attack", choices=("intercept_resend", "entangle_measure"))
    p.add_argument("--beta2", type=float, help="|beta|^2 of Eve's ancilla")
    p.add_argument("--ancilla-basis", choices=("computational", "diagonal"))
    p.add_argument("--segment-fraction", type=float)
    p.add_argument("--qubit-fraction", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qaveto", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file of settings (flags override it)")
    common.add_argument("--seed", type=int, help="master seed (required)")
    common.add_argument("--output", type=Path, help="write the report here instead of stdout")
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--workers", type=int, help="process pool size for multi-trial runs")

    run = sub.add_parser("run", parents=[common], help="run a protocol")
    _protocol_flags(run)
    _attack_flags(run)
    run.add_argument("--trials", type=int)
    run.add_argument("--transcript", type=Path, help="write the trial-0 transcript here")

    sweep = sub.add_parser("sweep-noise", parents=[common], help="average fidelity over an eta grid")
    sweep.add_argument("--protocol", choices=("qav1", "qav2", "qav3", "qav4", "qav5", "qav6", "qav7"))
    sweep.add_argument("--channel", choices=("amplitude", "phase"))
    sweep.add_argument("--eta-start", type=float)
    sweep.add_argument("--eta-stop", type=float)
    sweep.add_argument("--eta-step", type=float)
    sweep.add_argument("--voters", type=int)
    sweep.add_argument("--l", type=int)
    sweep.add_argument("--method", choices=("exact_enumeration", "monte_carlo"))
    sweep.add_argument("--trials", type=int)

    eff = sub.add_parser("efficiency-table", parents=[common], help="qubit efficiency of every protocol")
    eff.add_argument("--voters", type=int)
    eff.add_argument("--l", type=int)
    eff.add_argument("--delta0", type=float)
    eff.add_argument("--delta1", type=float)
    eff.add_argument("--ring-l", type=int, help="iterations (qav6) / travel qubits (qav7)")
    eff.add_argument("--m", type=int, help="qav7 resource-state size")

    atk = sub.add_parser("attack-sim", parents=[common], help="eavesdropping detection experiment")
    _protocol_flags(atk)
    _attack_flags(atk)
    atk.add_argument("--target", choices=("decoy", "run", "protocol"))
    atk.add_argument("--decoys", type=int, help="decoys per run for --target run")
    atk.add_argument("--trials", type=int)
    atk.add_argument("--engine", choices=("vectorized", "segment"))
    atk.add_argument("--labels", help="decoy labels to draw from, e.g. +-")

    it = sub.add_parser("iteration-profile", parents=[common], help="iterations used per veto count")
    it.add_argument("--protocol", choices=("rkqav", "qav6"))
    it.add_argument("--voters", type=int)
    return parser


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Defaults, then the config file, then flags. Unknown file keys are rejected."""
    keys = {**COMMON_KEYS, **COMMAND_KEYS[args.command]}
    settings = dict(keys)
    settings["format"] = DEFAULT_FORMAT[args.command]
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as err:
            raise ConfigError(f"cannot read config file {args.config}: {err.strerror}") from err
        except json.JSONDecodeError as err:
            raise ConfigError(f"config file {args.config} is not valid JSON: {err}") from err
        if not isinstance(data, dict):
            raise ConfigError(f"config file {args.config} must hold a JSON object")
        data = {k.replace("-", "_"): v for k, v in data.items()}
        unknown = sorted(set(data) - set(keys))
        if unknown:
            raise ConfigError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
        settings.update(data)
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if settings["seed"] is None:
        raise ConfigError("a master seed is required: pass --seed N or set \"seed\" in the config file")
    if settings["format"] not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
    if int(settings["workers"]) < 1:
        raise ConfigError("workers must be at least 1")
    if "protocol" in keys and settings["protocol"] is None and not (
            args.command == "attack-sim" and settings["target"] != "protocol"):
        raise ConfigError(f"{args.command} needs --protocol")
    settings["command"] = args.command
    return settings


def _attack(s: dict) -> Attack | None:
    if s.get("attack") is None:
        return None
    kw = dict(segment_fraction=s["segment_fraction"], qubit_fraction=s["qubit_fraction"])
    if s["attack"] == "entangle_measure":
        if not 0 <= s["beta2"] <= 1:
            raise ConfigError(f"beta2 must lie in [0, 1], got {s['beta2']}")
        return Attack.entangle(s["beta2"], ancilla_basis=s["ancilla_basis"], **kw)
    return Attack("intercept_resend", **kw)


def protocol_config(s: dict, seed: int) -> ProtocolConfig:
    try:
        noise = make_channel(s["noise"], s["eta"]) if s["noise"] else None
        decoys = DecoyConfig(s["decoy_ratio"], s["decoy_subroutine"], s["threshold"])
        attack = _attack(s)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    cfg = ProtocolConfig(s["protocol"], s["voters"], s["l"], s["key_method"], noise, decoys, s["delta0"],
                         s["m"], s["travel"], s["state"], attack, bool(s["qds"]), seed=seed)
    return cfg.validate()


def _votes(s: dict, rng: np.random.Generator) -> VoteVector:
    if s["votes"] is not None and s["veto_count"] is not None:
        raise ConfigError("give either --votes or --veto-count, not both")
    if s["votes"] is not None:
        votes = VoteVector.parse(str(s["votes"]))
        if votes.n != s["voters"]:
            raise ConfigError(f"--votes has {votes.n} entries but --voters is {s['voters']}")
        return votes
    return VoteVector.with_vetoes(s["voters"], int(s["veto_count"] or 0), rng)


def _one_trial(job: tuple[dict, int]) -> dict:
    s, trial = job
    seed = int(s["seed"]) ^ trial
    rng = np.random.default_rng(seed)
    cfg = protocol_config(s, seed)
    votes = _votes(s, rng)
    out = run_protocol(cfg, votes, rng)
    out.transcript.header["vote_source"] = "explicit" if s["votes"] is not None else f"veto_count={votes.k}"
    return {"trial": trial, "seed": seed, "votes": str(votes), "result": out.result,
            "conclusive": out.conclusive, "iterations": out.iterations_used, "verdict": out.verdict(),
            "aborted": out.aborted, "confidence": out.confidence, "transcript": out.transcript.dumps()}


def cmd_run(s: dict) -> tuple[str, int]:
    trials = int(s["trials"])
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    protocol_config(s, int(s["seed"]))  # validate before fanning out
    jobs = [(s, t) for t in range(trials)]
    if int(s["workers"]) > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=int(s["workers"])) as pool:
            results = list(pool.map(_one_trial, jobs))
    else:
        results = [_one_trial(j) for j in jobs]
    results.sort(key=lambda r: r["trial"])
    if s["transcript"] is not None:
        _write(Path(s["transcript"]), results[0]["transcript"])
    fmt = s["format"]
    if fmt == "pretty":
        text = "".join(f"{r['verdict']}\n" for r in results)
    elif fmt == "csv":
        cols = ("trial", "seed", "votes", "result", "conclusive", "iterations", "verdict")
        text = to_csv(cols, [["" if r[c] is None else str(r[c]) for c in cols] for r in results])
    else:
        text = "".join(json.dumps({k: v for k, v in r.items() if k != "transcript"}, sort_keys=True) + "\n"
                       for r in results)
    code = EXIT_ABORT if any(r["aborted"] for r in results) else EXIT_OK
    return text, code


def cmd_sweep(s: dict) -> tuple[str, int]:
    sweep = NoiseSweep(s["protocol"], s["channel"], eta_grid(s["eta_start"], s["eta_stop"], s["eta_step"]),
                       s["voters"], s["l"], s["method"], s["trials"] if s["method"] == "monte_carlo" else 0)
    rows = noise_sweep(sweep, np.random.default_rng(int(s["seed"])))
    if s["format"] == "csv":
        return to_csv(FIDELITY_COLUMNS, fidelity_rows(rows)), EXIT_OK
    if s["format"] == "structured-log":
        lines = [json.dumps({"protocol": r.protocol, "channel": r.channel, "eta": r.eta,
                             "closed_form": r.closed_form, "numeric": r.numeric, "abs_diff": r.abs_diff},
                            sort_keys=True) for r in rows]
        return "\n".join(lines) + "\n", EXIT_OK
    cf = lambda v: "n/a" if v is None else f"{v:.10f}"  # noqa: E731
    return "".join(f"{r.protocol} {r.channel} eta={r.eta:.3f} numeric={r.numeric:.10f} "
                   f"closed={cf(r.closed_form)}\n" for r in rows), EXIT_OK


def cmd_efficiency(s: dict) -> tuple[str, int]:
    reports = efficiency_table(int(s["voters"]), int(s["l"]), _rational(s["delta0"]), _rational(s["delta1"]),
                               int(s["ring_l"]), s["m"])
    for r in reports:
        if r.eta != table_formula(r.inputs):
            raise InvariantViolation(f"{r.inputs.protocol}: schedule count and row formula disagree")
    if s["format"] == "csv":
        return to_csv(EFFICIENCY_COLUMNS, efficiency_rows(reports)), EXIT_OK
    if s["format"] == "structured-log":
        return "".join(json.dumps(dict(zip(EFFICIENCY_COLUMNS, row)), sort_keys=True) + "\n"
                       for row in efficiency_rows(reports)), EXIT_OK
    return "".join(f"{r.inputs.protocol:6s} q={r.q} b={r.b} eta={r.eta} ({float(r.eta):.6f})\n"
                   for r in reports), EXIT_OK


def _rational(x):
    from fractions import Fraction

    return Fraction(str(x)).limit_denominator(10**6)


def cmd_attack(s: dict) -> tuple[str, int]:
    attack = _attack(s)
    if attack is None:
        raise ConfigError("attack-sim needs --attack")
    rng = np.random.default_rng(int(s["seed"]))
    cfg = votes = None
    if s["target"] == "protocol":
        cfg = protocol_config({**s, "attack": None}, int(s["seed"]))
        votes = _votes(s, rng)
    labels = tuple(s["labels"])
    rep = detection_experiment(s["target"], attack, int(s["trials"]), rng, decoys=int(s["decoys"]),
                               labels=labels, engine=s["engine"], cfg=cfg, votes=votes)
    per = 1 if s["target"] == "decoy" else int(s["decoys"])
    expected = None if s["target"] == "protocol" else expected_detection(attack, per, labels)
    lo, hi = rep.ci()
    row = {"target": s["target"], "attack": attack.kind, "beta2": attack.beta_sq, "trials": rep.trials,
           "detections": rep.detections, "rate": rep.rate, "ci_low": lo, "ci_high": hi, "expected": expected,
           "eve_info": rep.eve_info}
    if s["format"] == "csv":
        cols = tuple(row)
        return to_csv(cols, [["" if row[c] is None else str(row[c]) for c in cols]]), EXIT_OK
    if s["format"] == "structured-log":
        return json.dumps({**row, "detail": rep.detail}, sort_keys=True, default=str) + "\n", EXIT_OK
    exp = "" if expected is None else f" expected={expected:.6f}"
    info = "" if rep.eve_info is None else f" eve_info={rep.eve_info:.4f}"
    return (f"{attack.kind} target={s['target']} rate={rep.rate:.6f} "
            f"[{lo:.6f}, {hi:.6f}] detections={rep.detections}/{rep.trials}{exp}{info}\n"), EXIT_OK


def cmd_iterations(s: dict) -> tuple[str, int]:
    prof = iteration_profile(s["protocol"], int(s["voters"]), int(s["seed"]))
    if s["format"] == "csv":
        return to_csv(("protocol", "n", "k", "iterations"),
                      [[s["protocol"], str(s["voters"]), str(k), str(v)] for k, v in prof.items()]), EXIT_OK
    if s["format"] == "structured-log":
        return "".join(json.dumps({"protocol": s["protocol"], "n": s["voters"], "k": k, "iterations": v},
                                  sort_keys=True) + "\n" for k, v in prof.items()), EXIT_OK
    return " ".join(f"{k}->{v}" for k, v in prof.items()) + "\n", EXIT_OK


COMMANDS = {"run": cmd_run, "sweep-noise": cmd_sweep, "efficiency-table": cmd_efficiency,
            "attack-sim": cmd_attack, "iteration-profile": cmd_iterations}


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as err:
        raise OSError(f"cannot write {path}: {err.strerror}") from err


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        # argparse uses 2 for usage errors, which is the abort code here
        return EXIT_CONFIG if err.code else EXIT_OK
    try:
        settings = resolve(args)
        shown = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(settings.items())}
        print("effective config: " + json.dumps(shown, sort_keys=True), file=sys.stderr)
        text, code = COMMANDS[args.command](settings)
        if settings["output"] is not None:
            _write(Path(settings["output"]), text)
        else:
            sys.stdout.write(text)
        return code
    except InvariantViolation as err:
        print(f"error: invariant violation: {err}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
