"""Command-line entry point: ``python -m singleprobe <command> ...``.

Exit codes: 0 success, 2 bad input, 3 nothing found, 4 verification failed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, claims, compiler, dynamics
from .control_ir import (
    ANY,
    BoolFunc,
    Program,
    SpectrumError,
    SpectrumSpec,
    bloch_trajectory,
    measures,
    realizes,
    step_count,
)
from .group_search import bfs_search, build_group, minimal_lengths, verify_generation_pairwise
from .rotations import DEFAULT_TOL, orthogonal_vector
from .synthesis import IndicatorSpec, SynthesisError, synth_auto

EXIT_OK, EXIT_SPEC, EXIT_NOT_FOUND, EXIT_VERIFY = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_SPEC):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------- output helpers
def _num(x):
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        if abs(x) < 1e-13:
            return 0.0
        return float(f"{x:.12g}") + 0.0
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    if isinstance(x, np.generic):
        return _num(x.item())
    return x


def dumps(obj) -> str:
    return json.dumps(_num(obj), indent=2, sort_keys=True) + "\n"


def manifest(args, inputs: list[str]) -> dict:
    files = {}
    for path in inputs:
        p = Path(path)
        if p.is_file():
            files[path] = hashlib.sha256(p.read_bytes()).hexdigest()
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    stamp = (datetime.fromtimestamp(int(epoch), timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
             if epoch else None)
    return {
        "command": args.command,
        "argv": [a for a in sys.argv[1:]] if args.record_argv else None,
        "inputs": files,
        "seed": getattr(args, "seed", None),
        "tolerances": {"equality": args.tol},
        "tool_version": __version__,
        "timestamp": stamp,
    }


def _write(path: str | None, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc


def _vector(text: str) -> np.ndarray:
    named = {"x": (1, 0, 0), "y": (0, 1, 0), "z": (0, 0, 1)}
    t = text.strip().lower()
    sign = -1.0 if t.startswith("-") and t[1:] in named else 1.0
    if t.lstrip("+-") in named:
        return sign * np.array(named[t.lstrip("+-")], dtype=float)
    try:
        v = np.array([float(c) for c in t.split(",")], dtype=float)
    except ValueError as exc:
        raise CliError(f"bad Bloch vector {text!r}") from exc
    if v.shape != (3,) or np.linalg.norm(v) == 0:
        raise CliError(f"bad Bloch vector {text!r}")
    return v / np.linalg.norm(v)


def _floats(text: str) -> list[float]:
    try:
        return [float(c) for c in text.split(",") if c.strip()]
    except ValueError as exc:
        raise CliError(f"bad number list {text!r}") from exc


def _int_range(text: str) -> list[int]:
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(c) for c in text.split(",")]


# ---------------------------------------------------------------- spec files
def load_function_spec(obj: dict) -> tuple[SpectrumSpec, BoolFunc, str]:
    try:
        return _function_spec(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"bad function spec: {exc}") from exc


def _function_spec(obj: dict) -> tuple[SpectrumSpec, BoolFunc, str]:
    n = int(obj.get("n_qubits", 3))
    couplings = obj.get("couplings", [2**q for q in range(n)])
    spec = SpectrumSpec.from_couplings(couplings)
    if spec.n_qubits != n:
        raise CliError("n_qubits does not match the coupling list")
    if "builtin" in obj:
        kind = obj["builtin"]
        if kind == "parity":
            return spec, BoolFunc.parity(spec), "parity"
        if kind == "indicator":
            i, k = int(obj["i"]), int(obj["k"])
            IndicatorSpec(i, k)
            return spec, BoolFunc.indicator(spec, i, k), f"indicator:{i}:{k}"
        raise CliError(f"unknown builtin {kind!r}")
    if "table" not in obj:
        raise CliError("function spec needs 'table' or 'builtin'")
    table = {int(k): int(v) for k, v in obj["table"].items()}
    if set(table) != set(spec.distinct):
        raise CliError("function table must cover exactly the spectrum's eigenvalues")
    return spec, BoolFunc.from_mapping(table), "table"


def parse_target(text: str, spec: SpectrumSpec) -> list[tuple[str, BoolFunc]]:
    if text == "parity":
        return [("parity", BoolFunc.parity(spec))]
    if text.startswith("indicator:"):
        _, i, k = text.split(":")
        ind = IndicatorSpec(int(i), int(k))
        return [(text, BoolFunc.indicator(spec, ind.i, ind.k))]
    if text == "period4:all":
        out = []
        for bits in range(16):
            pattern = [(bits >> r) & 1 for r in range(4)]
            out.append(("period4:" + "".join(map(str, pattern)),
                        BoolFunc.from_callable(spec, lambda j, p=pattern: p[j % 4])))
        return out
    if text.startswith("table:"):
        vals = [int(c) for c in text[6:].split(",")]
        if len(vals) != len(spec.distinct):
            raise CliError("table target needs one value per eigenvalue")
        return [(text, BoolFunc(tuple(zip(spec.distinct, vals))))]
    raise CliError(f"unknown target {text!r}")


# ---------------------------------------------------------------- commands
def cmd_compile(args) -> int:
    spec, f, label = load_function_spec(_load_json(args.spec))
    s0 = _vector(args.probe)
    if args.method == "recursive":
        try:
            rep = synth_auto(spec, f)
        except SynthesisError as exc:
            raise CliError(str(exc), EXIT_NOT_FOUND) from exc
        prog = rep.program
        report = rep.to_json()
        if rep.witness is not ANY:
            # start the probe orthogonal to the witness axis
            ax = rep.witness.axis()
            s0 = orthogonal_vector(ax) if abs(float(s0 @ ax)) > args.tol else s0
    else:
        G = build_group(args.group)
        res = bfs_search(G, spec, f, args.mode, s0=s0, max_len=args.max_len, tol=args.tol)
        if res is None:
            raise CliError(f"no {args.mode} word within {args.max_len} conditional steps",
                           EXIT_NOT_FOUND)
        prog = res.program
        strict = realizes(prog, f, args.tol)
        report = {
            "conditional_steps": step_count(prog)[0],
            "unconditional_steps": step_count(prog)[1],
            "explored": res.explored,
            "group": args.group,
            "mode": "realizes" if strict is not None else "measures",
            "witness": None if strict is None else ("any" if strict is ANY else strict.to_json()),
        }
    axis = measures(prog, f, s0, args.tol)
    if axis is None:
        raise CliError("compiled program fails its measurement check", EXIT_VERIFY)
    report.update({"target": label, "probe_init": list(s0), "outcome_axis": list(axis)})
    out = prog.to_json()
    out.update({"target": f.to_json(), "probe_init": list(s0),
                "manifest": manifest(args, [args.spec])})
    _write(args.out, dumps(out))
    if args.report:
        _write(args.report, dumps({"report": report, "manifest": manifest(args, [args.spec])}))
    return EXIT_OK


def _register(text: str, dim: int) -> np.ndarray:
    if text == "uniform":
        return np.ones(dim, dtype=complex) / math.sqrt(dim)
    if text.startswith("basis:"):
        b = int(text[6:])
        if not 0 <= b < dim:
            raise CliError(f"basis index {b} out of range for dimension {dim}")
        v = np.zeros(dim, dtype=complex)
        v[b] = 1
        return v
    obj = _load_json(text)
    amps = np.array([complex(re, im) for re, im in obj["amplitudes"]])
    if len(amps) != dim:
        raise CliError(f"register dimension {len(amps)} does not match program ({dim})")
    return amps / np.linalg.norm(amps)


def cmd_simulate(args) -> int:
    obj = _load_json(args.program)
    try:
        prog = Program.from_json(obj)
        dim = 2**prog.spectrum.n_qubits
        reg = _register(args.register, dim)
        s0 = _vector(args.probe) if args.probe else np.array(obj.get("probe_init", (1, 0, 0)), float)
        axis = _vector(args.measure_axis) if args.measure_axis else None
        verified = None
        if "target" in obj:
            f = BoolFunc.from_mapping({int(k): v for k, v in obj["target"].items()})
            a = measures(prog, f, s0, args.tol)
            verified = a is not None
            if axis is None and a is not None:
                axis = a
        if axis is None:
            axis = s0
        state = dynamics.run_program(prog, reg, s0)
    except SpectrumError as exc:
        raise CliError(str(exc)) from exc

    probs = dynamics.probe_probabilities(state, axis)
    result = {
        "probe_init": list(s0),
        "measure_axis": list(axis),
        "probabilities": {"+": probs[+1], "-": probs[-1]},
        "shots": args.shots,
        "verified": verified,
        "manifest": manifest(args, [args.program] + ([args.register] if Path(args.register).is_file() else [])),
    }
    if args.shots > 0:
        outs = dynamics.sample_outcomes(state, axis, args.shots, args.seed)
        plus = int(np.sum(outs == 1))
        result["counts"] = {"+": plus, "-": args.shots - plus}
        result["frequencies"] = {"+": plus / args.shots, "-": 1 - plus / args.shots}
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for sign, name in ((+1, "plus"), (-1, "minus")):
        if probs[sign] <= 1e-15:
            continue
        m = dynamics.probe_measure(state, axis, outcome=sign)
        dump = {"n_qubits": prog.spectrum.n_qubits, "outcome": name, "probability": m.probability,
                "amplitudes": [[float(c.real), float(c.imag)] for c in m.register]}
        (out_dir / f"collapsed_{name}.json").write_text(dumps(dump))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eigenvalue", "step", "bloch_x", "bloch_y", "bloch_z"])
    for j, step, v in bloch_trajectory(prog, s0):
        w.writerow([j, step] + [f"{_num(float(c)):.12g}" for c in v])
    (out_dir / "trajectory.csv").write_text(buf.getvalue())
    (out_dir / "outcomes.json").write_text(dumps(result))
    return EXIT_OK if verified in (None, True) else EXIT_VERIFY


def cmd_search(args) -> int:
    G = build_group(args.group)
    if args.verify_generation:
        try:
            rep = verify_generation_pairwise(G, _int_range(args.verify_generation))
        except ValueError as exc:
            raise CliError(str(exc)) from exc
        out = {
            "group": args.group,
            "exponents": args.verify_generation,
            "result": "PASS" if rep.ok else "FAIL",
            "pairs_checked": len(rep.pairs),
            "min_pair_order": min(rep.pairs.values()) if rep.pairs else None,
            "manifest": manifest(args, []),
        }
        _write(args.out, dumps(out))
        return EXIT_OK if rep.ok else EXIT_VERIFY
    if not args.target:
        raise CliError("--target or --verify-generation is required")
    spec = SpectrumSpec.dyadic(args.n_qubits)
    try:
        targets = parse_target(args.target, spec)
    except ValueError as exc:
        raise CliError(f"bad target {args.target!r}: {exc}") from exc
    s0 = _vector(args.s0)
    results = minimal_lengths(G, spec, [f for _, f in targets], args.mode, s0, args.max_len, args.tol)
    rows = []
    for (name, f), (_, res) in zip(targets, results):
        row = {"target": name, "table": f.to_json(), "found": res is not None}
        if res is not None:
            row.update(res.to_json(args.group))
            row["target"] = name
        rows.append(row)
    out = {"group": args.group, "mode": args.mode, "max_len": args.max_len, "results": rows,
           "manifest": manifest(args, [])}
    found = any(r["found"] for r in rows)
    if len(rows) == 1:
        out.update(rows[0])
        del out["results"]
    _write(args.out, dumps(out))
    return EXIT_OK if found else EXIT_NOT_FOUND


def cmd_schedule(args) -> int:
    C = _floats(args.target_coupling)
    if args.basis == "identity":
        basis = compiler.CouplingBasis.identity(len(C))
    else:
        try:
            basis = compiler.CouplingBasis.from_json(_load_json(args.basis))
        except (KeyError, ValueError) as exc:
            raise CliError(f"bad basis file: {exc}") from exc
    try:
        sched = compiler.solve_schedule(C, basis)
    except (compiler.DegenerateGeometry, ValueError) as exc:
        raise CliError(str(exc)) from exc
    check = compiler.schedule_to_operator(sched, basis)
    out = sched.to_json()
    out["exactness"] = {"operator_norm_error": check.error, "passed": check.error <= 1e-12}
    out["total_time"] = sched.total_time
    if len(set(C)) == 1 and C[0] != 0:
        out["note"] = ("uniform effective coupling: the normalised eigenvalue is the Hamming "
                       "weight, so measurable functions are functions of the Hamming weight")
    out["manifest"] = manifest(args, [args.basis] if args.basis != "identity" else [])
    _write(args.out, dumps(out))
    return EXIT_OK if check.error <= 1e-12 else EXIT_VERIFY


def cmd_report(args) -> int:
    if args.suite == "costs":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "fixed_conditional_steps", "movable_conditional_steps",
                    "movable_positions_local", "movable_positions_generic",
                    "gate_model_cphase_per_conditional_word"])
        for n in args.n:
            r = compiler.cost_row(n, seed=args.seed)
            w.writerow([r.n, r.fixed_conditional_steps, r.movable_conditional_steps,
                        r.movable_positions_local, r.movable_positions_generic,
                        r.gate_model_cphase_for_conditional_word])
        _write(args.out, buf.getvalue())
        return EXIT_OK
    lines = ["| # | claim | result | detail |", "|---|---|---|---|"]
    results = claims.run_all()
    for r in results:
        lines.append(f"| {r.number} | {r.name} | {'PASS' if r.passed else 'FAIL'} | {r.detail} |")
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


# ---------------------------------------------------------------- parser
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="singleprobe", description=__doc__.splitlines()[0])
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="equality tolerance")
    p.add_argument("--record-argv", action="store_true", help="store argv in the manifest")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a function spec to a probe program")
    c.add_argument("spec")
    c.add_argument("--method", choices=("recursive", "search"), default="recursive")
    c.add_argument("--group", choices=("D8", "S4", "A5"), default="D8")
    c.add_argument("--mode", choices=("strict", "state_level"), default="state_level")
    c.add_argument("--max-len", type=int, default=6)
    c.add_argument("--probe", default="x", help="initial probe Bloch vector")
    c.add_argument("--out", default="-")
    c.add_argument("--report", default=None)
    c.set_defaults(func=cmd_compile)

    s = sub.add_parser("simulate", help="run a program on a register state")
    s.add_argument("program")
    s.add_argument("--register", default="uniform", help="uniform | basis:K | state.json")
    s.add_argument("--probe", default=None)
    s.add_argument("--measure-axis", default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--shots", type=int, default=0)
    s.add_argument("--out-dir", default="simulation")
    s.set_defaults(func=cmd_simulate)

    q = sub.add_parser("search", help="shortest words over a finite group")
    q.add_argument("--group", choices=("D8", "S4", "A5"), default="D8")
    q.add_argument("--target", default=None,
                   help="parity | indicator:I:K | period4:all | table:v0,v1,...")
    q.add_argument("--mode", choices=("strict", "state_level"), default="state_level")
    q.add_argument("--max-len", type=int, default=4)
    q.add_argument("--n-qubits", type=int, default=3)
    q.add_argument("--s0", default="x")
    q.add_argument("--verify-generation", default=None, help="exponent range, e.g. 0..29")
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_search)

    h = sub.add_parser("schedule", help="movable-probe schedule for an effective coupling")
    h.add_argument("--target-coupling", required=True)
    h.add_argument("--basis", default="identity", help="basis JSON file or 'identity'")
    h.add_argument("--out", default="-")
    h.set_defaults(func=cmd_schedule)

    r = sub.add_parser("report", help="claim checks or cost table")
    r.add_argument("--suite", choices=("paper-claims", "costs"), required=True)
    r.add_argument("--n", type=int, nargs="+", default=[3, 4, 5])
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", default="-")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SpectrumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
