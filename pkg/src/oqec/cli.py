"""Command-line front end.

JSON reports go to stdout, a one-line human summary to stderr. Exit codes:
0 success, 1 I/O or input errors, 2 a check failed (or the code is not
correctable), 3 structure decomposition failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import serialization as ser
from .algebra import commutant, decompose_structure, generate_interaction_algebra, noise_commutant_blocks
from .correction import (
    build_standard_recovery,
    check_correctable_triple,
    check_standard_condition,
    check_unified_condition,
    convert_to_standard,
)
from .errors import DecompositionFailed, NotCorrectable, NotTracePreserving, OQECError
from .matrix_core import DEFAULT_ATOL, apply_channel, compose, dag, fro, random_pure_state, validate_channel
from .subsystems import check_ns, check_theorem1, code_decomposition
from .zoo import FIXTURE_NAMES, fixture

N_STATES = 100


class CLIError(Exception):
    def __init__(self, message: str, code: int = 1):
        super().__init__(message)
        self.code = code


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load(path: str):
    try:
        return ser.load_json(path)
    except FileNotFoundError:
        raise CLIError(f"no such file: {path}") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise CLIError(f"cannot read {path}: {exc}") from None


def _load_channel(path: str, tol: float):
    data = _load(path)
    try:
        return ser.channel_from_dict(data, atol=tol)
    except NotTracePreserving as exc:
        raise CLIError(str(exc), 2) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise CLIError(f"malformed channel file {path}: {exc}") from None


def _load_code(path: str, tol: float):
    data = _load(path)
    try:
        return ser.decomposition_from_dict(data, atol=max(tol, 1e-8))
    except (KeyError, TypeError, ValueError, OQECError) as exc:
        raise CLIError(f"malformed decomposition file {path}: {exc}") from None


def _code_states(sector: np.ndarray, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [sector @ random_pure_state(sector.shape[1], rng) for _ in range(N_STATES)]


def _recovery_quality(channel, states) -> dict:
    """Worst fidelity and Frobenius error of ``channel`` on pure code states, after trace normalisation."""
    worst_f, worst_err = 1.0, 0.0
    for psi in states:
        rho = np.outer(psi, psi.conj())
        out = apply_channel(channel, rho)
        out = out / np.trace(out).real
        worst_f = min(worst_f, float(np.real(psi.conj() @ out @ psi)))
        worst_err = max(worst_err, fro(out - rho))
    return {"worst_fidelity": worst_f, "worst_error": worst_err, "n_states": len(states)}


def cmd_validate(args) -> tuple[dict, int]:
    data = _load(args.channel)
    try:
        d = int(data["dim"])
        ops = [ser.matrix_from_json(k, (d, d)) for k in data["kraus"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise CLIError(f"malformed channel file {args.channel}: {exc}") from None
    try:
        ch = validate_channel(ops, atol=args.tol, label=str(data.get("label", "")))
    except NotTracePreserving as exc:
        return {"ok": False, "residual": exc.residual, "spectral_residual": exc.spectral_residual}, 2
    except OQECError as exc:
        raise CLIError(str(exc)) from None
    res = fro(sum(dag(k) @ k for k in ch.kraus) - np.eye(ch.dim))
    return {"ok": True, "dim": ch.dim, "n_kraus": len(ch), "residual": res}, 0


def cmd_decompose(args) -> tuple[dict, int]:
    ch = _load_channel(args.channel, args.tol)
    try:
        alg = generate_interaction_algebra(ch, args.tol)
        comm = commutant(alg, args.tol)
        st = decompose_structure(alg, args.tol, seed=args.seed)
        cst = noise_commutant_blocks(ch, args.tol, seed=args.seed)
    except DecompositionFailed as exc:
        return {"ok": False, "error": str(exc)}, 3
    report = {
        "ok": True,
        "interaction_algebra": {"dim": len(alg), **st.to_dict()},
        "commutant": {"dim": len(comm), **cst.to_dict()},
    }
    return report, 0


def cmd_check(args) -> tuple[dict, int]:
    ch = _load_channel(args.channel, args.tol)
    decomp, mu = _load_code(args.code, args.tol)
    if decomp.dim != ch.dim:
        raise CLIError(f"channel dimension {ch.dim} does not match code dimension {decomp.dim}")
    cond = args.condition
    report = {"condition": cond}
    if cond == "eq2":
        ok, lam = check_standard_condition(ch, mu.p_frak, args.tol)
        report.update(ok=ok, max_residual=lam.max_residual, **{"lambda": lam.to_json()})
    elif cond == "eq8":
        ok, lam = check_unified_condition(ch, mu, args.tol)
        report.update(ok=ok, max_residual=lam.max_residual, **{"lambda": lam.to_json()})
    elif cond == "ns":
        verdict = check_ns(ch, decomp, args.variant, args.tol)
        _, lam = check_theorem1(ch, mu, args.tol)
        ok = verdict.ok
        report.update(verdict.to_dict())
        report.update(condition=cond, **{"lambda": lam.to_json(), "theorem1_residual": lam.max_residual})
    else:
        rec = _load_channel(args.recovery, args.tol) if args.recovery else validate_channel([np.eye(ch.dim)], label="identity")
        if rec.dim != ch.dim:
            raise CLIError(f"recovery dimension {rec.dim} does not match channel dimension {ch.dim}")
        triple = check_correctable_triple(rec, ch, decomp, mu, args.tol)
        ok = triple.verified
        report.update(ok=ok, max_residual=triple.residual, **{"lambda": None})
    return report, 0 if ok else 2


def cmd_recover(args) -> tuple[dict, int]:
    ch = _load_channel(args.channel, args.tol)
    decomp, mu = _load_code(args.code, args.tol)
    if decomp.dim != ch.dim:
        raise CLIError(f"channel dimension {ch.dim} does not match code dimension {decomp.dim}")
    report = {}
    if args.convert_from_triple is None:
        try:
            rec = build_standard_recovery(ch, mu.p_frak, args.tol)
        except NotCorrectable as exc:
            return {"ok": False, "error": str(exc)}, 2
        states = _code_states(decomp.embedding, args.seed)
        report["recovery_quality"] = _recovery_quality(compose(rec, ch, args.tol), states)
        code_proj = mu.p_frak
    else:
        k = args.convert_from_triple
        base = _load_channel(args.recovery, args.tol) if args.recovery else validate_channel([np.eye(ch.dim)], label="identity")
        triple = check_correctable_triple(base, ch, decomp, mu, args.tol)
        if not triple.verified:
            return {"ok": False, "error": f"triple is not correctable (residual {triple.residual:.3e})"}, 2
        if not 0 <= k < decomp.m:
            raise CLIError(f"sector index {k} outside range({decomp.m})")
        rec, code_proj = convert_to_standard(triple, k, args.tol)
        ok2, lam = check_standard_condition(ch, code_proj, args.tol)
        report["eq2"] = {"ok": ok2, "max_residual": lam.max_residual, "lambda": lam.to_json()}
        new_decomp, _ = code_decomposition(code_proj)
        states = _code_states(new_decomp.embedding, args.seed)
        report["recovery_quality"] = _recovery_quality(compose(rec, ch, args.tol), states)
        report["sector"] = k
        if args.code_out:
            ser.save_json(ser.decomposition_to_dict(new_decomp), args.code_out)
            report["code_out"] = args.code_out
    ser.save_json(ser.channel_to_dict(rec), args.out)
    report.update(ok=True, recovery_out=args.out, n_kraus=len(rec), code_rank=int(round(np.trace(code_proj).real)))
    return report, 0


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def cmd_fixture(args) -> tuple[dict, int]:
    params = {}
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep:
            raise CLIError(f"bad --param {item!r}, expected key=value")
        params[key] = _parse_value(value)
    try:
        fx = fixture(args.name, **params)
    except OQECError as exc:
        raise CLIError(str(exc)) from None
    ser.save_json(ser.channel_to_dict(fx.channel), args.channel_out)
    ser.save_json(ser.decomposition_to_dict(fx.decomposition), args.code_out)
    return {"ok": True, "fixture": args.name, "params": params, "expected": fx.expected}, 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_ATOL, help="absolute Frobenius tolerance")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised sub-steps")
    common.add_argument("--json-only", action="store_true", help="suppress the summary on stderr")

    parser = argparse.ArgumentParser(prog="oqec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a channel file is CPTP")
    p.add_argument("channel")
    p.set_defaults(func=cmd_validate, inputs=("channel",))

    p = sub.add_parser("decompose", parents=[common], help="block structure of the interaction algebra and commutant")
    p.add_argument("channel")
    p.set_defaults(func=cmd_decompose, inputs=("channel",))

    p = sub.add_parser("check", parents=[common], help="run a correctability or noiseless-subsystem check")
    p.add_argument("channel")
    p.add_argument("code")
    p.add_argument("condition", choices=["eq2", "eq6", "eq8", "ns"])
    p.add_argument("--recovery", help="recovery channel for eq6 (identity if omitted)")
    p.add_argument("--variant", type=int, choices=[1, 2, 3], default=1, help="form of the noiseless-subsystem test")
    p.set_defaults(func=cmd_check, inputs=("channel", "code", "recovery"))

    p = sub.add_parser("recover", parents=[common], help="build a recovery channel")
    p.add_argument("channel")
    p.add_argument("code")
    p.add_argument("--out", required=True, help="where to write the recovery channel")
    p.add_argument("--convert-from-triple", type=int, metavar="K", help="convert a correctable triple on sector K (0-based)")
    p.add_argument("--recovery", help="recovery channel of the triple (identity if omitted)")
    p.add_argument("--code-out", help="where to write the converted code")
    p.set_defaults(func=cmd_recover, inputs=("channel", "code", "recovery"))

    p = sub.add_parser("fixture", parents=[common], help="export a named fixture")
    p.add_argument("name", choices=FIXTURE_NAMES)
    p.add_argument("--param", action="append", default=[], help="fixture parameter key=value (repeatable)")
    p.add_argument("--channel-out", required=True)
    p.add_argument("--code-out", required=True)
    p.set_defaults(func=cmd_fixture, inputs=())
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        digests = {
            name: _digest(getattr(args, name))
            for name in args.inputs
            if getattr(args, name, None) and Path(getattr(args, name)).is_file()
        }
        body, code = args.func(args)
    except CLIError as exc:
        body, code, digests = {"ok": False, "error": str(exc)}, exc.code, {}
    report = {
        "command": args.command,
        "argv": list(sys.argv[1:] if argv is None else argv),
        "inputs": digests,
        "result": body,
        "exit_code": code,
        "timing": time.perf_counter() - start,
    }
    print(ser.dumps(report))
    if not args.json_only:
        status = "ok" if code == 0 else f"exit {code}"
        detail = body.get("error") or ", ".join(
            f"{k}={body[k]:.3e}" for k in ("max_residual", "residual") if isinstance(body.get(k), float)
        )
        print(f"oqec {args.command}: {status}" + (f" ({detail})" if detail else ""), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
