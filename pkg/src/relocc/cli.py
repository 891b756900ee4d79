"""Command-line interface.

Commands: classify, synthesize, simulate, entangling-power, osr, gallery.
Exit codes: 0 success (including a false verdict, which is a finding, not an
error), 1 malformed or invalid input, 2 internal failure.  All structured
output is canonical JSON, byte-identical for identical flags and seeds.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .controlled import Classification, classify, detect_controlled
from .entangling import OptimizationConfig, entangling_power
from .fileio import (
    InputFileError,
    canonical_dumps,
    read_protocol,
    read_unitary,
    write_protocol,
    write_unitary,
)
from .gates import GALLERY_NAMES, build_gate
from .linalg import ToleranceConfig
from .locc import (
    RelocalizationReport,
    synthesize_relocalization_protocol,
    verify_one_piece_relocalization,
)
from .schmidt import operator_schmidt_decomposition

__all__ = ["main", "entry_point"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # Usage mistakes are input errors (exit 1), not internal failures.
    def error(self, message):
        raise _UsageError(message)


def _tolerances(args) -> ToleranceConfig:
    if getattr(args, "tol", None) is None:
        return ToleranceConfig()
    return ToleranceConfig(tol_reconstruct=args.tol)


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.format == "json":
        sys.stdout.write(canonical_dumps(payload))
    else:
        print("\n".join(text_lines))


def _form_payload(form) -> dict | None:
    if form is None:
        return None
    return {
        "control_side": form.control_side,
        "n_blocks": form.n_blocks,
        "block_ranks": form.block_ranks,
        "residual": form.residual,
    }


def _classification_payload(c: Classification) -> dict:
    return {
        "osr": c.osr,
        "relocalizable": c.relocalizable,
        "is_local": c.is_local,
        "controlled_from_a": _form_payload(c.controlled_from_a),
        "controlled_from_b": _form_payload(c.controlled_from_b),
        "tolerances": {
            "tol_unitary": c.tolerances.tol_unitary,
            "tol_commute": c.tolerances.tol_commute,
            "tol_rank": c.tolerances.tol_rank,
            "tol_reconstruct": c.tolerances.tol_reconstruct,
        },
    }


def _side_text(form) -> str:
    if form is None:
        return "no"
    return f"yes (residual {form.residual:.3e}, {form.n_blocks} blocks)"


def cmd_classify(args) -> int:
    gate = read_unitary(args.path)
    result = classify(gate, _tolerances(args), seed=args.seed)
    payload = _classification_payload(result)
    payload.update({"d_a": gate.d_a, "d_b": gate.d_b})
    _emit(
        args,
        payload,
        [
            f"gate: {gate.d_a} x {gate.d_b}",
            f"operator Schmidt rank: {result.osr}",
            f"controlled from A: {_side_text(result.controlled_from_a)}",
            f"controlled from B: {_side_text(result.controlled_from_b)}",
            f"relocalizable: {str(result.relocalizable).lower()}"
            + (" (local gate)" if result.is_local else ""),
        ],
    )
    return 0


def _report_payload(report: RelocalizationReport) -> dict:
    return {
        "side": report.side,
        "verdict": report.verdict,
        "min_fidelity": report.min_fidelity,
        "channel_residual": report.channel_residual,
        "branch_fidelities": {
            "/".join(map(str, path)) or "(empty)": fid
            for path, fid in sorted(report.branch_fidelities.items())
        },
        "n_samples": report.n_samples,
        "seed": report.seed,
        "tol": report.tol,
    }


def _report_text(report: RelocalizationReport) -> list[str]:
    lines = [
        f"side: {report.side}",
        f"min branch fidelity: {report.min_fidelity:.12f}",
        f"channel product-form residual: {report.channel_residual:.3e}",
        f"verdict: {'relocalizes' if report.verdict else 'does not relocalize'}"
        f" the side-{report.side} piece",
    ]
    for path, fid in sorted(report.branch_fidelities.items()):
        label = "/".join(map(str, path)) or "(empty)"
        lines.append(f"  branch {label}: fidelity {fid:.12f}")
    return lines


def cmd_synthesize(args) -> int:
    gate = read_unitary(args.path)
    tol = _tolerances(args)
    sides = [args.side] if args.side else ["A", "B"]
    form = None
    for side in sides:
        form = detect_controlled(gate, side, tol, seed=args.seed)
        if form is not None:
            break
    if form is None:
        tried = " or ".join(sides)
        print(
            f"error: not a local unitary equivalent of a controlled-unitary "
            f"operation (control side {tried})",
            file=sys.stderr,
        )
        return 1
    protocol = synthesize_relocalization_protocol(form)
    out = args.out or str(Path(args.path).with_suffix(".protocol.json"))
    write_protocol(out, protocol)
    restored = "B" if form.control_side == "A" else "A"
    report = verify_one_piece_relocalization(
        gate, protocol, restored, n_samples=args.samples, seed=args.seed
    )
    payload = {
        "written": out,
        "control_side": form.control_side,
        "restored_side": restored,
        "n_blocks": form.n_blocks,
        "verified": report.verdict,
        "min_fidelity": report.min_fidelity,
    }
    _emit(
        args,
        payload,
        [
            f"protocol written to {out}",
            f"control side: {form.control_side} ({form.n_blocks} blocks); "
            f"restores the side-{restored} piece",
            f"verified: {str(report.verdict).lower()} "
            f"(min fidelity {report.min_fidelity:.12f})",
        ],
    )
    return 0


def cmd_simulate(args) -> int:
    gate = read_unitary(args.unitary)
    protocol = read_protocol(args.protocol)
    if (gate.d_a, gate.d_b) != (protocol.d_a, protocol.d_b):
        raise InputFileError(
            f"dimension mismatch: gate is {gate.d_a} x {gate.d_b}, "
            f"protocol is {protocol.d_a} x {protocol.d_b}"
        )
    report = verify_one_piece_relocalization(
        gate,
        protocol,
        args.side,
        n_samples=args.samples,
        seed=args.seed,
        tol=args.tol if args.tol is not None else 1e-9,
    )
    _emit(args, _report_payload(report), _report_text(report))
    return 0


def cmd_entangling_power(args) -> int:
    gate = read_unitary(args.path)
    cfg = OptimizationConfig(restarts=args.restarts, seed=args.seed)
    result = entangling_power(gate, cfg)
    payload = {
        "value_ebits": result.value,
        "converged": result.converged,
        "restarts": cfg.restarts,
        "seed": cfg.seed,
        "per_restart": list(result.per_restart),
        "argmax_a": {
            "re": result.argmax_a.real.tolist(),
            "im": result.argmax_a.imag.tolist(),
        },
        "argmax_b": {
            "re": result.argmax_b.real.tolist(),
            "im": result.argmax_b.imag.tolist(),
        },
    }
    _emit(
        args,
        payload,
        [
            f"entangling power: {result.value:.6f} ebits",
            f"restarts: {cfg.restarts}, converged: {str(result.converged).lower()}",
        ],
    )
    return 0


def cmd_osr(args) -> int:
    gate = read_unitary(args.path)
    decomp = operator_schmidt_decomposition(gate)
    tol_rank = args.tol if args.tol is not None else 1e-7
    payload = {
        "osr": decomp.rank(tol_rank),
        "lambdas": [float(v) for v in decomp.lambdas],
        "tol_rank": tol_rank,
    }
    _emit(
        args,
        payload,
        [
            f"operator Schmidt rank: {payload['osr']}",
            "coefficients: " + ", ".join(f"{v:.6f}" for v in decomp.lambdas),
        ],
    )
    return 0


def cmd_gallery(args) -> int:
    params = {}
    if args.name == "heisenberg":
        params["alpha"] = args.alpha
    if args.name in ("identity", "controlled_random"):
        params.update({"d_a": args.d_a, "d_b": args.d_b})
    if args.name == "controlled_random":
        params.update({"n_blocks": args.n_blocks, "seed": args.seed})
    try:
        gate = build_gate(args.name, **params)
    except ValueError as exc:
        raise InputFileError(str(exc)) from None
    out = args.out or f"{args.name}.json"
    write_unitary(out, gate)
    payload = {"written": out, "name": args.name, "d_a": gate.d_a, "d_b": gate.d_b}
    _emit(
        args,
        payload,
        [f"{args.name} ({gate.d_a} x {gate.d_b}) written to {out}"],
    )
    return 0


def _add_common(p, *, tol=False, seed=False, fmt=True):
    if tol:
        p.add_argument("--tol", type=float, default=None, help="override the main tolerance")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="random seed")
    if fmt:
        p.add_argument("--format", choices=("text", "json"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="relocc",
        description="Classify bipartite unitaries by LOCC one-piece "
        "relocalizability, synthesize and simulate the protocols, and "
        "compute entangling power.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="controlled-unitary detection and OSR")
    p.add_argument("path", help="unitary JSON file")
    _add_common(p, tol=True, seed=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("synthesize", help="write the relocalization protocol")
    p.add_argument("path", help="unitary JSON file")
    p.add_argument("--side", choices=("A", "B"), default=None, help="control side (default: try A then B)")
    p.add_argument("--out", default=None, help="protocol output path")
    p.add_argument("--samples", type=int, default=100, help="verification samples")
    _add_common(p, tol=True, seed=True)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("simulate", help="verify a protocol against a gate")
    p.add_argument("unitary", help="unitary JSON file")
    p.add_argument("protocol", help="protocol JSON file")
    p.add_argument("--side", choices=("A", "B"), default="B", help="which piece must be restored")
    p.add_argument("--samples", type=int, default=100, help="Haar product inputs")
    _add_common(p, tol=True, seed=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("entangling-power", help="maximize output entanglement")
    p.add_argument("path", help="unitary JSON file")
    p.add_argument("--restarts", type=int, default=32)
    _add_common(p, seed=True)
    p.set_defaults(func=cmd_entangling_power)

    p = sub.add_parser("osr", help="operator Schmidt rank and coefficients")
    p.add_argument("path", help="unitary JSON file")
    _add_common(p, tol=True)
    p.set_defaults(func=cmd_osr)

    p = sub.add_parser("gallery", help="write a named gate to a file")
    p.add_argument("name", choices=GALLERY_NAMES)
    p.add_argument("--out", default=None, help="output path (default <name>.json)")
    p.add_argument("--alpha", type=float, default=0.3, help="heisenberg coupling")
    p.add_argument("--d-a", dest="d_a", type=int, default=2)
    p.add_argument("--d-b", dest="d_b", type=int, default=2)
    p.add_argument("--n-blocks", dest="n_blocks", type=int, default=2)
    _add_common(p, seed=True)
    p.set_defaults(func=cmd_gallery)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InputFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:
    sys.exit(main(sys.argv[1:]))
