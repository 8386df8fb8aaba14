"""Command line interface.

Exit codes: 0 ok, 1 verification failure, 2 parse error, 3 infeasible target,
4 coupler still non-generic after saturation.
"""

import argparse
import io as _io
import shlex
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .colorsets import (
    EPS_BLOCK,
    color_partition,
    genericity_check,
    induced_permutation,
    randomize_saturate,
)
from .decoupler import decouple_many
from .errors import FormatError, GucError, InconsistentPartition
from .sequence import CompiledSequence, CouplerUse, LocalStep
from .symplectic import (
    RngSpec,
    default_symplectic_tol,
    embed_local,
    is_symplectic,
    n_modes_of,
    quadrature_indices,
    random_symplectic,
    symplectic_residual,
)
from .synthesizer import TOL_SYNTH, compile_operation
from .verify import left_fold, relative_difference, running_scale

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_NONGENERIC = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class CliConfig:
    """Settings shared by all subcommands.

    ``tol_symp=None`` selects the scaled default of ``default_symplectic_tol``.
    """

    tol_symp: float = None
    tol_struct: float = TOL_SYNTH
    eps_block: float = EPS_BLOCK
    seed: int = 0
    scheme: str = "factored"
    output: str = None
    format: str = "json"

    def __post_init__(self):
        for name in ("tol_symp", "tol_struct", "eps_block"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise FormatError(f"--{name.replace('_', '-')} must be positive, got {value}")

    @classmethod
    def from_args(cls, args):
        return cls(args.tol_symp, args.tol, args.block_eps, args.seed, args.scheme, args.output,
                   args.format)


def _read(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc


def _read_matrix(path):
    return io.load_matrix(_read(path), what=str(path))


def _parse_modes(text):
    try:
        return [int(m) for m in text.replace(" ", "").split(",") if m != ""]
    except ValueError as exc:
        raise FormatError(f"--modes expects comma-separated integers, got {text!r}") from exc


def _emit(cfg, out, payload, human_lines):
    if cfg.format == "json":
        out.write(io.dumps(payload))
    else:
        out.write("\n".join(human_lines) + "\n")


def _write_output(cfg, out, text):
    if cfg.output and cfg.output != "-":
        Path(cfg.output).write_text(text)
    else:
        out.write(text)


def cmd_validate(args, cfg, out):
    S = _read_matrix(args.file)
    residual = symplectic_residual(S)
    tol = cfg.tol_symp if cfg.tol_symp is not None else default_symplectic_tol(S)
    ok = is_symplectic(S, tol)
    report = genericity_check(S, cfg.eps_block)
    payload = {
        "n_modes": n_modes_of(S),
        "symplectic": ok,
        "residual": residual,
        "tol": tol,
        "generic": report.is_generic,
        "violations": [list(v) for v in report.violations],
    }
    lines = [
        f"modes: {n_modes_of(S)}",
        f"symplectic residual: {residual:.3e} (tol {tol:.3e}) -> {'ok' if ok else 'FAIL'}",
        f"generic: {report.is_generic} ({len(report.violations)} vanishing pairs)",
    ]
    if ok:
        partition = color_partition(S, cfg.eps_block)
        payload["color_sets"] = partition.sets
        payload["permutation"] = partition.successor
        lines.append(f"color sets: {partition.sets}  permutation: {partition.successor}")
    _emit(cfg, out, payload, lines)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_random(args, cfg, out):
    if args.modes is None or int(args.modes) < 1:
        raise FormatError("--modes must be a positive integer")
    S = random_symplectic(int(args.modes), RngSpec(cfg.seed, cfg.scheme))
    _write_output(cfg, out, io.dump_matrix(S))
    return EXIT_OK


def cmd_decouple(args, cfg, out):
    coupler = _read_matrix(args.coupler)
    modes = _parse_modes(args.modes)
    if not modes:
        raise FormatError("--modes needs at least one mode")
    n = n_modes_of(coupler)
    dec = decouple_many([coupler] * 4 ** len(modes), modes, rng=RngSpec(cfg.seed).generator())
    steps = [CouplerUse()]
    for layer in dec.layers:
        steps += [LocalStep(layer), CouplerUse()]
    seq = CompiledSequence(steps, n_modes=n, target_modes=modes, seed=cfg.seed)
    report = {
        "coupler_count": seq.coupler_count,
        "scale": dec.scale,
        "cross_block_residual": dec.cross_residual,
        "tol": cfg.tol_struct,
        "retries": dec.retries,
        "ok": bool(dec.cross_residual <= cfg.tol_struct * dec.scale),
        "per_mode_blocks": dec.per_mode_blocks.tolist(),
    }
    _write_output(cfg, out, io.dumps(io.sequence_to_dict(seq, report)))
    return EXIT_OK if report["ok"] else EXIT_VERIFY


def _render_sequence(seq, coupler):
    """Human view of the product, last applied on the left, with running checks."""
    n_local = 0
    names = []
    M = np.eye(2 * seq.n_modes)
    rows = []
    for k, step in enumerate(seq.steps):
        if isinstance(step, CouplerUse):
            names.append("S")
            M = coupler @ M
        else:
            n_local += 1
            names.append(f"L({n_local})")
            M = embed_local(step.blocks) @ M
        rows.append(
            f"  step {k + 1:3d} {names[-1]:>6}: max|M| {np.max(np.abs(M)):.3e}  "
            f"symplectic residual {symplectic_residual(M):.3e}"
        )
    return ["S_eff = " + "·".join(reversed(names))] + rows


def cmd_synthesize(args, cfg, out):
    coupler = _read_matrix(args.coupler)
    target = _read_matrix(args.target)
    modes = _parse_modes(args.modes) if args.modes else list(range(n_modes_of(target)))
    tol = cfg.tol_struct
    seq, report = compile_operation(
        coupler, target, modes, RngSpec(cfg.seed, cfg.scheme), tol=tol, eps_block=cfg.eps_block
    )
    seq.seed = cfg.seed
    text = io.dumps(io.sequence_to_dict(seq, report))
    summary = {k: v for k, v in report.to_dict().items() if k not in ("target", "achieved")}
    if cfg.output and cfg.output != "-":
        Path(cfg.output).write_text(text)
        lines = [
            f"coupler uses: {report.coupler_count}",
            f"target block residual: {report.target_block_residual:.3e}",
            f"cross block residual: {report.cross_block_residual:.3e}",
            f"scale: {report.scale:.3e}  tol: {tol:.1e}  -> {'ok' if report.ok else 'FAIL'}",
        ]
        if cfg.format == "human":
            lines += _render_sequence(seq, coupler)
        _emit(cfg, out, summary, lines)
    else:
        out.write(text)
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_verify(args, cfg, out):
    coupler = _read_matrix(args.coupler)
    obj = io.loads(_read(args.sequence), str(args.sequence))
    seq, report = io.sequence_from_dict(obj, str(args.sequence))
    if seq.n_modes != n_modes_of(coupler):
        raise FormatError("sequence and coupler have different numbers of modes")
    tol = cfg.tol_struct
    M = left_fold(coupler, obj["steps"])
    scale = running_scale(coupler, obj["steps"])
    result = {"coupler_count": seq.coupler_count, "scale": scale, "tol": tol}
    ok = True
    if report and "achieved" in report:
        diff = relative_difference(M, report["achieved"], scale)
        result["report_difference"] = diff
        ok &= diff <= tol
    target = _read_matrix(args.target) if args.target else (
        np.array(report["target"]) if report and "target" in report else None
    )
    if target is not None:
        ell = n_modes_of(target)
        modes = _parse_modes(args.modes) if args.modes else (seq.target_modes or list(range(ell)))
        if len(modes) != ell:
            raise FormatError(f"target acts on {ell} modes, sequence names {len(modes)}")
        idx = quadrature_indices(modes)
        residual = float(np.max(np.abs(M[np.ix_(idx, idx)] - target)))
        rest = np.delete(np.arange(M.shape[0]), idx)
        cross = float(max(np.max(np.abs(M[np.ix_(idx, rest)]), initial=0.0),
                          np.max(np.abs(M[np.ix_(rest, idx)]), initial=0.0)))
        result.update(target_residual=residual / scale, cross_residual=cross / scale)
        ok &= residual <= tol * scale and cross <= tol * scale
    result["ok"] = bool(ok)
    lines = [f"{k}: {v}" for k, v in result.items()]
    _emit(cfg, out, result, lines)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_colorsets(args, cfg, out):
    S = _read_matrix(args.file)
    partition = color_partition(S, cfg.eps_block)
    try:
        perm = induced_permutation(S, partition, cfg.eps_block)
    except InconsistentPartition:
        perm = partition.successor
    sat = randomize_saturate(S, RngSpec(cfg.seed), eps_block=cfg.eps_block)
    payload = io.partition_to_dict(partition, sat.copies_used, perm)
    lines = [
        f"color sets: {payload['color_sets']}",
        f"permutation: {payload['permutation']}",
        f"copies used for saturation: {payload['copies_used']}",
    ]
    text = io.dumps(payload) if cfg.format == "json" else "\n".join(lines) + "\n"
    _write_output(cfg, out, text)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", "--tol-struct", dest="tol", type=float, default=TOL_SYNTH,
                        help="relative residual tolerance for synthesis and verification")
    common.add_argument("--tol-symp", type=float, default=None,
                        help="absolute symplectic residual tolerance (default: scaled)")
    common.add_argument("--block-eps", type=float, default=EPS_BLOCK, help="zero-block threshold")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--scheme", choices=("factored", "exponential"), default="factored")
    common.add_argument("--format", choices=("json", "human"), default="json")
    common.add_argument("--output", "-o", default=None)

    parser = argparse.ArgumentParser(prog="gucsynth", description=__doc__.splitlines()[0])
    parser.add_argument("--batch", help="file with one command line per job")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("validate", parents=[common], help="check a matrix file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("random", parents=[common], help="sample a random coupler")
    p.add_argument("--modes", type=int, required=True)
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("decouple", parents=[common], help="isolate modes with 4**l coupler uses")
    p.add_argument("coupler")
    p.add_argument("--modes", required=True, help="comma-separated modes to isolate (0-based)")
    p.set_defaults(func=cmd_decouple)

    p = sub.add_parser("synthesize", parents=[common], help="compile a target operation")
    p.add_argument("coupler")
    p.add_argument("target")
    p.add_argument("--modes", help="comma-separated target modes (0-based)")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("verify", parents=[common], help="re-evaluate a sequence file")
    p.add_argument("coupler")
    p.add_argument("sequence")
    p.add_argument("target", nargs="?")
    p.add_argument("--modes", help="target modes, overriding the sequence file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("colorsets", parents=[common], help="color partition of a coupler")
    p.add_argument("file")
    p.set_defaults(func=cmd_colorsets)
    return parser


def run(argv, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    if args.batch:
        return _run_batch(args.batch, out, err)
    if not args.command:
        parser.print_help(out)
        return EXIT_PARSE
    try:
        return args.func(args, CliConfig.from_args(args), out)
    except GucError as exc:
        err.write(f"error: {exc}\n")
        return exc.exit_code


def _run_batch(path, out, err):
    try:
        jobs = [shlex.split(line) for line in _read(path).splitlines() if line.strip()]
    except FormatError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_PARSE

    def one(argv):
        buf, ebuf = _io.StringIO(), _io.StringIO()
        code = run(argv, buf, ebuf)
        return {"job": shlex.join(argv), "exit_code": code, "output": buf.getvalue(),
                "error": ebuf.getvalue()}

    with ThreadPoolExecutor() as pool:
        results = list(pool.map(one, jobs))
    out.write(io.dumps(results))
    return max((r["exit_code"] for r in results), default=EXIT_OK)


def main(argv=None):
    sys.exit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
