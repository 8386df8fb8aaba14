"""Write a fixed bundle of CLI artifacts (couplers, sequences, reports, partitions) to a directory.

Running it twice with the same seed must give byte-identical directories.

    python3 scripts/acceptance_artifacts.py OUTDIR [--seed 0]
"""

import argparse
import io as _io
from pathlib import Path

import numpy as np

from gucsynth import io
from gucsynth.cli import run
from gucsynth.edge_cases import circulator, pair_swap
from gucsynth.symplectic import RngSpec


def _cli(out_dir, name, *argv):
    buf, err = _io.StringIO(), _io.StringIO()
    code = run([str(a) for a in argv], buf, err)
    (out_dir / f"{name}.stdout").write_text(f"exit {code}\n{buf.getvalue()}{err.getvalue()}")
    return code


def write_bundle(out_dir, seed=0):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    c = 1 / np.sqrt(2)
    targets = {
        "identity1": np.eye(2),
        "beam_splitter": np.array([[c, 0, c, 0], [0, c, 0, c], [-c, 0, c, 0], [0, -c, 0, c]]),
        "swap": np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float),
    }
    for name, T in targets.items():
        (out / f"{name}.json").write_text(io.dump_matrix(T))
    _cli(out, "random_target", "random", "--modes", 1, "--seed", seed + 99, "-o", out / "rand1.json")
    (out / "circulator.json").write_text(io.dump_matrix(circulator(4, RngSpec(seed))))
    (out / "pair_swap.json").write_text(io.dump_matrix(pair_swap(RngSpec(seed))))

    for n in range(2, 6):
        coupler = out / f"coupler{n}.json"
        _cli(out, f"random{n}", "random", "--modes", n, "--seed", seed + n, "-o", coupler)
        _cli(out, f"validate{n}", "validate", coupler)
        _cli(out, f"decouple{n}", "decouple", coupler, "--modes", f"0,{n - 1}", "--seed", seed)
        for tname, modes in (("rand1", str(n - 1)), ("beam_splitter", "0,1"), ("swap", f"{n - 1},0")):
            seq = out / f"seq{n}_{tname}.json"
            _cli(out, f"synth{n}_{tname}", "synthesize", coupler, out / f"{tname}.json",
                 "--modes", modes, "--seed", seed, "-o", seq)
            _cli(out, f"verify{n}_{tname}", "verify", coupler, seq)

    _cli(out, "synth_pair_swap", "synthesize", out / "pair_swap.json", out / "beam_splitter.json",
         "--modes", "2,3", "--seed", seed, "-o", out / "seq_pair_swap.json")
    _cli(out, "synth_infeasible", "synthesize", out / "circulator.json", out / "beam_splitter.json",
         "--modes", "0,1", "--seed", seed)
    for name in ("circulator", "pair_swap", "coupler3"):
        _cli(out, f"colorsets_{name}", "colorsets", out / f"{name}.json", "--seed", seed)
    return sorted(p.name for p in out.iterdir())


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    names = write_bundle(args.out_dir, args.seed)
    print(f"wrote {len(names)} files to {args.out_dir}")


if __name__ == "__main__":
    main()
