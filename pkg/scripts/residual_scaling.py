"""Synthesis residuals, running scale and retries as a function of N and l.

    python3 scripts/residual_scaling.py --samples 20 --seed 0 [--json out.json]
"""

import argparse
import json
import time

import numpy as np

from gucsynth.symplectic import RngSpec, random_symplectic
from gucsynth.synthesizer import SynthesisRequest, synthesize


def run(samples, seed, modes=range(2, 7), levels=(1, 2)):
    gen = np.random.default_rng(seed)
    rows = []
    for ell in levels:
        for n in modes:
            if ell > n:
                continue
            scales, errors, retries = [], [], []
            start = time.perf_counter()
            for _ in range(samples):
                S = random_symplectic(n, gen)
                target = random_symplectic(ell, gen)
                target_modes = sorted(gen.choice(n, size=ell, replace=False).tolist())
                _, report = synthesize(
                    SynthesisRequest(S, target, target_modes), RngSpec(int(gen.integers(2**31)))
                )
                scales.append(report.scale)
                errors.append(max(report.target_block_residual, report.cross_block_residual) / report.scale)
                retries.append(report.retries)
            rows.append({
                "l": ell,
                "n_modes": n,
                "median_scale": float(np.median(scales)),
                "max_scale": float(np.max(scales)),
                "max_relative_residual": float(np.max(errors)),
                "mean_retries": float(np.mean(retries)),
                "seconds_per_case": (time.perf_counter() - start) / samples,
            })
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--json", help="also write the table as JSON")
    args = parser.parse_args()
    rows = run(args.samples, args.seed)
    print(f"{'l':>2} {'N':>2} {'median scale':>13} {'max scale':>10} {'max resid/scale':>16} {'retries':>8} {'s/case':>7}")
    for r in rows:
        print(
            f"{r['l']:>2} {r['n_modes']:>2} {r['median_scale']:13.3e} {r['max_scale']:10.2e} "
            f"{r['max_relative_residual']:16.2e} {r['mean_retries']:8.2f} {r['seconds_per_case']:7.4f}"
        )
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
