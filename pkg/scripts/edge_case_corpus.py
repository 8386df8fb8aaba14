"""Color sets and saturation cost on seeded block-permutation couplers.

Prints, per coupler, the planted groups, the recovered color sets, the order of
the induced permutation and the number of coupler copies randomized saturation
needed, against the 2N^2 budget.

    python3 scripts/edge_case_corpus.py --count 40 --seed 0
"""

import argparse
from math import lcm

from gucsynth.colorsets import color_partition, induced_permutation, randomize_saturate
from gucsynth.edge_cases import edge_case_corpus
from gucsynth.symplectic import RngSpec


def permutation_order(perm):
    seen, order = set(), 1
    for start in range(len(perm)):
        length, c = 0, start
        while c not in seen:
            seen.add(c)
            c = perm[c]
            length += 1
        if length:
            order = lcm(order, length)
    return order


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--count", type=int, default=40)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    worst = 0.0
    print(f"{'N':>2} {'recovered':>6} {'order':>5} {'copies':>6} {'2N^2':>4}  color sets")
    for k, (groups, _, S) in enumerate(edge_case_corpus(args.count, RngSpec(args.seed))):
        n = S.shape[0] // 2
        partition = color_partition(S)
        perm = induced_permutation(S, partition)
        sat = randomize_saturate(S, RngSpec(args.seed + k))
        recovered = sorted(map(sorted, groups)) == partition.sets
        worst = max(worst, sat.copies_used / (2 * n * n))
        print(f"{n:>2} {str(recovered):>6} {permutation_order(perm):>5} {sat.copies_used:>6} {2 * n * n:>4}  {partition.sets}")
    print(f"worst copies / 2N^2: {worst:.3f}")


if __name__ == "__main__":
    main()
