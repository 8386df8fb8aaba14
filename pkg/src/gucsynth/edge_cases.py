"""Constructors for couplers with vanishing block patterns.

All of them have the form ``P @ (D_1 + ... + D_k)``: dense random symplectic
blocks ``D_c`` on groups of modes followed by a mode permutation ``P`` that
sends whole groups onto groups of equal size.
"""

import numpy as np

from .errors import InvalidArgument
from .symplectic import _generator, embed_local, embed_on_modes, mode_permutation, random_local_layer, random_symplectic


def block_permutation_coupler(groups, group_perm, rng=None):
    """Coupler that mixes each group internally, then moves group ``c`` onto ``group_perm[c]``.

    ``groups`` is a list of disjoint mode lists covering ``range(N)``; mode
    ``groups[c][k]`` is sent to ``groups[group_perm[c]][k]``.
    """
    groups = [list(map(int, g)) for g in groups]
    n = sum(len(g) for g in groups)
    if sorted(m for g in groups for m in g) != list(range(n)):
        raise InvalidArgument("groups must partition range(N)")
    if sorted(group_perm) != list(range(len(groups))):
        raise InvalidArgument(f"{group_perm} is not a permutation of the groups")
    gen = _generator(rng)
    mix = np.eye(2 * n)
    perm = [0] * n
    for c, g in enumerate(groups):
        dst = groups[group_perm[c]]
        if len(dst) != len(g):
            raise InvalidArgument(f"group {c} and its image differ in size")
        if len(g) > 1:
            mix = embed_on_modes(random_symplectic(len(g), gen), g, n) @ mix
        for src, d in zip(g, dst):
            perm[src] = d
    # Singleton groups still get a random local block so every surviving block is dense.
    local = embed_local(random_local_layer(n, gen))
    return mode_permutation(perm) @ mix @ local


def circulator(n_modes, rng=None):
    """Mode ``i`` goes to mode ``i+1 (mod N)`` up to random single-mode blocks."""
    groups = [[m] for m in range(n_modes)]
    return block_permutation_coupler(groups, [(c + 1) % n_modes for c in range(n_modes)], rng)


def pair_swap(rng=None):
    """Four-mode coupler swapping the dense pairs ``{0, 1}`` and ``{2, 3}``."""
    return block_permutation_coupler([[0, 1], [2, 3]], [1, 0], rng)


def random_block_structure(n_modes, rng=None):
    """Random grouping of ``range(N)`` into at least two groups plus a size-preserving group permutation."""
    if n_modes < 2:
        raise InvalidArgument("a block structure needs at least two modes")
    gen = _generator(rng)
    labels = gen.permutation(n_modes).tolist()
    n_groups = int(gen.integers(2, n_modes + 1))
    cuts = sorted(gen.choice(np.arange(1, n_modes), size=n_groups - 1, replace=False).tolist())
    groups = [sorted(labels[a:b]) for a, b in zip([0] + cuts, cuts + [n_modes])]
    group_perm = list(range(len(groups)))
    for size in {len(g) for g in groups}:
        same = [c for c, g in enumerate(groups) if len(g) == size]
        for c, d in zip(same, gen.permutation(same).tolist()):
            group_perm[c] = d
    return groups, group_perm


def edge_case_corpus(count, rng=None, modes=range(2, 7)):
    """``count`` seeded block-permutation couplers, cycling through ``modes``."""
    gen = _generator(rng)
    modes = list(modes)
    corpus = []
    for k in range(count):
        groups, group_perm = random_block_structure(modes[k % len(modes)], gen)
        corpus.append((groups, group_perm, block_permutation_coupler(groups, group_perm, gen)))
    return corpus
