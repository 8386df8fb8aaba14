"""Edge-case analysis: genericity, mode graphs and color sets.

A coupler ``S`` induces a directed graph on its modes with an arrow ``i -> j``
whenever the 2x2 block of ``S`` taking input mode ``i`` to output mode ``j`` is
nonzero. Contracting the successors of every vertex with two or more outgoing
arrows, until none is left, yields the color sets: groups of modes that the
coupler only ever permutes as a whole.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistentPartition, InvalidArgument, SaturationNotReached
from .symplectic import _generator, embed_local, max_abs, n_modes_of, random_local_layer
from .sequence import CompiledSequence, CouplerUse, LocalStep

EPS_GENERIC = 1e-10
EPS_BLOCK = 1e-10


@dataclass
class GenericityReport:
    """Vanishing quadrature pairs of a matrix.

    Each violation is ``(side, k, m)``: on the ``"row"`` side entries
    ``S[k, 2m]`` and ``S[k, 2m+1]`` both vanish, on the ``"column"`` side
    ``S[2m, k]`` and ``S[2m+1, k]`` do.
    """

    violations: list = field(default_factory=list)

    @property
    def is_generic(self):
        return not self.violations


def genericity_check(S, eps=EPS_GENERIC):
    S = np.asarray(S, dtype=float)
    n = n_modes_of(S)
    cut = eps * max_abs(S)
    pairs_row = np.abs(S).reshape(2 * n, n, 2).max(axis=2)       # [k, m]
    pairs_col = np.abs(S).reshape(n, 2, 2 * n).max(axis=1)       # [m, k]
    violations = [("row", int(k), int(m)) for k, m in zip(*np.nonzero(pairs_row <= cut))]
    violations += [("column", int(k), int(m)) for m, k in zip(*np.nonzero(pairs_col <= cut))]
    violations.sort(key=lambda v: (v[0] != "row", v[1], v[2]))
    return GenericityReport(violations)


def block_norms(S):
    """``norms[j, i]`` is the Frobenius norm of the block from input ``i`` to output ``j``."""
    S = np.asarray(S, dtype=float)
    n = n_modes_of(S)
    return np.sqrt((S.reshape(n, 2, n, 2) ** 2).sum(axis=(1, 3)))


@dataclass
class ModeGraph:
    n_vertices: int
    edges: frozenset
    block_norms: np.ndarray = None

    def successors(self, i):
        return sorted(j for a, j in self.edges if a == i)

    @classmethod
    def from_edges(cls, n_vertices, edges):
        return cls(n_vertices, frozenset((int(a), int(b)) for a, b in edges))


def build_graph(S, eps_block=EPS_BLOCK):
    norms = block_norms(S)
    cut = eps_block * max(1.0, max_abs(S))
    n = norms.shape[0]
    edges = frozenset((i, j) for j in range(n) for i in range(n) if norms[j, i] > cut)
    return ModeGraph(n, edges, norms)


@dataclass
class ColorPartition:
    """Color sets (sorted by smallest member) and the contracted successor map.

    ``successor[c]`` is the color that color ``c`` feeds into, or ``None`` if
    it has no outgoing arrow. For graphs of symplectic matrices it is a
    permutation of the colors.
    """

    sets: list
    successor: list
    merges: int = 0

    @property
    def color_count(self):
        return len(self.sets)

    def color_of(self, mode):
        for c, members in enumerate(self.sets):
            if mode in members:
                return c
        raise InvalidArgument(f"mode {mode} is not in the partition")


def contract(graph, order=None):
    """Merge successors of any vertex with two or more outgoing arrows until none remain.

    Self-loops count as outgoing arrows. Among eligible vertices the one whose
    lowest member comes first in ``order`` (default: natural order) is
    contracted first.
    """
    n = graph.n_vertices
    rank = {v: k for k, v in enumerate(range(n) if order is None else order)}
    if sorted(rank) != list(range(n)):
        raise InvalidArgument("order must be a permutation of the vertices")
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    succ = {i: set() for i in range(n)}
    for i, j in graph.edges:
        succ[i].add(j)

    merges = 0
    while True:
        classes = {}
        for v in range(n):
            classes.setdefault(find(v), []).append(v)
        out = {
            root: {find(j) for v in members for j in succ[v]}
            for root, members in classes.items()
        }
        eligible = [root for root in classes if len(out[root]) >= 2]
        if not eligible:
            break
        pick = min(eligible, key=lambda r: min(rank[v] for v in classes[r]))
        targets = sorted(out[pick])
        keep = min(targets)
        for t in targets:
            if t != keep:
                parent[t] = keep
                merges += 1

    classes = {}
    for v in range(n):
        classes.setdefault(find(v), []).append(v)
    sets = sorted((sorted(m) for m in classes.values()), key=lambda m: m[0])
    color = {v: c for c, members in enumerate(sets) for v in members}
    successor = []
    for members in sets:
        outs = {color[j] for v in members for j in succ[v]}
        successor.append(outs.pop() if outs else None)
    return ColorPartition(sets, successor, merges)


def color_partition(S, eps_block=EPS_BLOCK):
    return contract(build_graph(S, eps_block))


def induced_permutation(S, partition, eps_block=EPS_BLOCK):
    """Color each color set is sent to by one application of ``S``.

    Raises :class:`InconsistentPartition` if some color feeds into several
    colors or the map is not a bijection.
    """
    graph = build_graph(S, eps_block)
    color = {v: c for c, members in enumerate(partition.sets) for v in members}
    if sorted(color) != list(range(graph.n_vertices)):
        raise InconsistentPartition("partition does not cover the modes of the matrix")
    perm = []
    for c, members in enumerate(partition.sets):
        outs = {color[j] for i, j in graph.edges if i in members}
        if len(outs) != 1:
            raise InconsistentPartition(f"color {c} feeds into colors {sorted(outs)}")
        perm.append(outs.pop())
    if sorted(perm) != list(range(len(perm))):
        raise InconsistentPartition(f"induced map {perm} is not a bijection")
    return perm


def feasibility(partition, target_modes):
    """True iff all ``target_modes`` lie in one color set."""
    return len({partition.color_of(m) for m in target_modes}) <= 1


@dataclass
class SaturatedForm:
    """Randomized sequence whose product is block-diagonal over the color sets."""

    sequence: CompiledSequence
    matrix: np.ndarray
    partition: ColorPartition
    copies_used: int


def _is_saturated(M, partition, eps_block):
    norms = block_norms(M)
    scale = max(1.0, max_abs(M))
    color = np.empty(norms.shape[0], dtype=int)
    for c, members in enumerate(partition.sets):
        color[members] = c
    same = color[:, None] == color[None, :]
    return bool(
        np.all(norms[~same] <= eps_block * scale)
        and np.all(norms[same] > np.sqrt(eps_block) * scale)
    )


def randomize_saturate(S, rng, max_copies=None, eps_block=EPS_BLOCK):
    """Wrap ``S`` in random local layers, one extra use at a time, until saturated.

    The product ``L[k+1] S L[k] ... S L[1]`` is accepted once every block
    inside a color set is dense and every block across color sets vanishes.
    """
    S = np.asarray(S, dtype=float)
    n = n_modes_of(S)
    if max_copies is None:
        max_copies = 2 * n * n
    gen = _generator(rng)
    partition = color_partition(S, eps_block)
    first = random_local_layer(n, gen)
    steps = [LocalStep(first)]
    M = embed_local(first)
    for k in range(1, max_copies + 1):
        layer = random_local_layer(n, gen)
        steps += [CouplerUse(), LocalStep(layer)]
        M = embed_local(layer) @ S @ M
        if _is_saturated(M, partition, eps_block):
            seq = CompiledSequence(steps, n_modes=n)
            return SaturatedForm(seq, M, partition, k)
    raise SaturationNotReached(
        f"no saturated form within {max_copies} coupler copies; check the block threshold"
    )

