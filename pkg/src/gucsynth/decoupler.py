"""Interference-based decoupling of bosonic modes.

Four symplectic matrices ``S1..S4`` are interleaved with three local layers so
that ``R = S4 L3 S3 L2 S2 L1 S1`` acts on one chosen mode independently of all
the others. Nesting the construction over groups of four isolates several modes
with ``4**l`` matrices and ``4**l - 1`` layers.

Mode indices are 0-based throughout; mode ``m`` owns quadratures ``2m, 2m+1``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, InvalidDimension, NonGenericIntermediate, NonGenericPair
from .symplectic import (
    OMEGA_1,
    TOL_STRUCT,
    embed_local,
    identity_layer,
    max_abs,
    n_modes_of,
    quadrature_indices,
    random_local_layer,
)

# Global sign of the local matching map: local_match(u, v) sends u to MATCH_SIGN * Omega v.
MATCH_SIGN = 1

PAIR_EPS = 1e-12
MAX_RETRIES = 8
# A decoupling whose scale exceeds its inputs' by more than this factor came from
# nearly vanishing pairs; it is retried like a vanishing pair and the best kept.
GROWTH_LIMIT = 100.0


@dataclass
class SandwichT:
    """``T = S_b @ L @ S_a`` whose row and column ``2*mode`` pair only with ``2*mode+1``."""

    matrix: np.ndarray
    inner_layer: np.ndarray
    mode: int
    sign: int
    scale: float
    structure_residual: float


@dataclass
class DecoupledR:
    matrix: np.ndarray
    mode: int
    layers: tuple
    single_mode_block: np.ndarray
    remainder: np.ndarray
    T1: SandwichT
    T2: SandwichT
    scale: float
    cross_residual: float
    retries: int = 0


@dataclass
class MultiDecoupled:
    matrix: np.ndarray
    decoupled_modes: list
    per_mode_blocks: np.ndarray
    remainder: np.ndarray
    layers: list
    scale: float
    cross_residual: float
    retries: int = 0
    levels: list = field(default_factory=list)


def _match_block(a, b, c, d):
    # Maps (a, b) to (d, -c) == omega @ (c, d); det is 1 by construction.
    nu = a * a + b * b
    nv = c * c + d * d
    return np.array(
        [
            [d * a / nu - c * b / nv, d * b / nu + c * a / nv],
            [-c * a / nu - d * b / nv, -c * b / nu + d * a / nv],
        ]
    )


def local_match(u, v, skip=(), eps=PAIR_EPS, label=None):
    """Local layer ``L`` with ``embed_local(L) @ u == MATCH_SIGN * Omega @ v``.

    Each mode is handled by its own 2x2 block. A mode whose pairs vanish in both
    ``u`` and ``v`` (or is listed in ``skip``) gets the identity block; a mode
    whose pair vanishes on one side only raises :class:`NonGenericPair`.
    Pairs with norm below ``eps`` times the vector scale count as zero.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1 or u.size % 2:
        raise InvalidDimension(f"quadrature vectors of shapes {u.shape} and {v.shape}")
    n = u.size // 2
    skip = set(skip)
    zero_u = eps * max(max_abs(u), 1e-300)
    zero_v = eps * max(max_abs(v), 1e-300)
    blocks = identity_layer(n)
    for m in range(n):
        if m in skip:
            continue
        a, b = u[2 * m : 2 * m + 2]
        c, d = v[2 * m : 2 * m + 2]
        u_zero = np.hypot(a, b) <= zero_u
        v_zero = np.hypot(c, d) <= zero_v
        if u_zero and v_zero:
            continue
        if u_zero or v_zero:
            raise NonGenericPair(m, "source" if u_zero else "target", label)
        blocks[m] = MATCH_SIGN * _match_block(a, b, c, d)
    return blocks


def _t_structure(T, mode, sign):
    i = 2 * mode
    row = T[i].copy()
    col = T[:, i].copy()
    row_dev = abs(row[i + 1] - sign)
    col_dev = abs(col[i + 1] + sign)
    row[i + 1] = 0.0
    col[i + 1] = 0.0
    return max(max_abs(row), max_abs(col), row_dev, col_dev)


def build_T(S_a, S_b, mode, skip=(), scale=None, label=None):
    """Sandwich ``S_b @ L @ S_a`` with ``L`` sending column ``2*mode`` of ``S_a``
    onto ``MATCH_SIGN * Omega`` times row ``2*mode`` of ``S_b``."""
    S_a = np.asarray(S_a, dtype=float)
    S_b = np.asarray(S_b, dtype=float)
    if S_a.shape != S_b.shape:
        raise InvalidDimension(f"shape mismatch {S_a.shape} vs {S_b.shape}")
    n = n_modes_of(S_a)
    if not 0 <= mode < n:
        raise InvalidArgument(f"mode {mode} out of range for {n} modes")
    i = 2 * mode
    layer = local_match(S_a[:, i], S_b[i, :], skip=skip, label=label)
    LS = embed_local(layer) @ S_a
    T = S_b @ LS
    if scale is None:
        scale = max(max_abs(S_a), max_abs(S_b))
    scale = max(scale, max_abs(LS), max_abs(T))
    return SandwichT(
        matrix=T,
        inner_layer=layer,
        mode=mode,
        sign=MATCH_SIGN,
        scale=scale,
        structure_residual=_t_structure(T, mode, MATCH_SIGN),
    )


def second_layer_vectors(T1, T2, mode):
    """Vectors ``(u, v, C)`` that fix the middle layer of the decoupling.

    ``u`` is column ``2*mode+1`` of ``T1``; ``v = beta - C * alpha`` with
    ``alpha, beta`` rows ``2*mode, 2*mode+1`` of ``T2`` and
    ``C = alpha . beta - chi . gamma`` using columns ``chi, gamma`` of ``T1``.
    """
    i = 2 * mode
    alpha, beta = T2[i], T2[i + 1]
    chi, gamma = T1[:, i], T1[:, i + 1]
    C = float(alpha @ beta - chi @ gamma)
    return gamma.copy(), beta - C * alpha, C


def build_L2(T1, T2, skip=()):
    """Middle layer turning two sandwiches into a decoupled ``R``.

    The block on the decoupled mode is ``-MATCH_SIGN * omega``; every other
    block matches column ``2*mode+1`` of ``T1`` against row ``2*mode+1`` of ``T2``.
    """
    if T1.mode != T2.mode:
        raise InvalidArgument("sandwiches decouple different modes")
    mode = T1.mode
    u, v, _ = second_layer_vectors(T1.matrix, T2.matrix, mode)
    layer = local_match(u, v, skip=set(skip) | {mode}, label="middle layer")
    layer[mode] = -MATCH_SIGN * OMEGA_1
    return layer


def cross_block_residual(M, modes):
    """Largest entry coupling ``modes`` to any other mode (and each other)."""
    M = np.asarray(M)
    worst = 0.0
    n = n_modes_of(M)
    for m in modes:
        rows = slice(2 * m, 2 * m + 2)
        others = np.delete(np.arange(2 * n), [2 * m, 2 * m + 1])
        worst = max(worst, max_abs(M[rows][:, others]), max_abs(M[others][:, rows]))
    return worst


def remove_modes(M, modes):
    keep = np.delete(np.arange(M.shape[0]), quadrature_indices(modes))
    return M[np.ix_(keep, keep)]


def _decouple_one(S_list, mode, skip, scales):
    S1, S2, S3, S4 = S_list
    T1 = build_T(S1, S2, mode, skip, scale=max(scales[0], scales[1]), label="factors 1-2")
    T2 = build_T(S3, S4, mode, skip, scale=max(scales[2], scales[3]), label="factors 3-4")
    L2 = build_L2(T1, T2, skip)
    LT = embed_local(L2) @ T1.matrix
    R = T2.matrix @ LT
    scale = max(T1.scale, T2.scale, max_abs(LT), max_abs(R))
    return T1, T2, L2, R, scale


def decouple_one(S_list, mode, skip=(), rng=None, max_retries=MAX_RETRIES, scales=None):
    """Decouple ``mode`` using four symplectic matrices (first applied first).

    ``skip`` lists modes that are already isolated; their blocks in every local
    layer are the identity. If a non-generic pair shows up and ``rng`` is given,
    the two inner factors are wrapped in random local layers (absorbed into the
    neighbouring layer slots) and the construction is retried. The same retry
    runs when the result grows by more than ``GROWTH_LIMIT`` over the inputs;
    the attempt with the smallest scale is returned.
    """
    S_list = [np.asarray(S, dtype=float) for S in S_list]
    if len(S_list) != 4:
        raise InvalidArgument(f"decoupling needs 4 matrices, got {len(S_list)}")
    n = n_modes_of(S_list[0])
    if any(S.shape != S_list[0].shape for S in S_list):
        raise InvalidDimension("all four matrices must have the same size")
    if not 0 <= mode < n:
        raise InvalidArgument(f"mode {mode} out of range for {n} modes")
    skip = set(skip) - {mode}
    if scales is None:
        scales = [max_abs(S) for S in S_list]

    ident = identity_layer(n)
    pre = [ident, ident, ident]   # applied before the computed layer in each slot
    post = [ident, ident, ident]  # applied after it
    factors = list(S_list)
    base = max(scales)
    best = None
    attempt = 0
    while True:
        try:
            found = _decouple_one(factors, mode, skip, scales)
        except NonGenericPair as exc:
            if best is None and (rng is None or attempt >= max_retries):
                if rng is None:
                    raise
                raise NonGenericIntermediate(0, mode, exc) from exc
        else:
            if best is None or found[4] < best[0][4]:
                best = (found, pre, post, attempt)
            if rng is None or found[4] <= GROWTH_LIMIT * base:
                break
        if attempt >= max_retries:
            break
        attempt += 1
        fresh = [_random_layer_except(n, skip, rng) for _ in range(4)]
        # S2 -> A S2 B and S3 -> C S3 D; B, A, D, C land in slots 1, 2, 2, 3.
        factors[1] = embed_local(fresh[0]) @ S_list[1] @ embed_local(fresh[1])
        factors[2] = embed_local(fresh[2]) @ S_list[2] @ embed_local(fresh[3])
        pre = [ident, fresh[0], fresh[2]]
        post = [fresh[1], fresh[3], ident]
        scales = list(scales)
        scales[1] = max(scales[1], max_abs(factors[1]))
        scales[2] = max(scales[2], max_abs(factors[2]))
    (T1, T2, L2, R, scale), pre, post, used = best
    computed = (T1.inner_layer, L2, T2.inner_layer)
    layers = tuple(post[k] @ computed[k] @ pre[k] for k in range(3))
    i = 2 * mode
    return DecoupledR(
        matrix=R,
        mode=mode,
        layers=layers,
        single_mode_block=R[i : i + 2, i : i + 2].copy(),
        remainder=remove_modes(R, [mode]),
        T1=T1,
        T2=T2,
        scale=scale,
        cross_residual=cross_block_residual(R, [mode]),
        retries=used,
    )


def _random_layer_except(n, skip, rng):
    layer = random_local_layer(n, rng)
    for m in skip:
        layer[m] = np.eye(2)
    return layer


def decouple_many(S_list, modes, rng=None, max_retries=MAX_RETRIES):
    """Isolate every mode in ``modes`` using ``4**len(modes)`` matrices.

    The matrices are split into four consecutive groups; each group isolates
    ``modes[:-1]`` recursively, then the four results isolate ``modes[-1]``.
    Returns the ``4**l - 1`` local layers in application order.
    """
    modes = [int(m) for m in modes]
    if not modes:
        raise InvalidArgument("need at least one mode to decouple")
    if len(set(modes)) != len(modes):
        raise InvalidArgument(f"modes {modes} are not distinct")
    S_list = [np.asarray(S, dtype=float) for S in S_list]
    if len(S_list) != 4 ** len(modes):
        raise InvalidArgument(
            f"isolating {len(modes)} modes needs {4 ** len(modes)} matrices, got {len(S_list)}"
        )
    n = n_modes_of(S_list[0])
    if len(modes) > n or any(not 0 <= m < n for m in modes):
        raise InvalidArgument(f"modes {modes} invalid for {n} modes")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    matrix, layers, scale, retries, levels = _decouple_many(S_list, modes, rng, max_retries)
    return MultiDecoupled(
        matrix=matrix,
        decoupled_modes=modes,
        per_mode_blocks=np.array([matrix[2 * m : 2 * m + 2, 2 * m : 2 * m + 2] for m in modes]),
        remainder=remove_modes(matrix, modes),
        layers=layers,
        scale=scale,
        cross_residual=cross_block_residual(matrix, modes),
        retries=retries,
        levels=levels,
    )


def _decouple_many(S_list, modes, rng, max_retries):
    level = len(modes) - 1
    if level == 0:
        parts = [(S, [], max_abs(S), 0, []) for S in S_list]
    else:
        q = len(S_list) // 4
        parts = [
            _decouple_many(S_list[k * q : (k + 1) * q], modes[:-1], rng, max_retries)
            for k in range(4)
        ]
    try:
        R = decouple_one(
            [p[0] for p in parts],
            modes[-1],
            skip=modes[:-1],
            rng=rng,
            max_retries=max_retries,
            scales=[p[2] for p in parts],
        )
    except NonGenericIntermediate as exc:
        raise NonGenericIntermediate(level, modes[-1], exc.cause) from exc
    layers = []
    for k, part in enumerate(parts):
        layers.extend(part[1])
        if k < 3:
            layers.append(R.layers[k])
    retries = R.retries + sum(p[3] for p in parts)
    levels = [lv for p in parts for lv in p[4]] + [R]
    return R.matrix, layers, max(R.scale, *(p[2] for p in parts)), retries, levels
