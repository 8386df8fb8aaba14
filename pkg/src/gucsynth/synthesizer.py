"""Compile a target Gaussian operation into uses of one fixed coupler.

For a target ``G`` on ``l`` modes the first coupler use is split, purely
algebraically, as ``S = S' (G + I)``. Decoupling the ``l`` target modes from the list
``[S', S, ..., S]`` leaves single-mode blocks on them, which a final recovery
layer undoes. Evaluated with the real coupler, the emitted sequence equals
``G`` on the target modes and some ``S*`` on the rest.
"""

from dataclasses import dataclass

import numpy as np

from .colorsets import (
    EPS_BLOCK,
    EPS_GENERIC,
    color_partition,
    feasibility,
    genericity_check,
    randomize_saturate,
)
from .decoupler import MAX_RETRIES, decouple_many, remove_modes
from .errors import InfeasibleTarget, InvalidArgument, NonGenericCoupler
from .sequence import (
    CompiledSequence,
    CouplerUse,
    LocalStep,
    evaluate_with_scale,
    merge_local_steps,
)
from .symplectic import (
    RngSpec,
    _generator,
    embed_on_modes,
    identity_layer,
    max_abs,
    n_modes_of,
    quadrature_indices,
    symplectic_inverse,
    validate_symplectic,
)

TOL_SYNTH = 1e-7
DECOUPLING_SHARE = 0.6


@dataclass
class SynthesisRequest:
    coupler: np.ndarray
    target: np.ndarray
    target_modes: list
    tol: float = TOL_SYNTH

    def __post_init__(self):
        self.coupler = validate_symplectic(self.coupler, name="coupler")
        self.target = validate_symplectic(self.target, name="target")
        self.target_modes = [int(m) for m in self.target_modes]
        n = n_modes_of(self.coupler)
        ell = n_modes_of(self.target)
        if len(self.target_modes) != ell:
            raise InvalidArgument(
                f"target acts on {ell} modes but {len(self.target_modes)} target modes given"
            )
        if len(set(self.target_modes)) != ell or any(not 0 <= m < n for m in self.target_modes):
            raise InvalidArgument(f"target modes {self.target_modes} invalid for {n} modes")
        if not self.tol > 0:
            raise InvalidArgument("tolerance must be positive")


@dataclass
class SynthesisReport:
    """Outcome of a synthesis, with residuals relative to ``scale``.

    ``scale`` is the largest max-abs entry over all partial products of the
    sequence. ``decoupling_residual`` measures leftover coupling of the target
    modes before recovery, ``recovery_residual`` how well the recovery layer
    cancels the single-mode blocks; they get 60% and 40% of ``tol``.
    """

    achieved: np.ndarray
    target: np.ndarray
    target_modes: list
    remainder: np.ndarray
    scale: float
    target_block_residual: float
    cross_block_residual: float
    decoupling_residual: float
    recovery_residual: float
    coupler_count: int
    tol: float
    retries: int = 0

    @property
    def ok(self):
        return (
            self.target_block_residual <= self.tol * self.scale
            and self.cross_block_residual <= self.tol * self.scale
            and self.decoupling_residual <= DECOUPLING_SHARE * self.tol
            and self.recovery_residual <= (1 - DECOUPLING_SHARE) * self.tol
        )

    def to_dict(self):
        return {
            "coupler_count": self.coupler_count,
            "scale": self.scale,
            "target_block_residual": self.target_block_residual,
            "cross_block_residual": self.cross_block_residual,
            "decoupling_residual": self.decoupling_residual,
            "recovery_residual": self.recovery_residual,
            "tol": self.tol,
            "retries": self.retries,
            "ok": self.ok,
            "target": self.target.tolist(),
            "achieved": self.achieved.tolist(),
        }


def fictitious_decompose(S, target, target_modes):
    """``S'`` with ``S' @ (target + I) == S``, the target embedded on ``target_modes``."""
    S = np.asarray(S, dtype=float)
    E = embed_on_modes(target, target_modes, n_modes_of(S))
    return S @ symplectic_inverse(E)


def recovery_layer(blocks, target_modes, n_modes):
    """Local layer holding the inverses of ``blocks`` on ``target_modes``.

    Blocks that came out of long products have ``det`` slightly off 1; the
    inverse is rescaled to ``det == 1`` so the layer stays symplectic, and the
    leftover ``sqrt(det)`` shows up in the recovery residual instead.
    """
    layer = identity_layer(n_modes)
    for m, B in zip(target_modes, blocks):
        B = np.asarray(B, dtype=float)
        adj = np.array([[B[1, 1], -B[0, 1]], [-B[1, 0], B[0, 0]]])
        det = B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0]
        if not det > 0:
            raise InvalidArgument(f"block on mode {m} has det {det}, expected 1")
        layer[m] = adj / np.sqrt(det)
    return layer


def _report(seq, coupler, target, target_modes, tol, decoupling_residual, recovery_residual, retries):
    achieved, scale = evaluate_with_scale(seq, coupler)
    idx = quadrature_indices(target_modes)
    return SynthesisReport(
        achieved=achieved,
        target=np.asarray(target, dtype=float),
        target_modes=list(target_modes),
        remainder=remove_modes(achieved, target_modes),
        scale=scale,
        target_block_residual=max_abs(achieved[np.ix_(idx, idx)] - target),
        cross_block_residual=_cross_to_rest(achieved, target_modes),
        decoupling_residual=decoupling_residual,
        recovery_residual=recovery_residual,
        coupler_count=seq.coupler_count,
        tol=tol,
        retries=retries,
    )


def _cross_to_rest(M, modes):
    idx = quadrature_indices(modes)
    rest = np.delete(np.arange(M.shape[0]), idx)
    if rest.size == 0:
        return 0.0
    return max(max_abs(M[np.ix_(idx, rest)]), max_abs(M[np.ix_(rest, idx)]))


def synthesize(req, rng=None, max_retries=MAX_RETRIES):
    """Compile ``req.target`` into ``4**l`` uses of the generic coupler ``req.coupler``.

    Returns ``(CompiledSequence, SynthesisReport)``. Raises
    :class:`NonGenericCoupler` (or :class:`InfeasibleTarget` if the target spans
    several color sets) when the coupler has vanishing quadrature pairs; use
    :func:`compile_operation` to saturate such couplers first.
    """
    S = req.coupler
    n = n_modes_of(S)
    modes = req.target_modes
    if not genericity_check(S, EPS_GENERIC).is_generic:
        partition = color_partition(S)
        if not feasibility(partition, modes):
            raise InfeasibleTarget(modes, partition.sets)
        raise NonGenericCoupler("coupler has vanishing quadrature pairs; saturate it first")
    gen = _generator(rng if rng is not None else RngSpec())
    seed = rng.seed if isinstance(rng, RngSpec) else None

    S_prime = fictitious_decompose(S, req.target, modes)
    ell = len(modes)
    dec = decouple_many([S_prime] + [S] * (4**ell - 1), modes, rng=gen, max_retries=max_retries)
    recovery = recovery_layer(dec.per_mode_blocks, modes, n)

    steps = [CouplerUse()]
    for layer in dec.layers:
        steps += [LocalStep(layer), CouplerUse()]
    steps.append(LocalStep(recovery))
    seq = CompiledSequence(steps, n_modes=n, target_modes=list(modes), seed=seed)

    cancel = max(
        max_abs(recovery[m] @ B - np.eye(2)) for m, B in zip(modes, dec.per_mode_blocks)
    )
    report = _report(
        seq, S, req.target, modes, req.tol, dec.cross_residual / dec.scale, cancel, dec.retries
    )
    return seq, report


def compile_operation(coupler, target, target_modes, rng=None, tol=TOL_SYNTH,
                      eps_block=EPS_BLOCK, max_copies=None):
    """Full pipeline: check feasibility, saturate non-generic couplers, synthesize.

    Generic couplers go straight to :func:`synthesize`. Otherwise the coupler is
    replaced by a saturated randomized sequence ``S'`` (block-diagonal over color
    sets); synthesis runs on the color set holding the target and every use of
    ``S'`` is expanded back into real coupler uses.
    """
    req = SynthesisRequest(coupler, target, target_modes, tol)
    S = req.coupler
    n = n_modes_of(S)
    if genericity_check(S, EPS_GENERIC).is_generic:
        return synthesize(req, rng)

    partition = color_partition(S, eps_block)
    if not feasibility(partition, req.target_modes):
        raise InfeasibleTarget(req.target_modes, partition.sets)
    gen = _generator(rng if rng is not None else RngSpec())
    sat = randomize_saturate(S, gen, max_copies=max_copies, eps_block=eps_block)
    members = partition.sets[partition.color_of(req.target_modes[0])]
    idx = quadrature_indices(members)
    sub_coupler = sat.matrix[np.ix_(idx, idx)]
    if not genericity_check(sub_coupler, EPS_GENERIC).is_generic:
        raise NonGenericCoupler("saturated coupler is still non-generic on the target color set")
    sub_modes = [members.index(m) for m in req.target_modes]
    sub_seq, sub_report = synthesize(SynthesisRequest(sub_coupler, req.target, sub_modes, tol), gen)

    steps = []
    for step in sub_seq.steps:
        if isinstance(step, CouplerUse):
            steps.extend(sat.sequence.steps)
        else:
            layer = identity_layer(n)
            layer[members] = step.blocks
            steps.append(LocalStep(layer))
    seq = CompiledSequence(
        merge_local_steps(steps),
        n_modes=n,
        target_modes=list(req.target_modes),
        seed=rng.seed if isinstance(rng, RngSpec) else None,
    )
    report = _report(
        seq, S, req.target, req.target_modes, tol,
        sub_report.decoupling_residual, sub_report.recovery_residual, sub_report.retries,
    )
    return seq, report
