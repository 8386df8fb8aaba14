"""Programs of coupler uses and local layers, listed in application order."""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDimension
from .symplectic import apply_local, max_abs, n_modes_of


@dataclass(frozen=True)
class CouplerUse:
    pass


@dataclass(frozen=True, eq=False)
class LocalStep:
    blocks: np.ndarray

    def __post_init__(self):
        blocks = np.array(self.blocks, dtype=float)
        if blocks.ndim != 3 or blocks.shape[1:] != (2, 2):
            raise InvalidDimension(f"local step needs (N, 2, 2) blocks, got {blocks.shape}")
        blocks.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)


@dataclass
class CompiledSequence:
    """Ordered steps; the first element is applied first.

    The coupler itself is not stored: every :class:`CouplerUse` refers to the
    single fixed coupler handed to :func:`evaluate`.
    """

    steps: list
    n_modes: int
    target_modes: list = field(default_factory=list)
    seed: int = None

    @property
    def coupler_count(self):
        return sum(isinstance(s, CouplerUse) for s in self.steps)

    @property
    def local_layers(self):
        return [s.blocks for s in self.steps if isinstance(s, LocalStep)]

    def follows_interleaved_pattern(self):
        """True if steps read coupler, layer, coupler, layer, ..., layer."""
        if not self.steps or len(self.steps) % 2:
            return False
        return all(
            isinstance(s, CouplerUse if k % 2 == 0 else LocalStep)
            for k, s in enumerate(self.steps)
        )


def merge_local_steps(steps):
    """Fuse runs of consecutive local steps into one (later blocks act last)."""
    out = []
    for step in steps:
        if isinstance(step, LocalStep) and out and isinstance(out[-1], LocalStep):
            out[-1] = LocalStep(step.blocks @ out[-1].blocks)
        else:
            out.append(step)
    return out


def evaluate_with_scale(seq, coupler):
    """Product of all steps and the largest max-abs entry of any partial product.

    Local steps are applied as row-pair updates; they never form the
    block-diagonal ``2N x 2N`` matrix.
    """
    coupler = np.asarray(coupler, dtype=float)
    n = n_modes_of(coupler)
    if n != seq.n_modes:
        raise InvalidDimension(f"sequence acts on {seq.n_modes} modes, coupler on {n}")
    M = np.eye(2 * n)
    scale = 1.0
    for step in seq.steps:
        if isinstance(step, CouplerUse):
            M = coupler @ M
        else:
            if step.blocks.shape[0] != n:
                raise InvalidDimension(f"local step has {step.blocks.shape[0]} blocks, expected {n}")
            M = apply_local(step.blocks, M)
        scale = max(scale, max_abs(M))
    return M, scale


def evaluate(seq, coupler):
    return evaluate_with_scale(seq, coupler)[0]
