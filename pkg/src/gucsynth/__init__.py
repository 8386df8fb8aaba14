"""Interference-based synthesis of Gaussian operations from one fixed coupler."""

from .colorsets import (
    ColorPartition,
    GenericityReport,
    ModeGraph,
    build_graph,
    color_partition,
    contract,
    feasibility,
    genericity_check,
    induced_permutation,
    randomize_saturate,
)
from .decoupler import build_L2, build_T, decouple_many, decouple_one, local_match
from .sequence import CompiledSequence, CouplerUse, LocalStep, evaluate
from .symplectic import (
    RngSpec,
    compose,
    embed_local,
    euler_decompose,
    is_symplectic,
    random_local_layer,
    random_symplectic,
    rotation,
    squeeze,
    symplectic_form,
    symplectic_inverse,
)
from .synthesizer import (
    SynthesisReport,
    SynthesisRequest,
    compile_operation,
    fictitious_decompose,
    recovery_layer,
    synthesize,
)

__version__ = "0.1.0"
