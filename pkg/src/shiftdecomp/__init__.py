"""Exact decompositions of sliding block codes between shift spaces."""

from .algebra import (
    AlgebraicReal,
    EntropyValue,
    PeriodicCensus,
    Tol,
    compare,
    crossover_bound,
    census_dominated_below,
    entropy,
    entropy_from_base,
    is_perron,
    is_weak_perron,
    q_census,
    two_pow,
)
from .codes import (
    BlockMap,
    CodeChain,
    apply,
    block_map,
    compose,
    compose_chain,
    identity_code,
    image,
    is_embedding,
    is_factor_onto,
    one_block_code,
    verify_decomposition,
)
from .embedding import (
    BlowupSpec,
    EmbedPreconditionReport,
    EntropySetQuery,
    blow_up,
    build_Bn,
    census_sandwich,
    embedding_preconditions,
    membership,
    subshift_between_search,
)
from .factor import (
    DecompositionReport,
    decompose_dense,
    sample_S0,
    split_sft,
    split_sofic,
)
from .shiftspace import (
    EdgeShift,
    SftForbidden,
    SoficPresentation,
    StructureFacts,
    determinize,
    edge_shift,
    forbid,
    has_fixed_point,
    higher_block,
    is_k_step,
    is_synchronizing,
    sft,
    sofic,
    structure,
    trim,
    words,
)

__all__ = [
    "AlgebraicReal",
    "BlockMap",
    "BlowupSpec",
    "CodeChain",
    "DecompositionReport",
    "EdgeShift",
    "EmbedPreconditionReport",
    "EntropySetQuery",
    "EntropyValue",
    "PeriodicCensus",
    "SftForbidden",
    "SoficPresentation",
    "StructureFacts",
    "Tol",
    "apply",
    "block_map",
    "blow_up",
    "build_Bn",
    "census_dominated_below",
    "census_sandwich",
    "compare",
    "compose",
    "compose_chain",
    "crossover_bound",
    "decompose_dense",
    "determinize",
    "edge_shift",
    "embedding_preconditions",
    "entropy",
    "entropy_from_base",
    "forbid",
    "has_fixed_point",
    "higher_block",
    "identity_code",
    "image",
    "is_embedding",
    "is_factor_onto",
    "is_k_step",
    "is_perron",
    "is_synchronizing",
    "is_weak_perron",
    "membership",
    "one_block_code",
    "q_census",
    "sample_S0",
    "sft",
    "sofic",
    "split_sft",
    "split_sofic",
    "structure",
    "subshift_between_search",
    "trim",
    "two_pow",
    "verify_decomposition",
    "words",
]
