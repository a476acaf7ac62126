"""Finite-universe laboratory for stable pair-colorings: homogeneity
checking, uniform solution translations, halting-set coding, forcing
conditions, labeled diagonalization trees, and a stage-construction
runner with verifiable transcripts."""

from .coloring import (
    Coloring,
    JoinedSet,
    VACUOUS,
    check_homogeneity,
    decode_join,
    encode_join,
    limit_color,
    random_stable_coloring,
)
from .forcing import (
    ButtonTriple,
    Condition,
    EMPTY_CONDITION,
    PressBlockedError,
    assemble_coloring,
    complete_condition,
    extend_pressing,
    extends,
    press_check,
    validate_condition,
)
from .functionals import (
    Axiom,
    ColoringTransformer,
    DIVERGENT,
    OracleFunctional,
    apply_transformer,
    check_consistency,
    evaluate,
)
from .halting import (
    CEApproximation,
    build_coding_coloring,
    decode_membership,
    least_modulus,
)
from .reductions import (
    forward_chain,
    homogeneous_to_p,
    ipt_to_homogeneous,
    limit_to_homogeneous,
    relation_matrix,
)
from .trees import (
    LabeledTree,
    TreeParams,
    UnlabelableError,
    build_tree,
    compute_sort,
    configuration,
    label_tree,
    labeled_subtree,
    prune,
    share_column,
    transition_nodes,
)

__version__ = "0.1.0"
