from .ast import (
    FALSE,
    TRUE,
    And,
    App,
    Const,
    DaggerAxiom,
    Eq,
    Exists,
    Forall,
    Formula,
    FormulaError,
    Imp,
    Not,
    Or,
    Rel,
    Signature,
    Term,
    Var,
    check_formula,
    conj,
    disj,
    free_vars,
    iff,
    is_prenex,
    is_quantifier_free,
    quantifier_depth,
    split_prefix,
    substitute,
)
from .signatures import (
    BOOLEAN_ALGEBRA,
    LATTICE_RING,
    RING,
    RING_DELTA,
    RING_P,
    RING_PAIR,
    VALUED_RING,
    builtin_signature,
)
from .text import (
    parse_formula,
    parse_signature,
    parse_term,
    print_formula,
    print_signature,
    print_term,
)
from .transforms import (
    JetSpec,
    ProjectorError,
    encode_open,
    nnf,
    projector_translate,
    relativize,
    to_basic,
    to_prenex,
    unfold_differential_terms,
)
