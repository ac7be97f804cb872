from .boolean import PowersetAlgebra, ba_laws, generated_subalgebra
from .builtins import (
    builtin_structure,
    dual_numbers,
    gf,
    poly_quotient,
    powerset_algebra,
    with_derivation,
    with_projector,
    zmod,
)
from .evaluate import (
    EvaluationError,
    assignments,
    check_dagger,
    compile_formula,
    definable_set,
    eval_formula,
)
from .structure import (
    FiniteStructure,
    ProductStructure,
    StructureError,
    expand,
    product_structure,
    reduct,
    structure_from_ops,
    substructure,
)


def direct_product(factors, name: str = "") -> FiniteStructure:
    """Componentwise product of ``factors`` as a plain structure."""
    return product_structure(factors, name).structure
