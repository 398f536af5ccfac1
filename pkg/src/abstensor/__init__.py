"""Typed abstract tensor systems: Einstein expressions, their normal forms,
string diagrams, the free traced symmetric monoidal category and concrete
rational evaluation."""

from .core import (
    EMPTY,
    RESERVED,
    Alphabet,
    Delta,
    EinsteinExpression,
    Label,
    LabelClashError,
    LabelDisciplineError,
    LabelSupply,
    TensorError,
    TensorSymbol,
    TypeMismatchError,
    contract,
    delta,
    expression,
    free_labels,
    fresh,
    product,
    relabel,
    validate,
)
from .normal_form import (
    FreeTensor,
    OracleBoundExceeded,
    canonical,
    delta_reduce,
    equivalent,
    equivalent_up_to_relabelling,
    oracle_equivalent,
)

__all__ = [
    "EMPTY",
    "RESERVED",
    "Alphabet",
    "Delta",
    "EinsteinExpression",
    "FreeTensor",
    "Label",
    "LabelClashError",
    "LabelDisciplineError",
    "LabelSupply",
    "OracleBoundExceeded",
    "TensorError",
    "TensorSymbol",
    "TypeMismatchError",
    "canonical",
    "contract",
    "delta",
    "delta_reduce",
    "equivalent",
    "equivalent_up_to_relabelling",
    "expression",
    "free_labels",
    "fresh",
    "oracle_equivalent",
    "product",
    "relabel",
    "validate",
]
