"""Classical and quantum monotone metrics as one family on finite-dimensional
W*-algebras, with numerical checks of monotonicity under channels."""

from .algebra import (
    AlgebraElement,
    AlgebraSignature,
    adjoint,
    gns_inner,
    identity,
    is_positive,
    multiply,
    trace_pair,
)
from .channels import (
    Channel,
    apply,
    congruent_embedding_classical,
    congruent_embedding_quantum,
    heisenberg_dual,
    is_faithful,
    make_channel,
    markov_channel,
    random_channel,
)
from .errors import WStarError
from .funcalc import CATALOG, MonotoneFunction, admit, apply_F, apply_modular, get_function
from .metrics import GramReport, fisher_rao, gram, metric_gns_form, metric_trace_form
from .states import (
    FaithfulState,
    TangentVector,
    anticommutator_solve,
    from_probability_vector,
    make_state,
    random_faithful_state,
    tangent_basis,
)
from .verify import (
    SearchConfig,
    cencov_reduction_check,
    counterexample_search,
    invariance_check,
    monotonicity_check,
    pullback_gram,
)

__version__ = "0.1.0"
