"""Extensional verification of commutator-width results for finite p-groups.

Groups are given by consistent power-commutator presentations; subgroups are
canonical induced generating sequences; commutator sets are enumerated
exactly at desk scale.
"""

__version__ = "0.1.0"

from .commutators import (
    ElementSet,
    WitnessCertificate,
    d_subgroups,
    decomposable_rank_oracle,
    find_theorem_b_witness,
    hall_congruence_check,
    honda_power_check,
    k_set,
    lemma_union_decomposition,
    replay_certificate,
    theorem_a_verdict,
    verify_lemma_D,
    x_n_set,
)
from .constructions import (
    GroupRecipe,
    build_free_class2,
    build_huppert_example,
    build_semidirect,
    emit_presentation,
    parse_presentation,
)
from .errors import GateExceeded, HypothesisError, InconsistentPresentationError, PresentationError
from .pc import (
    Element,
    PcPresentation,
    check_consistency,
    collect,
    commutator,
    conjugate,
    hall_petrescu_defect,
    inv,
    mul,
    power,
)
from .series import (
    NormalSeries,
    cf_parameters,
    chief_refinement,
    derived_subgroup,
    frattini,
    is_potent,
    is_power_abelian,
    is_powerful,
    is_uniserial_mod,
    lower_central,
    omega,
    power_subgroup,
    rank,
)
from .subgroups import (
    QuotientMap,
    Subgroup,
    condition_subgroup,
    contains,
    index,
    intersection,
    is_normal,
    normal_closure,
    product,
    quotient,
    subgroup_closure,
)
