"""combkit: multi-time stochastic processes with interventions.

The package represents k-step processes as combs (Choi matrices over one
output/input leg pair per time), instruments as lists of CP maps in Choi
form, and provides:

* Born-rule contraction of instrument sequences to probabilities,
* restriction of combs to fewer times by identity insertion,
* consistency checks for families of combs and of joint distributions,
* classical embedding of distributions as diagonal combs and a fixed-basis
  classicality test,
* named scenarios with frozen expected values, and a CLI.

Hot kernels run through numba when available; set ``COMBKIT_BACKEND=numpy``
to force the pure-numpy path.
"""

from ._kernels import active_name as active_backend
from ._kernels import set_backend, warmup
from .channels import (
    Basis,
    ChoiChannel,
    Instrument,
    apply_channel,
    channel_from_action,
    channel_from_kraus,
    classical_channel,
    compose,
    dephasing_channel,
    depolarizing_channel,
    generalized_identity,
    identity_channel,
    named_basis,
    projective_instrument,
    replacement_channel,
    replacement_instrument,
    unitary_channel,
)
from .combs import (
    CausalOrderReport,
    Comb,
    Dilation,
    check_causal_order,
    comb_from_chain,
    comb_from_dilation,
    contract,
    outcome_distribution,
    pad_with_identities,
    restrict,
)
from .consistency import (
    CombFamily,
    ConsistencyReport,
    DistributionFamily,
    PairDeviation,
    check_classicality,
    check_comb_consistency,
    check_distribution_consistency,
    embed_classical,
    fixed_basis_distributions,
    restriction_family,
    verify_extension,
)
from .distributions import JointDistribution, marginalize
from .errors import (
    CombKitError,
    DimensionCapError,
    NumericalIntegrityError,
    SchemaError,
    ShapeError,
    ValidationError,
)
from .scenarios import (
    SCENARIOS,
    Expectation,
    ScenarioResult,
    build_scenario,
    random_density,
    random_instrument,
    random_unitary,
)
from .tensor import LegStructure, basis_transpose, is_psd, kron, max_entangled, partial_trace
from .times import as_times, default_times

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "CausalOrderReport",
    "ChoiChannel",
    "Comb",
    "CombFamily",
    "CombKitError",
    "ConsistencyReport",
    "Dilation",
    "DimensionCapError",
    "DistributionFamily",
    "Expectation",
    "Instrument",
    "JointDistribution",
    "LegStructure",
    "NumericalIntegrityError",
    "PairDeviation",
    "SCENARIOS",
    "ScenarioResult",
    "SchemaError",
    "ShapeError",
    "ValidationError",
    "active_backend",
    "apply_channel",
    "as_times",
    "basis_transpose",
    "build_scenario",
    "channel_from_action",
    "channel_from_kraus",
    "check_causal_order",
    "check_classicality",
    "check_comb_consistency",
    "check_distribution_consistency",
    "classical_channel",
    "comb_from_chain",
    "comb_from_dilation",
    "compose",
    "contract",
    "default_times",
    "dephasing_channel",
    "depolarizing_channel",
    "embed_classical",
    "fixed_basis_distributions",
    "generalized_identity",
    "identity_channel",
    "is_psd",
    "kron",
    "marginalize",
    "max_entangled",
    "named_basis",
    "outcome_distribution",
    "pad_with_identities",
    "partial_trace",
    "projective_instrument",
    "random_density",
    "random_instrument",
    "random_unitary",
    "replacement_channel",
    "replacement_instrument",
    "restrict",
    "restriction_family",
    "set_backend",
    "unitary_channel",
    "verify_extension",
    "warmup",
]
