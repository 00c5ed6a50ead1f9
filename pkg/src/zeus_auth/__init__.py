"""Domain-oriented fact comparison authentication: library, simulator and harness."""

from .agents import (
    FormRule,
    PartyAgent,
    PolicyKind,
    SelectionPolicy,
    absorb,
    make_impostor,
    select_fact,
)
from .comparison import (
    DIFFERENCE,
    RESULTANT_DOMAIN,
    SUM,
    Combiner,
    CombinerKind,
    TargetSet,
    combine,
    in_target,
    joint_match,
)
from .domain import (
    ALWAYS,
    Aggregator,
    AlwaysTrue,
    DefiningProperty,
    Domain,
    DomainMapping,
    Fact,
    FactForm,
    LabelHasPrefix,
    MagnitudeInRange,
    MagnitudeRule,
    OperatorDef,
    add_fact,
    add_operator,
    apply_operator,
    domains_comparable_at,
    make_domain,
    make_mapping,
    map_facts,
    outcome,
)
from .experiment import (
    monte_carlo_acceptance,
    oracle_acceptance,
    run_experiment,
    simulate_session,
    sweep_thresholds,
    trial_verdicts,
)
from .machine import (
    ProtocolMode,
    RoundRecord,
    SessionConfig,
    SessionState,
    Status,
    finalize,
    init_session,
    reduce_nparty,
    should_continue,
    step_round,
)
from .rendezvous import Transcript, run_session
from .replay import replay_transcript
from .scenario import load_scenario
from .wire import decode_message, encode_message, open_loopback_pair

__version__ = "0.1.0"
