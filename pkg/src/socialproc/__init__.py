"""socialproc: an executable engine for social protocols.

Protocols pair a social network of abstract resources with a bipartite
interaction net of states and role-bound activities. They are
implemented against concrete resources, instantiated into processes
with role assignments and a marking, executed by firing activities, and
adapted at run time through validated edit transactions decided by
meta-processes.
"""

from .adaptation import (
    AddActivity,
    AddEdge,
    AddState,
    AdaptationRecord,
    EditTransaction,
    MetaProcess,
    ReassignRole,
    RemapActivity,
    RemoveActivity,
    RemoveEdge,
    RemoveState,
    apply_transaction,
    builtin_meta_protocol,
    conclude_meta_process,
    replay_process,
    set_process_status,
    start_meta_process,
    transaction_from_dict,
)
from .canonical import canonical_json, content_hash
from .engine import (
    COMPLETED,
    PAUSED,
    RUNNING,
    Event,
    SocialProcess,
    StepClock,
    SystemClock,
    enabled_activities,
    fire,
    instantiate,
    reachable_markings,
    replay_trace,
    snapshot,
)
from .environment import ImplementedResource, SocialEnvironment
from .errors import EngineError
from .implementation import (
    ActionDescriptor,
    ImplementedSocialProtocol,
    completeness_report,
    implement_protocol,
    protocol_version,
)
from .interchange import process_from_dict, process_to_dict
from .library import FileStore, LibraryEntry, load_artifact, save_artifact, search_library
from .model import (
    AbstractActivity,
    AbstractInteractionProtocol,
    AbstractResource,
    AbstractSocialNetwork,
    AbstractSocialProtocol,
    Edge,
    Relation,
    StateNode,
    compose_abstract_protocol,
    validate_interaction_protocol,
    validate_social_network,
)
from .report import ValidationReport, Violation

__all__ = [name for name in dir() if not name.startswith("_")]
