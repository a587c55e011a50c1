"""ptacheck: parametric timed automata, their emptiness and parameter synthesis.

The library decides language emptiness for fixed integer parameter
valuations (exact continuous-time semantics over a region graph),
reduces one-parametric-clock automata to parametric 0/1-timed automata
by corner-point abstraction, encodes two-counter Minsky machines, and
performs bounded parameter synthesis for reachability and safety.
"""

from .model import (
    PTA,
    TAU,
    Guard,
    ModelError,
    SimpleConstraint,
    Transition,
    max_constant,
    normalize,
    parametric_clocks,
    product,
    substitute_params,
)
from .parser import Network, network_to_text, parse_network, parse_pta, pta_to_text
from .regions import (
    ABOVE,
    CornerPoint,
    Iota,
    Region,
    corners_of,
    initial_region,
    iota,
    region_of,
    region_satisfies,
    render_region,
    reset_cp,
    reset_region,
    succ_cp,
    succ_region,
)
from .semantics import (
    Configuration,
    EmptinessResult,
    StepError,
    TimedRun,
    delay,
    empty,
    export_region_graph_dot,
    fire,
    initial_configuration,
    replay,
    run_from_json,
    run_to_json,
)
from .zerone import (
    Triple,
    ZeroOneTA,
    add_fractional_clock,
    build_01,
    concretize_run,
    corresponds,
    project_run,
    rewrite_guard,
    zo_empty,
)
from .minsky import (
    Halt,
    Inc,
    MinskyMachine,
    MinskyOutcome,
    TestDec,
    encode_reach,
    encode_safe,
    interpret,
    minsky_to_text,
    parse_minsky,
)
from .solver import (
    BackendDisagreement,
    CheckOutcome,
    SynthesisQuery,
    SynthesisResult,
    check,
    enumerate_valuations,
    solve,
)

__version__ = "0.1.0"
