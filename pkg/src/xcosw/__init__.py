"""xcosw: block-diagram modeling and simulation workbench.

Build diagrams programmatically or load them from Xcos-compatible XML /
interchange JSON, validate and compile them into executable systems, and
integrate with fixed-step RK4 or an adaptive Dormand–Prince 4(5) pair.
A CLI (``xcosw``) and an HTTP service wrap the same library.

>>> from xcosw import Diagram, compile_diagram, simulate
>>> d = Diagram(title="lag")
>>> step = d.add_block("STEP_FUNCTION", {"step_time": 0.0})
>>> lag = d.add_block("CLR", {"num": "1", "den": "0.5*s+1"})
>>> scope = d.add_block("CSCOPE")
>>> d.connect((step, 0), (lag, 0)) and d.connect((lag, 0), (scope, 0)) and None
>>> result = simulate(compile_diagram(d))
"""

from .blocks import (
    BlockSpec,
    ImproperTFError,
    NotSampledError,
    StateSpace,
    UnknownKindError,
    block_derivative,
    block_discrete_update,
    block_output,
    palette,
    tf_to_state_space,
)
from .compiler import (
    AlgebraicLoopError,
    CompiledSystem,
    Diagnostic,
    NotValidatedError,
    compile_diagram,
    feedthrough_graph,
    schedule,
    validate,
)
from .export import export_csv, parse_csv, result_from_json, result_to_json
from .interchange import (
    SchemaViolationError,
    from_interchange,
    from_interchange_json,
    to_interchange,
    to_interchange_json,
)
from .model import (
    BadEndpointError,
    Block,
    Diagram,
    DiagramError,
    DuplicateIdError,
    Link,
    OptionsError,
    PortOccupiedError,
    SimOptions,
)
from .params import (
    ExprSyntaxError,
    ParamError,
    ParamValue,
    TransferFunction,
    UnsetParamError,
    WrongShapeError,
    format_param,
    parse_param_expr,
)
from .solver import (
    NonFiniteError,
    SimulationResult,
    SimulationTimeout,
    SolverError,
    StepUnderflowError,
    rk4_step,
    sample_schedule,
    simulate,
    simulate_adaptive,
    simulate_fixed,
)
from .xcosxml import (
    BadReferenceError,
    MissingRootCellsError,
    XcosXmlError,
    XmlSyntaxError,
    parse_xcos_xml,
    serialize_xcos_xml,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "Diagram", "Block", "Link", "SimOptions",
    "DiagramError", "BadEndpointError", "PortOccupiedError", "DuplicateIdError",
    "OptionsError",
    # parameters
    "ParamValue", "TransferFunction", "parse_param_expr", "format_param",
    "ParamError", "ExprSyntaxError", "WrongShapeError", "UnsetParamError",
    # palette
    "BlockSpec", "StateSpace", "palette", "tf_to_state_space",
    "block_output", "block_derivative", "block_discrete_update",
    "UnknownKindError", "ImproperTFError", "NotSampledError",
    # persistence
    "parse_xcos_xml", "serialize_xcos_xml",
    "XcosXmlError", "XmlSyntaxError", "MissingRootCellsError", "BadReferenceError",
    "to_interchange", "from_interchange", "to_interchange_json",
    "from_interchange_json", "SchemaViolationError",
    # compilation
    "validate", "compile_diagram", "feedthrough_graph", "schedule",
    "CompiledSystem", "Diagnostic", "AlgebraicLoopError", "NotValidatedError",
    # solving
    "simulate", "simulate_fixed", "simulate_adaptive", "rk4_step",
    "sample_schedule", "SimulationResult",
    "SolverError", "NonFiniteError", "StepUnderflowError", "SimulationTimeout",
    # exports
    "export_csv", "parse_csv", "result_to_json", "result_from_json",
]
