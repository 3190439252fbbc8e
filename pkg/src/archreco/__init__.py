"""archreco: static architecture reconstruction via schema-gated extractors.

Reconstruction runs independently per repository, producing JSON model
files that aggregate into a unified architecture model; cross-service
relationships are expressed as ``$LINK`` entities resolved after
aggregation.
"""

from .aggregate import aggregate, aggregate_models, compatible, merge_arrays
from .engine import (
    MAX_DEPTH,
    Delta,
    PassReport,
    compute_delta,
    create_model_entity,
    run_extractors,
)
from .errors import (
    ArchrecoError,
    ConfigError,
    ConflictError,
    DepthLimitError,
    ExtractorError,
    IllegalMutationError,
    InvalidEntityError,
    LinkResolutionError,
    ParseError,
    PatternError,
    PointerSyntaxError,
    ProtocolError,
    RegistrationError,
    SchemaError,
    TimeoutError,
    VersionError,
)
from .config import ReconstructionConfig, build_registry, load_config
from .linking import ResolutionReport, is_link, make_link, resolve_links
from .model import (
    EXTRACTORS_KEY,
    FORMAT_VERSION,
    LINK_TYPE,
    NOT_FOUND,
    TYPE_KEY,
    UUIDS_KEY,
    ModelFile,
    SequentialIds,
    compile_schema,
    is_internal_key,
    json_equal,
    new_entity,
    read_model_file,
    resolve_pointer,
    structural_problems,
    validate_entity,
    write_model_file,
)
from .registry import (
    ExternalCommand,
    ExtractorRegistry,
    ExtractorSpec,
    RunContext,
    invoke_external,
    register_extractor,
)
from .std_extractors import builtin_specs
from .scan import ContentMatch, find_files_containing, get_paths, search_content, string_literal_pattern, url_pattern

__version__ = "0.1.0"

__all__ = [
    "ArchrecoError",
    "ConfigError",
    "ConflictError",
    "ContentMatch",
    "Delta",
    "DepthLimitError",
    "EXTRACTORS_KEY",
    "ExternalCommand",
    "ExtractorError",
    "ExtractorRegistry",
    "ExtractorSpec",
    "FORMAT_VERSION",
    "IllegalMutationError",
    "InvalidEntityError",
    "LINK_TYPE",
    "LinkResolutionError",
    "MAX_DEPTH",
    "ModelFile",
    "NOT_FOUND",
    "ParseError",
    "PassReport",
    "PatternError",
    "PointerSyntaxError",
    "ProtocolError",
    "RegistrationError",
    "ResolutionReport",
    "RunContext",
    "SchemaError",
    "SequentialIds",
    "TYPE_KEY",
    "TimeoutError",
    "UUIDS_KEY",
    "VersionError",
    "ReconstructionConfig",
    "aggregate",
    "aggregate_models",
    "build_registry",
    "builtin_specs",
    "compatible",
    "compile_schema",
    "compute_delta",
    "create_model_entity",
    "find_files_containing",
    "get_paths",
    "invoke_external",
    "is_internal_key",
    "is_link",
    "json_equal",
    "load_config",
    "make_link",
    "merge_arrays",
    "new_entity",
    "read_model_file",
    "register_extractor",
    "resolve_links",
    "resolve_pointer",
    "run_extractors",
    "search_content",
    "string_literal_pattern",
    "structural_problems",
    "url_pattern",
    "validate_entity",
    "write_model_file",
]
