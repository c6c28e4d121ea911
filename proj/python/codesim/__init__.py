"""Program-simulation benchmark: task generation, prompting, scoring and runs."""

from ._core import (
    CodesimError,
    ConfigError,
    EmptyInput,
    FixtureMissing,
    InfeasibleParams,
    IntegerOverflow,
    IoError,
    LengthMismatch,
    NotStraightLine,
    ParseError,
    StepLimitExceeded,
    StyleMismatch,
    UninitialisedRead,
    UnknownAlgorithm,
    UnknownIdentifier,
    accuracy,
    backward_slice,
    build_prompt,
    corpus,
    cosm_template,
    critical_path_length,
    default_params,
    extract_answer,
    families,
    generate,
    levenshtein_similarity,
    normalise_source,
    oracle_run,
    pearson,
    run_experiments,
    run_program,
    score,
)

__all__ = [name for name in dir() if not name.startswith("_")]
