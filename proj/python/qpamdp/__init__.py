"""Q-PAMDP learners and parameterized-action benchmark domains."""

from ._core import (
    Config,
    ConfigError,
    Environment,
    Error,
    Rng,
    RunRecord,
    SingularSystemError,
    action_probabilities,
    aggregate,
    default_config,
    discounted_return,
    emit_outputs,
    enac_natural_gradient,
    environments,
    fourier_coefficients,
    gradient_of_H_check,
    load_config,
    make_env,
    methods,
    parse_config,
    run_experiment,
    toy_closed_forms,
    trace,
)

__all__ = [name for name in dir() if not name.startswith("_")]
