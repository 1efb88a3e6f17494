"""Semi-Markov scattering transport: samplers, limit laws and fractional operators."""

from . import (
    evolution,
    fracops,
    laws,
    levy,
    load,
    run,
    semi_markov,
    special_fn,
    streams,
    transform,
    transport,
    validate,
)

__all__ = [
    "evolution",
    "fracops",
    "laws",
    "levy",
    "load",
    "run",
    "semi_markov",
    "special_fn",
    "streams",
    "transform",
    "transport",
    "validate",
]
