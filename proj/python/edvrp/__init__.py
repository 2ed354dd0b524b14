"""Multi-vehicle path planning for field operations."""

from ._edvrp import (
    EdvrpError,
    Env,
    EnvService,
    Scenario,
    dynamic,
    evaluate,
    generate,
    render_field,
    render_plan,
    solve,
    validate,
)

__all__ = [
    "EdvrpError",
    "Env",
    "EnvService",
    "Scenario",
    "dynamic",
    "evaluate",
    "generate",
    "render_field",
    "render_plan",
    "solve",
    "validate",
]
