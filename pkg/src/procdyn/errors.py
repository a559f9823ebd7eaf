"""Exception types shared across the pipeline.

Every error carries a stable machine-readable ``code`` (snake_case) used by
the CLI (stderr diagnostics) and the HTTP layer (``{code, message, detail}``
bodies).
"""
from __future__ import annotations

from typing import Any


class PipelineError(Exception):
    """Base class for all domain errors."""

    code = "pipeline_error"

    def __init__(self, message: str, detail: Any = None):
        super().__init__(message)
        self.message = message
        self.detail = detail

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail}


# event ingestion
class MissingColumn(PipelineError):
    code = "missing_column"


class BadTimestamp(PipelineError):
    code = "bad_timestamp"


class EmptyLog(PipelineError):
    code = "empty_log"


# sd-log generation
class AllStepsInactive(PipelineError):
    code = "all_steps_inactive"


# window selection
class SeriesTooShort(PipelineError):
    code = "series_too_short"


class NoViableCandidate(PipelineError):
    code = "no_viable_candidate"


# relation detection
class TooFewSteps(PipelineError):
    code = "too_few_steps"


class AllColumnsConstant(PipelineError):
    code = "all_columns_constant"


class UnknownVariable(PipelineError):
    code = "unknown_variable"


class InsufficientSupport(PipelineError):
    code = "insufficient_support"


# model generation
class EmptySelection(PipelineError):
    code = "empty_selection"


class FlowWithoutStock(PipelineError):
    code = "flow_without_stock"


class Lag0AlgebraicCycle(PipelineError):
    code = "lag0_algebraic_cycle"


class UnknownAttachment(PipelineError):
    code = "unknown_attachment"


class InvalidElement(PipelineError):
    code = "invalid_element"


class UnsupportedConstruct(PipelineError):
    code = "unsupported_construct"


# simulation engine
class UnmatchedElement(PipelineError):
    code = "unmatched_element"


class MissingEquation(PipelineError):
    code = "missing_equation"


class Diverged(PipelineError):
    code = "diverged"


class NotEnoughSteps(PipelineError):
    code = "not_enough_steps"


# application shell
class MissingInput(PipelineError):
    code = "missing_input"


class StepFailed(PipelineError):
    code = "step_failed"


class PortInUse(PipelineError):
    code = "port_in_use"
