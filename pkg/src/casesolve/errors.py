"""Exception types shared across the pipeline."""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid configuration: bad field values, dimension mismatches, etc."""


class TransportError(RuntimeError):
    """A model endpoint could not be reached or answered abnormally.

    Retryable: the request may succeed on a later attempt.
    """


class GenerationError(RuntimeError):
    """The generator returned an unusable completion (e.g. empty text)."""


class TrainingError(ValueError):
    """Classifier training cannot proceed (e.g. single-class data)."""


class PipelineError(RuntimeError):
    """A pipeline stage failed; carries the stage name for reporting."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage
        self.message = message
