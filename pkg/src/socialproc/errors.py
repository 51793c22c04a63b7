"""Engine error hierarchy.

Every error exposes a stable machine ``code`` so transports (HTTP API,
CLI exit reporting, scenario expectations) can match on it without
parsing messages. Codes are part of the public contract.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from .report import ValidationReport


class EngineError(Exception):
    code = "ENGINE_ERROR"

    def __init__(self, message: str, ids: Sequence[str] = ()):
        super().__init__(message)
        self.ids = list(ids)

    def to_dict(self) -> dict:
        return {"code": self.code, "message": str(self), "ids": self.ids}


class ReportedError(EngineError):
    """Error that carries a full validation report."""

    def __init__(self, message: str, report: "ValidationReport", ids: Sequence[str] = ()):
        super().__init__(message, ids)
        self.report = report

    def to_dict(self) -> dict:
        doc = super().to_dict()
        doc["report"] = self.report.to_dict()
        return doc


class DuplicateId(EngineError):
    code = "DUPLICATE_ID"


class UnknownResource(EngineError):
    code = "UNKNOWN_RESOURCE"


class UnknownRole(EngineError):
    code = "UNKNOWN_ROLE"


class UnknownCollaborator(EngineError):
    code = "UNKNOWN_COLLABORATOR"


class UnassignedRole(EngineError):
    code = "UNASSIGNED_ROLE"


class CrossReferenceError(ReportedError):
    code = "CROSS_REFERENCE"


class ProtocolInvalid(ReportedError):
    code = "PROTOCOL_INVALID"


class IncompleteMapping(ReportedError):
    code = "INCOMPLETE_MAPPING"


class ResourceInUse(EngineError):
    code = "RESOURCE_IN_USE"


class NotEnabled(EngineError):
    code = "NOT_ENABLED"


class ContactViolation(EngineError):
    code = "CONTACT_VIOLATION"


class ProcessNotRunning(EngineError):
    code = "PROCESS_NOT_RUNNING"


class ProcessNotPaused(EngineError):
    code = "PROCESS_NOT_PAUSED"


class IllegalTransition(EngineError):
    code = "ILLEGAL_TRANSITION"


class AdaptationInProgress(EngineError):
    code = "ADAPTATION_IN_PROGRESS"


class MetaNotDecided(EngineError):
    code = "META_NOT_DECIDED"


class TransactionInvalid(ReportedError):
    code = "TRANSACTION_INVALID"


class MigrationMissing(EngineError):
    code = "MIGRATION_MISSING"


class ReplayDivergence(EngineError):
    code = "REPLAY_DIVERGENCE"

    def __init__(self, message: str, seq: int):
        super().__init__(message, ids=[str(seq)])
        self.seq = seq


class NotFound(EngineError):
    code = "NOT_FOUND"


class ValidationFailed(ReportedError):
    code = "VALIDATION_FAILED"


class CorruptDocument(EngineError):
    code = "CORRUPT_DOCUMENT"


class StorageFailure(EngineError):
    code = "STORAGE_FAILURE"
