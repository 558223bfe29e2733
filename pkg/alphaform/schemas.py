"""
Run configuration and report models for the alphaform command line.
"""
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Dict, List, Optional
from uuid import uuid4

from pydantic import BaseModel, ConfigDict, Field, field_validator


def _now() -> datetime:
    return datetime.now(timezone.utc)


class Command(str, Enum):
    """Top-level commands."""
    ALPHA = "alpha"
    WEDGE_CHECK = "wedge-check"
    SYMANZIK = "symanzik"
    DODGSON = "dodgson"
    VERIFY = "verify"
    GEN = "gen"
    CERTIFICATE = "certificate"
    REPORTS = "reports"


class SuiteName(str, Enum):
    """Verification suites run by ``verify``."""
    NILPOTENCY = "nilpotency"
    PIPELINES = "pipelines"
    DODGSON_IDENTITIES = "dodgson-identities"
    FORMAL_QE = "formal-qe"
    CERTIFICATES = "certificates"


class RunStatus(str, Enum):
    QUEUED = "queued"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    SKIPPED = "skipped"


class OutputFormat(str, Enum):
    TEXT = "text"
    JSON = "json"
    LATEX = "latex"


class GraphFamily(str, Enum):
    """Families emitted by ``gen``."""
    BANANA = "banana"
    THETA_SUBDIVIDED = "theta-subdivided"
    WHEEL = "wheel"
    COMPLETE = "complete"
    K4_DOUBLED = "k4-doubled"
    DUNCE = "dunce"
    DUNCE_DISJOINT = "dunce-disjoint"
    DUNCE_VERTEX_JOIN = "dunce-vertex-join"
    DUNCE_BRIDGE = "dunce-bridge"
    RANDOM = "random"


class RunConfig(BaseModel):
    """Everything a command needs besides its own positional arguments."""
    model_config = ConfigDict(use_enum_values=True)

    command: Command
    inputs: List[str] = Field(default_factory=list)
    v_star: Optional[int] = None
    output_format: OutputFormat = OutputFormat.TEXT
    with_pi: bool = False
    max_edges: int = 12
    seed: int = 0
    jobs: int = 1

    @field_validator("jobs", "max_edges")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be at least 1, got {value}")
        return value


class GraphResult(BaseModel):
    """Outcome of one suite item (a graph, a loop number or a certificate)."""
    model_config = ConfigDict(use_enum_values=True)

    name: str
    passed: bool = False
    status: RunStatus = RunStatus.QUEUED
    witness: Optional[str] = None
    details: Dict[str, Any] = Field(default_factory=dict)
    error_message: Optional[str] = None
    seconds: float = 0.0


class ReportMetadata(BaseModel):
    created_at: datetime = Field(default_factory=_now)
    started_at: Optional[datetime] = None
    completed_at: Optional[datetime] = None
    error_message: Optional[str] = None
    jobs: int = 1
    seed: int = 0


class SuiteReport(BaseModel):
    """Complete suite run; results keep input order."""
    model_config = ConfigDict(use_enum_values=True)

    report_id: str = Field(default_factory=lambda: str(uuid4()))
    suite: SuiteName
    bounds: Dict[str, Any] = Field(default_factory=dict)
    status: RunStatus = RunStatus.QUEUED
    results: List[GraphResult] = Field(default_factory=list)
    metadata: ReportMetadata = Field(default_factory=ReportMetadata)

    @property
    def passed_count(self) -> int:
        return sum(1 for r in self.results if r.passed)

    @property
    def skipped_count(self) -> int:
        return sum(1 for r in self.results if r.status == RunStatus.SKIPPED)

    @property
    def failed_count(self) -> int:
        return len(self.results) - self.passed_count - self.skipped_count

    @property
    def all_passed(self) -> bool:
        """Skipped items count against a clean run."""
        return self.status == RunStatus.COMPLETED and self.failed_count == 0 and self.skipped_count == 0

    def first_failure(self) -> Optional[GraphResult]:
        return next((r for r in self.results if not r.passed and r.status != RunStatus.SKIPPED), None)

    def summary(self) -> str:
        line = f"{self.suite}: {self.passed_count} passed, {self.failed_count} failed"
        if self.skipped_count:
            line += f", {self.skipped_count} skipped"
        failure = self.first_failure()
        if failure is not None:
            reason = failure.witness or failure.error_message or "failed"
            line += f"\nfirst failure: {failure.name}: {reason}"
        elif self.metadata.error_message:
            line += f"\nerror: {self.metadata.error_message}"
        return line
