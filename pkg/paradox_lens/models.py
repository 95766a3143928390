import math

from datetime import datetime
from pydantic import BaseModel, ConfigDict, Field, field_serializer, model_validator
from typing import Literal

__all__ = [
    "BaseImmutableModel",
    # Ingestion:
    "IngestionReport",
    # Structural targets:
    "LogNormalParams",
    "JointDegreeTarget",
    "CorePeripheryWiring",
    # Generation:
    "GenerationSpec",
    "GenerationReport",
    # Prediction:
    "ModelInputs",
    # Artifacts:
    "OutputFile",
    "RunManifest",
]


JOINT_NORMALIZATION_TOLERANCE = 1e-9


class BaseImmutableModel(BaseModel):
    # Immutable hashable record
    model_config = ConfigDict(frozen=True)


class IngestionReport(BaseImmutableModel):
    raw_lines: int = Field(..., ge=0)
    parsed_edges: int = Field(..., ge=0)
    dropped_self_loops: int = Field(..., ge=0)
    deduplicated_edges: int = Field(..., ge=0)
    relabeled_ids: bool
    isolated_nodes: int = Field(..., ge=0)

    # original_ids[i] is the input id of node i; omitted from serialized reports
    original_ids: tuple[int, ...] = Field(default=(), exclude=True, repr=False)


class LogNormalParams(BaseImmutableModel):
    """
    Bivariate log-normal joint degree model: both edge-endpoint log-degrees have mean m and standard deviation s, and
    their correlation coefficient is c.
    """

    m: float
    s: float = Field(..., gt=0)
    c: float = Field(..., gt=-1, lt=1)


class JointDegreeTarget(BaseImmutableModel):
    """
    Sparse symmetric joint degree distribution e(k, k'), listed as (k, k', value) triples. Both orientations of an
    off-diagonal cell must be present.
    """

    entries: tuple[tuple[int, int, float], ...] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _check_symmetric_and_normalized(self):
        cells: dict[tuple[int, int], float] = {}
        for k, k2, v in self.entries:
            if k < 1 or k2 < 1:
                raise ValueError(f"degrees must be positive, got ({k}, {k2})")
            if v < 0:
                raise ValueError(f"negative mass at ({k}, {k2})")
            cells[(k, k2)] = cells.get((k, k2), 0.0) + v

        for (k, k2), v in cells.items():
            if abs(cells.get((k2, k), 0.0) - v) > JOINT_NORMALIZATION_TOLERANCE:
                raise ValueError(f"joint degree target is not symmetric at ({k}, {k2})")

        if abs(math.fsum(cells.values()) - 1.0) > JOINT_NORMALIZATION_TOLERANCE:
            raise ValueError("joint degree target does not sum to 1")

        return self


class CorePeripheryWiring(BaseImmutableModel):
    # Degree shared by every mid-tier node
    mid_degree: int = Field(..., ge=2)
    # Probability that a mid-tier node prefers the core
    beta: float = Field(..., ge=0, le=1)
    # Fraction of a mid-tier node's edges that go to its preferred tier
    majority: float = Field(default=0.9, ge=0.5, le=1)
    # Edge probability inside the core
    core_density: float = Field(default=0.5, gt=0, le=1)

    @property
    def core_link_split(self) -> tuple[int, int]:
        major = round(self.mid_degree * self.majority)
        return major, self.mid_degree - major

    def expected_core_degree(self, n_core: int, n_mid: int) -> float:
        """Mean core degree: the core's own random graph plus the mid tier's expected core-bound edges."""
        major, minor = self.core_link_split
        core_bound = n_mid * (self.beta * major + (1 - self.beta) * minor)
        return self.core_density * (n_core - 1) + core_bound / n_core

    def check_tiers(self, n_core: int, n_mid: int) -> None:
        """Raises ValueError unless the core sits above the mid tier in expected degree."""
        core_degree = self.expected_core_degree(n_core, n_mid)
        if core_degree <= self.mid_degree:
            raise ValueError(
                f"expected core degree {core_degree:.2f} does not exceed mid_degree={self.mid_degree}; "
                f"raise core_density or beta, or shrink the core"
            )


class GenerationSpec(BaseImmutableModel):
    target_e: JointDegreeTarget | LogNormalParams
    node_count: int = Field(..., ge=2)
    seed: int = Field(..., ge=0, lt=2**64)
    max_retries: int = Field(default=100, ge=0)
    # Only used for log-normal targets: upper end of the discretized degree support
    k_max: int = Field(default=10_000, ge=2)
    # Largest tolerated total-variation shift of the class-pair distribution caused by edges the repair pass drops
    repair_tolerance: float = Field(default=1e-3, ge=0)


class GenerationReport(BaseImmutableModel):
    seed: int
    spec_digest: str
    node_count: int = Field(..., ge=0)
    edge_count: int = Field(..., ge=0)
    sampled_edges: int = Field(..., ge=0)
    relabeled_ends: int = Field(..., ge=0)
    repaired_conflicts: int = Field(..., ge=0)
    dropped_conflicts: int = Field(..., ge=0)
    # Total-variation distance between realized and target e(k, k')
    joint_tv_distance: float = Field(..., ge=0)
    # Total-variation distance between realized p(k) and the target-induced p(k)
    degree_tv_distance: float = Field(..., ge=0)
    # Assortativity of the target as fitted to the generated degree classes
    target_assortativity: float = Field(..., ge=-1, le=1)
    realized_assortativity: float


class ModelInputs(BaseImmutableModel):
    mu: dict[int, float]
    cov: dict[int, float] | None = None
    p: dict[int, float]

    @model_validator(mode="after")
    def _check_domains(self):
        if set(self.mu) != set(self.p):
            raise ValueError("mu and p must be defined on the same degree classes")
        for k, m in self.mu.items():
            if k < 1:
                raise ValueError(f"degree classes must be positive, got {k}")
            if not (0.0 <= m <= 1.0):
                raise ValueError(f"mu({k}) = {m} is outside [0, 1]")
        if self.cov is not None:
            if missing := sorted(k for k in self.mu if k >= 2 and k not in self.cov):
                raise ValueError(f"covariance missing for degree classes {missing[:10]}")
        return self


class OutputFile(BaseImmutableModel):
    path: str
    sha256: str


class RunManifest(BaseImmutableModel):
    command_line: tuple[str, ...]
    command: Literal["analyze", "predict", "generate", "sweep", "rewire"]
    input_digests: dict[str, str]
    seeds: tuple[int, ...] = ()
    tool_version: str
    summary_schema_version: str
    timestamp: datetime
    outputs: tuple[OutputFile, ...]

    @field_serializer("input_digests")
    def serialize_input_digests(self, input_digests: dict[str, str], _info):
        # make dict serialization have a consistent order
        return dict(sorted(input_digests.items()))
