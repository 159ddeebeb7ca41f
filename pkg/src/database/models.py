"""Modelos del registro de corridas de Config Count."""

from __future__ import annotations

from datetime import datetime
from enum import Enum

from sqlalchemy import (
    Boolean,
    Column,
    DateTime,
    Float,
    Integer,
    String,
    Text,
)
from sqlalchemy.orm import declarative_base

# Base para todos los modelos
Base = declarative_base()


class RunStatus(str, Enum):
    """Estados de una corrida."""
    OK = "ok"
    FAILED = "failed"
    CAP_EXCEEDED = "cap_exceeded"


class RunRecord(Base):
    """Manifiesto de una corrida de escenario."""

    __tablename__ = "runs"

    id = Column(String(36), primary_key=True, index=True)  # UUID
    kind = Column(String(30), nullable=False, index=True)
    seed = Column(String(20), nullable=False)  # 64 bits no caben en INTEGER de SQLite
    scenario_hash = Column(String(64), nullable=False, index=True)
    rng_algorithm = Column(String(20), nullable=False)
    package_version = Column(String(20), nullable=False)
    numpy_version = Column(String(20), nullable=False)
    status = Column(String(20), nullable=False, default=RunStatus.OK)
    wall_time_s = Column(Float)
    artifact_path = Column(Text)
    manifest_path = Column(Text)
    created_at = Column(DateTime, default=datetime.utcnow)

    def __repr__(self) -> str:
        return f"<RunRecord(kind='{self.kind}', seed={self.seed}, status='{self.status}')>"


class CriterionRecord(Base):
    """Resultado de un criterio de la suite de aceptación."""

    __tablename__ = "acceptance_results"

    id = Column(String(36), primary_key=True, index=True)  # UUID
    suite_id = Column(String(36), nullable=False, index=True)
    number = Column(Integer, nullable=False)
    name = Column(String(100), nullable=False)
    measured = Column(Text)
    threshold = Column(Text)
    passed = Column(Boolean, nullable=False)
    runtime_s = Column(Float)
    created_at = Column(DateTime, default=datetime.utcnow)

    def __repr__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"<CriterionRecord(number={self.number}, name='{self.name}', {verdict})>"
