"""Servicio del registro de corridas y resultados de aceptación."""

from __future__ import annotations

from datetime import datetime
from typing import Any, Dict, List, Optional
from uuid import uuid4

from sqlalchemy import desc
from sqlalchemy.orm import Session

from src.database.connection import create_db_session
from src.database.models import CriterionRecord, RunRecord, RunStatus
from src.utils.logging import get_logger

logger = get_logger(__name__)


class RunRegistryService:
    """Guardar manifiestos de corridas y veredictos de la suite de aceptación."""

    def __init__(self, db_session: Optional[Session] = None):
        self._db_session = db_session

    @property
    def db_session(self) -> Session:
        if self._db_session is None:
            self._db_session = create_db_session()
        return self._db_session

    def record_run(self, manifest: Dict[str, Any]) -> RunRecord:
        """Registrar una corrida a partir de su manifiesto."""
        try:
            record = RunRecord(
                id=str(uuid4()),
                kind=manifest["kind"],
                seed=str(manifest["seed"]),
                scenario_hash=manifest["scenario_hash"],
                rng_algorithm=manifest["rng_algorithm"],
                package_version=manifest["package_version"],
                numpy_version=manifest["numpy_version"],
                status=manifest.get("status", RunStatus.OK.value),
                wall_time_s=manifest.get("wall_time_s"),
                artifact_path=manifest.get("artifact"),
                manifest_path=manifest.get("manifest"),
                created_at=datetime.now(),
            )
            self.db_session.add(record)
            self.db_session.commit()

            logger.debug(f"Corrida registrada: {record.id} ({record.kind})")
            return record

        except Exception as e:
            self.db_session.rollback()
            logger.error(f"Error al registrar corrida: {e}")
            raise

    def record_acceptance(self, suite_id: str, results: List[Any]) -> List[CriterionRecord]:
        """Registrar los resultados de una ejecución de la suite."""
        try:
            records = [
                CriterionRecord(
                    id=str(uuid4()),
                    suite_id=suite_id,
                    number=result.number,
                    name=result.name,
                    measured=result.measured,
                    threshold=result.threshold,
                    passed=result.passed,
                    runtime_s=result.runtime_s,
                    created_at=datetime.now(),
                )
                for result in results
            ]
            self.db_session.add_all(records)
            self.db_session.commit()

            logger.debug(f"Suite {suite_id}: {len(records)} criterios registrados")
            return records

        except Exception as e:
            self.db_session.rollback()
            logger.error(f"Error al registrar resultados de aceptación: {e}")
            raise

    def list_runs(self, kind: Optional[str] = None, limit: int = 20) -> List[RunRecord]:
        """Corridas más recientes, opcionalmente filtradas por tipo."""
        try:
            query = self.db_session.query(RunRecord)
            if kind:
                query = query.filter(RunRecord.kind == kind)
            return query.order_by(desc(RunRecord.created_at)).limit(limit).all()

        except Exception as e:
            logger.error(f"Error al listar corridas: {e}")
            raise

    def find_by_hash(self, scenario_hash: str) -> List[RunRecord]:
        """Corridas previas del mismo escenario."""
        try:
            return (
                self.db_session.query(RunRecord)
                .filter(RunRecord.scenario_hash == scenario_hash)
                .order_by(RunRecord.created_at)
                .all()
            )
        except Exception as e:
            logger.error(f"Error al buscar corridas por hash: {e}")
            raise
