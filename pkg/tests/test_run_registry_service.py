"""Tests para el registro de corridas."""

from __future__ import annotations

from unittest.mock import Mock

import pytest

from src.database.models import CriterionRecord, RunRecord
from src.services.acceptance_service import CriterionResult
from src.services.run_registry_service import RunRegistryService

MANIFEST = {
    "kind": "ff_count",
    "seed": 2**63,
    "scenario_hash": "a" * 64,
    "rng_algorithm": "PCG64",
    "package_version": "1.0.0",
    "numpy_version": "1.26.4",
    "status": "ok",
    "wall_time_s": 0.5,
    "artifact": "results/ff_count.csv",
    "manifest": "results/ff_count.manifest.json",
}


class TestRunRegistryService:
    """Tests para RunRegistryService con sesión simulada."""

    @pytest.fixture
    def mock_session(self):
        """Mock de sesión de base de datos."""
        return Mock()

    @pytest.fixture
    def service(self, mock_session):
        return RunRegistryService(db_session=mock_session)

    def test_record_run(self, service, mock_session):
        # Act
        record = service.record_run(MANIFEST)

        # Assert
        assert isinstance(record, RunRecord)
        assert record.seed == str(2**63)
        assert record.artifact_path == "results/ff_count.csv"
        mock_session.add.assert_called_once_with(record)
        mock_session.commit.assert_called_once()

    def test_record_run_rolls_back(self, service, mock_session):
        mock_session.commit.side_effect = Exception("database locked")

        with pytest.raises(Exception, match="database locked"):
            service.record_run(MANIFEST)

        mock_session.rollback.assert_called_once()

    def test_record_run_missing_field(self, service, mock_session):
        with pytest.raises(KeyError):
            service.record_run({"kind": "ff_count"})
        mock_session.rollback.assert_called_once()

    def test_record_acceptance(self, service, mock_session):
        results = [
            CriterionResult(number=1, name="uno", measured="0", threshold="≤ 1e-9", passed=True),
            CriterionResult(number=2, name="dos", measured="4", threshold="≤ 3", passed=False),
        ]

        records = service.record_acceptance("suite-1", results)

        assert all(isinstance(r, CriterionRecord) for r in records)
        assert [r.passed for r in records] == [True, False]
        assert {r.suite_id for r in records} == {"suite-1"}
        mock_session.add_all.assert_called_once_with(records)


class TestRunRegistryDatabase:
    """Tests contra SQLite temporal."""

    def test_round_trip(self, test_db):
        service = RunRegistryService()
        service.record_run(MANIFEST)
        service.record_run({**MANIFEST, "kind": "increment", "scenario_hash": "b" * 64})

        assert len(service.list_runs()) == 2
        assert [r.kind for r in service.list_runs(kind="increment")] == ["increment"]
        assert len(service.find_by_hash("a" * 64)) == 1
        assert service.list_runs(limit=1)[0].kind in {"ff_count", "increment"}
