"""Configuración común para tests de Config Count."""

import pytest
from unittest.mock import patch

from src.config.settings import reload_settings
from src.database.connection import close_connections, init_database, reset_database


@pytest.fixture(autouse=True)
def test_settings(tmp_path):
    """Configuración aislada: registro desactivado y artefactos en un directorio temporal."""
    with patch.dict("os.environ", {
        "CONFIG_COUNT_DATABASE_URL": f"sqlite:///{tmp_path / 'test_runs.db'}",
        "CONFIG_COUNT_OUTPUT_DIR": str(tmp_path / "results"),
        "CONFIG_COUNT_LOG_FILE": str(tmp_path / "logs" / "test.log"),
        "CONFIG_COUNT_RECORD_RUNS": "false",
        "CONFIG_COUNT_THREADS": "1",
    }):
        settings = reload_settings()
        yield settings
        close_connections()
    reload_settings()


@pytest.fixture
def test_db(test_settings):
    """Registro de corridas inicializado sobre SQLite temporal."""
    init_database()
    yield
    reset_database()
    close_connections()


@pytest.fixture
def ff_count_document(tmp_path):
    """Escenario ff_count mínimo."""
    return {
        "kind": "ff_count",
        "q": 5,
        "d": 2,
        "density": 0.5,
        "seed": 1,
        "output": str(tmp_path / "ff_count_q5.csv"),
    }
