"""Registro de corridas de Config Count."""

from src.database.connection import (
    close_connections,
    create_db_session,
    get_db_session,
    get_engine,
    init_database,
    registry_tables,
    reset_database,
)
from src.database.models import Base, CriterionRecord, RunRecord, RunStatus

__all__ = [
    # Conexión
    "close_connections",
    "create_db_session",
    "get_db_session",
    "get_engine",
    "init_database",
    "registry_tables",
    "reset_database",
    # Modelos
    "Base",
    "CriterionRecord",
    "RunRecord",
    "RunStatus",
]
