"""Script para inicializar el registro de corridas."""

from __future__ import annotations

from sqlalchemy import text

from src.config.settings import get_settings
from src.database.connection import get_db_session, init_database, registry_tables
from src.utils.logging import get_logger, setup_logging

logger = get_logger(__name__)


def init_registry() -> None:
    """Crear las tablas del registro y verificar la conexión."""
    settings = get_settings()
    setup_logging(settings.log_level, settings.log_file)

    try:
        init_database()
        with get_db_session() as session:
            session.execute(text("SELECT 1"))

        logger.info(f"Registro listo en {settings.database_url}")
        print(f"✅ Registro inicializado: {', '.join(registry_tables())}")

    except Exception as e:
        logger.error(f"Error al inicializar el registro: {e}")
        print(f"❌ Error al inicializar el registro: {e}")
        raise


if __name__ == "__main__":
    init_registry()
