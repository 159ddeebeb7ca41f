"""Conexión al registro de corridas (SQLite por defecto)."""

from __future__ import annotations

from contextlib import contextmanager
from pathlib import Path
from typing import Generator

from sqlalchemy import create_engine, event, inspect
from sqlalchemy.engine import Engine, make_url
from sqlalchemy.orm import Session, sessionmaker
from sqlalchemy.pool import StaticPool

from src.config.settings import get_settings
from src.database.models import Base
from src.utils.logging import get_logger

logger = get_logger(__name__)

_engine: Engine | None = None
_session_factory: sessionmaker[Session] | None = None


def _sqlite_file(url: str) -> Path | None:
    database = make_url(url).database
    if not database or database == ":memory:":
        return None
    return Path(database)


def get_engine() -> Engine:
    """Engine del registro (singleton); crea el directorio del archivo SQLite si hace falta."""
    global _engine
    if _engine is None:
        settings = get_settings()
        url = settings.database_url

        if url.startswith("sqlite"):
            path = _sqlite_file(url)
            if path is not None:
                path.parent.mkdir(parents=True, exist_ok=True)
            _engine = create_engine(
                url,
                poolclass=StaticPool,
                connect_args={"check_same_thread": False, "timeout": 20},
                echo=settings.debug,
            )

            # Varias corridas pueden leer mientras otra escribe
            @event.listens_for(_engine, "connect")
            def set_sqlite_pragma(dbapi_connection, connection_record):
                cursor = dbapi_connection.cursor()
                cursor.execute("PRAGMA journal_mode=WAL")
                cursor.close()
        else:
            _engine = create_engine(url, pool_size=settings.db_pool_size, echo=settings.debug)

        logger.debug(f"Engine del registro creado: {url}")

    return _engine


def get_session_factory() -> sessionmaker[Session]:
    global _session_factory
    if _session_factory is None:
        _session_factory = sessionmaker(bind=get_engine(), autoflush=False, expire_on_commit=False)
    return _session_factory


def create_db_session() -> Session:
    """Nueva sesión; el llamador debe cerrarla."""
    return get_session_factory()()


@contextmanager
def get_db_session() -> Generator[Session, None, None]:
    """
    Sesión con commit al salir y rollback si hay error.

    Example:
        with get_db_session() as session:
            runs = session.query(RunRecord).all()
    """
    session = create_db_session()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()


def init_database() -> None:
    """Crear las tablas del registro si no existen."""
    try:
        Base.metadata.create_all(bind=get_engine())
        logger.debug("Registro de corridas inicializado")
    except Exception as e:
        logger.error(f"Error al inicializar el registro de corridas: {e}")
        raise


def registry_tables() -> list[str]:
    """Tablas presentes en el registro (para el comando status)."""
    return sorted(inspect(get_engine()).get_table_names())


def reset_database() -> None:
    """Borrar y recrear el registro completo."""
    try:
        engine = get_engine()
        Base.metadata.drop_all(bind=engine)
        Base.metadata.create_all(bind=engine)
        logger.warning("Registro de corridas reseteado")
    except Exception as e:
        logger.error(f"Error al resetear el registro de corridas: {e}")
        raise


def close_connections() -> None:
    global _engine, _session_factory

    if _engine is not None:
        _engine.dispose()
        _engine = None
    _session_factory = None
