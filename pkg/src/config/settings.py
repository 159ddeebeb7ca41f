"""Configuración de la aplicación Config Count."""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Configuración principal de Config Count."""

    # Información de la aplicación
    app_name: str = Field(default="Config Count", description="Nombre de la aplicación")
    app_version: str = Field(default="1.0.0", description="Versión de la aplicación")
    debug: bool = Field(default=False, description="Modo debug")

    # Registro de ejecuciones
    database_url: str = Field(
        default="sqlite:///config_count_runs.db",
        description="URL de la base de datos del registro de ejecuciones"
    )
    db_pool_size: int = Field(default=5, description="Tamaño del pool de conexiones")
    record_runs: bool = Field(
        default=True,
        description="Guardar manifiestos de ejecución en la base de datos"
    )

    # Logging
    log_level: str = Field(default="INFO", description="Nivel de logging")
    log_file: Optional[Path] = Field(
        default=Path("logs/config-count.log"),
        description="Archivo de logs"
    )

    # Rutas de datos
    output_dir: Path = Field(default=Path("results"), description="Directorio de artefactos")

    # Paralelismo (CONFIG_COUNT_THREADS)
    threads: int = Field(default=1, ge=1, description="Máximo de hilos para reducciones por bloques")

    # Límites de escala de escritorio
    ff_max_q: int = Field(default=17, description="q máximo para sumas directas en F_q")
    lattice_max_lambda2: int = Field(default=2500, description="λ² máximo para enumeración")
    lattice_max_volume: int = Field(
        default=4_000_000,
        description="Volumen máximo (puntos) de una ventana del retículo"
    )
    q_epsilon_cap: int = Field(
        default=10_000,
        description="Cota superior del rango de q_ε"
    )
    surrogate_modulus: int = Field(
        default=60,
        description="Módulo sustituto de q_ε en experimentos (lcm{1..6})"
    )
    kvn_level_constant: float = Field(
        default=1.0,
        description="Constante C de la cota de niveles ⌈C·ε⁻²⌉"
    )

    # Reproducibilidad
    rng_algorithm: str = Field(default="PCG64", description="Generador aleatorio congelado")

    model_config = {
        "env_prefix": "CONFIG_COUNT_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": False,
    }

    def ensure_directories(self) -> None:
        """Crear directorios necesarios."""
        self.output_dir.mkdir(parents=True, exist_ok=True)

        # Crear directorio de logs si se especifica un archivo
        if self.log_file:
            self.log_file.parent.mkdir(parents=True, exist_ok=True)


# Instancia global de configuración
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Obtener instancia singleton de configuración."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reload_settings() -> Settings:
    """Recargar configuración (útil para tests)."""
    global _settings
    _settings = None
    return get_settings()
