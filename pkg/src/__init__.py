"""
Config Count - Conteo de configuraciones y regularidad débil de hipergrafos.

Biblioteca y CLI de experimentos para verificar numéricamente el núcleo
computacional del conteo de configuraciones geométricas: formas de conteo
en F_q con medidas de esferas, normas caja de Gowers, el algoritmo de
incremento de energía y el conteo de símplices en la red entera.
"""

__version__ = "1.0.0"
__author__ = "Config Count Team"

from src.config.settings import Settings, get_settings

__all__ = [
    "Settings",
    "get_settings",
    "__version__",
]
