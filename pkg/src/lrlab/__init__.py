"""Mod-2 level raising and 2-Selmer rank toolkit."""
from .curves import WeierstrassCurve
from .errors import LrlabError

__version__ = "0.1.0"
__all__ = ["WeierstrassCurve", "LrlabError", "__version__"]
