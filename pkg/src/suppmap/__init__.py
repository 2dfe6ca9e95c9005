"""Support calculus for automorphism groups of finite Boolean algebras.

The package verifies, at desk scale, a reconstruction calculus built on
supports of automorphisms: exhaustively over finite powerset algebras, and
symbolically over eventually periodic subsets of the naturals.
"""

__version__ = "0.1.0"

from .balg import FinElem, NSet
from .autom import FinAut, GroupTable

__all__ = ["FinElem", "NSet", "FinAut", "GroupTable", "__version__"]
