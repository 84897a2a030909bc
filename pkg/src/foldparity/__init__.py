"""foldparity: fold-curve continuation and cusp-parity verdicts.

Given a 2-parameter ODE family over a rectangular parameter box with a
bistable (S/Z shaped) branch over one designated edge and an otherwise
event-free boundary, the toolkit traces all interior fold curves, classifies
their codimension-2 points (standard/dual cusps, Bogdanov-Takens, fold-Hopf)
and verifies the parity property: absent a fold-Hopf point, the number of
cusps on the boundary of the saddle component is odd.
"""

__version__ = "0.1.0"

from .errors import FoldParityError
from .families import (
    BUILTIN_NAMES,
    FamilySpec,
    ParamBox,
    builtin,
    gradient_family_from_potential,
)
from .famfile import parse_family_file, parse_family_text
from .settings import Settings, load_settings

__all__ = [
    "BUILTIN_NAMES",
    "FamilySpec",
    "FoldParityError",
    "ParamBox",
    "Settings",
    "builtin",
    "gradient_family_from_potential",
    "load_settings",
    "parse_family_file",
    "parse_family_text",
    "__version__",
]
