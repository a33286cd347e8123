"""Numerical verification of para-quaternionic Kaehler geometry.

Layers, bottom up: split-quaternion and epsilon-complex arithmetic
(:mod:`.algebra`), adapted bases and the shape-tensor algebra
(:mod:`.linear`), algebraic curvature tensors (:mod:`.curvature`),
finite-difference calculus on charts (:mod:`.calculus`), model charts and
immersions (:mod:`.models`), submanifold invariants (:mod:`.submanifold`)
and the scenario runner (:mod:`.cli`).
"""

__version__ = "0.1.0"

from .algebra import *  # noqa: F401,F403
from .calculus import *  # noqa: F401,F403
from .curvature import *  # noqa: F401,F403
from .exceptions import (  # noqa: F401
    ChartValidationError,
    DegenerateSubspaceError,
    ImmersionError,
    ParakahlerError,
    ScenarioError,
)
from .linear import *  # noqa: F401,F403
from .models import *  # noqa: F401,F403
from .submanifold import *  # noqa: F401,F403
