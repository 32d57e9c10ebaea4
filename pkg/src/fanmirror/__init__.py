"""Exact mirror-symmetry computations for smooth toric Deligne-Mumford stacks.

The layers build on each other: ``exactalg`` (scalars, matrices, truncated
series), ``lattice`` and ``stackyfan`` (fans and their combinatorics),
``curves`` (refined fan sequence and Mori data), ``chenruan`` (fixed-point
model of the cohomology), ``fandmod`` (the fan D-module), ``iseries`` (the
localized I-function) and ``mirrorflow`` (Birkhoff factorization, mirror map,
quantum connection and pairing).
"""

from .errors import FanMirrorError, InvariantError, ProfileError, SupportError, ValidationError
from .iseries import MirrorSetup, Profile
from .lattice import FgAbGroup
from .mirrorflow import MirrorFlow
from .stackyfan import StackyFan, checked, validate

__all__ = [
    "FanMirrorError",
    "FgAbGroup",
    "InvariantError",
    "MirrorFlow",
    "MirrorSetup",
    "Profile",
    "ProfileError",
    "StackyFan",
    "SupportError",
    "ValidationError",
    "checked",
    "validate",
]
