"""Chain geometry and physical parameters.

Conventions used throughout the package: the single-atom decay rate
``gamma`` sets the rate unit (default 1), distances are measured in units
of the transition wavelength, and the reduced distance between two lattice
sites is ``kappa = 2*pi*spacing*|j - j'|``.
"""

import math
import warnings
from dataclasses import dataclass

from .errors import DomainError

TWO_PI = 2.0 * math.pi

#: Lamb-Dicke values above this trigger a warning: the second-order
#: expansion of the spin-phonon coupling is no longer controlled.
LAMB_DICKE_WARN = 0.5


@dataclass(frozen=True)
class GeometryConfig:
    """Physical parameters of a one-dimensional emitter chain.

    Attributes
    ----------
    n_atoms : int
        Number of two-level emitters, N >= 1.
    spacing : float
        Lattice constant in units of the transition wavelength, > 0.
    phi : float
        Angle between the transition dipole moment and the chain axis,
        in radians, within [0, pi].
    eta0 : float
        Lamb-Dicke parameter, >= 0.  Values above 0.5 warn.
    n_phonons : int
        Total phonon number of the hybrid sector, >= 0.
    gamma : float
        Single-atom decay rate; the unit of every reported rate.
    """

    n_atoms: int
    spacing: float
    phi: float = math.pi / 2
    eta0: float = 0.0
    n_phonons: int = 0
    gamma: float = 1.0

    def __post_init__(self):
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise DomainError(f"n_atoms must be a positive integer, got {self.n_atoms}")
        if not self.spacing > 0:
            raise DomainError(f"spacing must be > 0, got {self.spacing}")
        if not 0.0 <= self.phi <= math.pi:
            raise DomainError(f"phi must lie in [0, pi], got {self.phi}")
        if self.eta0 < 0:
            raise DomainError(f"eta0 must be >= 0, got {self.eta0}")
        if int(self.n_phonons) != self.n_phonons or self.n_phonons < 0:
            raise DomainError(f"n_phonons must be a non-negative integer, got {self.n_phonons}")
        if not self.gamma > 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma}")
        if self.eta0 > LAMB_DICKE_WARN:
            warnings.warn(
                f"eta0={self.eta0} exceeds {LAMB_DICKE_WARN}; results of the "
                "second-order Lamb-Dicke expansion are unreliable",
                stacklevel=2,
            )

    def reduced_distance(self, j: int, jp: int) -> float:
        """kappa between sites ``j`` and ``jp`` (2*pi*spacing*|j-jp|)."""
        return TWO_PI * self.spacing * abs(j - jp)
