"""Physical constants (SI, exact 2019 definitions)."""

from dataclasses import dataclass
import math

import scipy.constants as sc


@dataclass(frozen=True)
class PhysicalConstants:
    h: float = sc.h
    e: float = sc.e
    k_B: float = sc.k

    @property
    def hbar(self) -> float:
        return self.h / (2 * math.pi)

    @property
    def Phi0(self) -> float:
        """Superconducting flux quantum h/2e in Wb."""
        return self.h / (2 * self.e)


CONST = PhysicalConstants()

GHZ = 1e9
MHZ = 1e6
