"""Physical constants and unit conversions.

Energies are carried in cm^-1 throughout the package, transition dipoles
in Debye, electric field amplitudes in V/m and distances in Angstrom.
With hbar = 1 the conjugate time unit is (cm^-1)^-1.
"""

import math

# SI defining constants (2019 redefinition; exact).
PLANCK_J_S = 6.62607015e-34
SPEED_OF_LIGHT_CM_S = 2.99792458e10
ELEMENTARY_CHARGE_C = 1.602176634e-19

HBAR_J_S = PLANCK_J_S / (2.0 * math.pi)

# Energy of a 1 cm^-1 quantum: h * c * (1 cm^-1), in joule.
CM1_TO_JOULE = PLANCK_J_S * SPEED_OF_LIGHT_CM_S

# 1 Debye in C*m (defined as 1e-21/c in SI).
DEBYE_C_M = 1e-21 / 2.99792458e8

# Interaction energy mu.E of a 1 Debye dipole in a 1 V/m field, in cm^-1.
# Numerically 1.67920e-7 cm^-1 per Debye*(V/m).
DEBYE_VM_TO_CM1 = DEBYE_C_M / CM1_TO_JOULE

# One (cm^-1)^-1 time unit in picoseconds: 1/(2*pi*c), about 5.3088 ps.
INV_CM_TIME_TO_PS = 1e12 / (2.0 * math.pi * SPEED_OF_LIGHT_CM_S)
