"""Full counting statistics of work for the driven spin-boson model in the polaron frame.

Units: hbar = k_B = 1; energies are measured in units of the bare tunnelling
Delta and times in units of 1/Delta.
"""

__version__ = "0.1.0"
