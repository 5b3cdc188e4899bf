"""Lattice Boltzmann tools for free flow over porous media at pore and REV scale."""
import os

import numba

if "NUMBA_THREADING_LAYER" not in os.environ:
    # the bundled TBB is too old; skip probing it
    numba.config.THREADING_LAYER = "omp"

__version__ = "0.1.0"
