"""fluxqc: a numerical laboratory for flux-controlled Majorana quantum computation.

Modules
-------
algebra   Majorana operator representations, parity sectors, ground subspaces
device    flux-to-coupling maps, effective Hamiltonians, transmon spectra
braid     flux schedules, adiabatic evolution, holonomies, schedule compiler
readout   Jaynes-Cummings spectra, dispersive shifts, photon counting
logic     topological qubit registers and measurement-based circuits
qec       Steane-code failure models and error thresholds
cli       command-line experiments emitting CSV/SVG artifacts
"""

__version__ = "0.1.0"
