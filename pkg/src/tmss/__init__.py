"""Superpositions of two-mode squeezed states in a truncated Fock space.

Submodules: ``fock`` (kernel), ``states`` (state factory), ``stats``
(photon statistics, Wigner functions, entanglement), ``metrology`` (quantum
Fisher information), ``ion`` (trapped-ion generation), ``probe`` (Wigner
readout protocol) and ``cli`` (experiment runner).
"""

__version__ = "0.1.0"
