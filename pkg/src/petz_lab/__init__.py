"""Petz recovery maps for qubit noise channels and non-Markovian dephasing."""

from petz_lab.channels import (
    KrausMap,
    QuantumChannel,
    amplitude_damping,
    apply,
    choi,
    compose,
    dephasing,
    depolarizing,
    dual,
    fully_depolarizing,
    identity_channel,
    superoperator,
)
from petz_lab.petz import RecoveryStrategy, ReferenceState, petz_map, recover
from petz_lab.sampling import FidelityEstimate, SampleConfig, mean_fidelity, sweep_reference

__version__ = "0.1.0"
