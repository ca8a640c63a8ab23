"""
What a random state predicts
============================

Inside a fixed-F_z block the uncoupled basis is a Schmidt basis for every
state, so the typical entanglement is the mean Shannon entropy of a random
vector. Time-reversal symmetry of the eigenstates picks the orthogonal
ensemble, while evolved states look unitary-random. The chaotic subspace
of the mixed map gives a third, smaller reference value.
"""
import numpy as np

from kickedtops.ensembles import (EnsembleSpec, mc_average, typical_entanglement_full,
                                  typical_entanglement_oe, typical_entanglement_ue)
from kickedtops.entanglement import eigenstate_entanglement
from kickedtops.filtering import chaotic_subspace, classify_eigenstates, eigenstate_features
from kickedtops.floquet import floquet_system

d = 301
print("OE prediction (eigenstates)   ", round(typical_entanglement_oe(d), 4))
print("UE prediction (evolved states)", round(typical_entanglement_ue(d), 4))
print("Page value for a full 301 x 301 space", round(typical_entanglement_full(d, d), 4), "(ln d =", round(np.log(d), 4), ")")

chaos = floquet_system(150, 6.0, np.pi / 2)
print("alpha = 6 mean eigenstate entanglement", round(float(eigenstate_entanglement(chaos).mean()), 4))

for kind in ("UE", "OE"):
    rep = mc_average(EnsembleSpec(kind, d, seed=1), "entropy", 20_000)
    print(f"{kind} Monte Carlo {rep.mc_mean:.4f} +- {rep.mc_stderr:.4f} (analytic {rep.analytic:.4f})")

mixed = floquet_system(150, 1.5, np.pi / 2)
basis = chaotic_subspace(mixed, classify_eigenstates(eigenstate_features(mixed)))
rep = mc_average(EnsembleSpec.from_subspace("UE", basis, seed=0, label="chaotic"), "entropy", 2000)
print(f"chaotic subspace of dimension {basis.shape[1]}: UE average {rep.mc_mean:.3f} +- {rep.mc_stderr:.3f}")
