"""
Floquet eigenstates in phase space
==================================

Diagonalize the J = 150 Floquet operator in the M_F = 0 block, then place
every eigenstate in the plane of Husimi entropy versus <J_z>/J. Chaotic
states spread over the sea and cluster at high entropy; regular states
line up in ladders along the islands and near the stable pole.
"""
import numpy as np

from kickedtops.filtering import classify_eigenstates, eigenstate_features, label_counts
from kickedtops.floquet import floquet_system, spacing_diagnostic
from kickedtops.export import write_pgm
from kickedtops.states import PhaseSpaceGrid, husimi

system = floquet_system(150, 1.5, np.pi / 2)
print("dimension", system.dimension, "unitarity residual", system.unitarity_residual())

features = classify_eigenstates(eigenstate_features(system))
print("labels:", label_counts(features))

# a crude text scatter: rows are <J_z>/J bands, columns are entropy bands
s = np.array([f.s_q for f in features])
jz = np.array([f.jz_normalized for f in features])
counts, s_edges, j_edges = np.histogram2d(jz, s, bins=(10, 12))
for row, lo in zip(counts[::-1], j_edges[-2::-1]):
    print(f"{lo:+.2f} |" + "".join("   ." if c == 0 else f"{int(c):4d}" for c in row))
print("s_q:   " + " ".join(f"{x:.2f}" for x in s_edges[::2]))

# Husimi images of the most and the least delocalized eigenstates
grid = PhaseSpaceGrid.cells(100, 100)
for name, k in (("most_spread", int(np.argmax(s))), ("most_localized", int(np.argmin(s)))):
    Q = husimi(system.eigenvectors[:, k], grid)
    write_pgm(f"husimi_{name}.pgm", Q.reshape(grid.shape)[::-1])
    print(f"{name}: k = {k}, s_q = {s[k]:.3f}, jz/J = {jz[k]:+.3f}")

# level statistics: mixed dynamics sits between Poisson and the COE surmise
for alpha in (1.5, 6.0):
    ks = spacing_diagnostic(floquet_system(150, alpha, np.pi / 2))["ks"]
    print(f"alpha = {alpha}: KS distance to the Wigner surmise {ks:.3f}")
