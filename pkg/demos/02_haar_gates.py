"""
Haar-random gates
=================

Proposals draw single- and two-qubit gates uniformly from U(2) and U(4).
Here we look at two fingerprints of the Haar measure: the squared modulus
of a matrix element has mean 1/dim, and the eigenphases are uniform.
"""
import numpy as np

from gatemc import haar_unitary

rng = np.random.default_rng(5)

for dim in (2, 4):
    us = np.array([haar_unitary(dim, rng) for _ in range(20_000)])
    u00 = np.abs(us[:, 0, 0]) ** 2
    phases = np.angle(np.linalg.eigvals(us)).ravel()
    hist, _ = np.histogram(phases, bins=8, range=(-np.pi, np.pi))
    print(f"U({dim}): E|U_00|^2 = {u00.mean():.4f} (expect {1 / dim:.4f})")
    print(f"       eigenphase histogram / mean: {np.round(hist / hist.mean(), 3)}")

# a naive QR without fixing the phases of R is *not* Haar: the phases pile up
g = rng.standard_normal((20_000, 2, 2)) + 1j * rng.standard_normal((20_000, 2, 2))
q, _ = np.linalg.qr(g)
hist, _ = np.histogram(np.angle(np.linalg.eigvals(q)).ravel(), bins=8, range=(-np.pi, np.pi))
print(f"\nplain QR eigenphase histogram / mean: {np.round(hist / hist.mean(), 3)}")
