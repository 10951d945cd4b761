"""Single-qubit dephasing, end to end, against its closed form.

A qubit with H_s = (eps0/2) sigma_z couples through sigma_z to one bosonic
mode at T = 0. Populations freeze; the coherence picks up the envelope
exp(-4 Re f(t)) where f is the double-time integral of the bath correlation.
The same f also fixes the closed-form operator pair
    K0 = (1 - f) I,   K1 = sqrt(2 Re f - |f|^2) sigma_z,
which is exactly trace preserving for any valid f. This script walks the
pieces and prints where each approximation sits.
"""

import numpy as np

from tclkraus import (
    DephasingModel,
    DiscreteBath,
    SIGMA_Z,
    SystemHamiltonian,
    Tcl2Generator,
    integrate,
    kraus_pair,
    pair_weight,
)

EPS0 = 1.0
G, OMEGA = 0.05, 1.0

bath = DiscreteBath([(G, OMEGA)], 0.0)
model = DephasingModel(EPS0, bath)
plus = 0.5 * np.ones((2, 2), dtype=complex)

print("=== memory integral and channel weight ===")
print(f"mode: g = {G}, omega = {OMEGA}, T = 0")
print(f"{'t':>5} {'Re f':>12} {'Im f':>12} {'weight p':>12}")
for t in (0.5, 1.0, 2.0, 3.5, 5.0):
    f = model.memory_integral(t)
    print(f"{t:5.1f} {f.real:12.4e} {f.imag:12.4e} {pair_weight(f):12.4e}")

print()
print("=== pair completeness (an exact identity) ===")
f = model.memory_integral(2.0)
k0, k1 = kraus_pair(f).operators
dev = np.abs(k0.conj().T @ k0 + k1.conj().T @ k1 - np.eye(2)).max()
print(f"||K0^+K0 + K1^+K1 - I||_max at t = 2.0: {dev:.2e}")

print()
print("=== TCL2 trajectory vs closed-form envelope ===")
times = np.linspace(0.0, 5.0, 11)
traj = integrate(Tcl2Generator(model.h_s, [SIGMA_Z], bath), plus, times)
print(f"{'t':>5} {'|rho01| tcl2':>14} {'exp(-4 Re f)/2':>16} {'diff':>10}")
for t, rho in zip(times, traj.states):
    env = 0.5 * np.exp(-4.0 * model.memory_integral(float(t)).real)
    print(f"{t:5.1f} {abs(rho[0, 1]):14.8f} {env:16.8f} "
          f"{abs(abs(rho[0, 1]) - env):10.1e}")

print()
print("=== where the closed form stops being a channel ===")
# the pair needs 0 <= p <= 1; at strong coupling p dips negative near the
# mode's recurrence times omega t = 2 pi k, where Re f collapses but the
# second-order |f|^2 term does not
strong = DephasingModel(EPS0, DiscreteBath([(2.0, OMEGA)], 0.0))
crossing = strong.first_invalid_time(8.0)
print(f"g = 2.0: first invalid time on [0, 8] ~ {crossing:.3f}")
weak_crossing = model.first_invalid_time(8.0)
print(f"g = {G}: first invalid time on [0, 8] ~ {weak_crossing:.3f} "
      f"(near the recurrence 2 pi = {2 * np.pi:.3f})")
