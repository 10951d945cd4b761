"""TCL2 against exact reduced dynamics at weak transverse coupling.

The honest benchmark for the second-order master equation is a bath we can
diagonalize: a few bosonic modes truncated at n_max levels. At T = 0 and weak
coupling a small n_max already captures the reduced dynamics to ~1e-13, so the
residual trace distance is the genuine TCL2 truncation error. For transverse
coupling (v = sigma_x, which does not commute with H_s) that error shrinks
like g^4 -- halving g should divide it by ~16.
"""

import numpy as np

from tclkraus import (
    DiscreteBath,
    SIGMA_X,
    SIGMA_Z,
    SystemHamiltonian,
    Tcl2Generator,
    TotalSystem,
    TruncatedBath,
    evolve_exact,
    integrate,
    trace_distance,
)

EPS0 = 0.5
h_s = SystemHamiltonian(0.5 * EPS0 * SIGMA_Z)
plus = 0.5 * np.ones((2, 2), dtype=complex)
times = np.linspace(0.0, 10.0, 21)
N_MAX = 7


def max_gap(g, n_max=N_MAX):
    bath = DiscreteBath([(g, 1.0), (g, 1.7)], 0.0)
    tcl = integrate(Tcl2Generator(h_s, [SIGMA_X], bath), plus, times)
    total = TotalSystem(h_s, [SIGMA_X], TruncatedBath.from_discrete(bath, n_max))
    exact = evolve_exact(total, plus, times)
    return max(trace_distance(a, b) for a, b in zip(tcl.states, exact.states))


print("two modes (omega = 1.0, 1.7), T = 0, v = sigma_x, t in [0, 10]")
print(f"ladder truncation n_max = {N_MAX} "
      f"(total dimension 2*(n_max+1)^2 = {2 * (N_MAX + 1) ** 2})")
print()
print(f"{'g':>7} {'max trace distance':>20}")
gaps = {}
for g in (0.1, 0.05, 0.025):
    gaps[g] = max_gap(g)
    print(f"{g:7.3f} {gaps[g]:20.3e}")

print()
print(f"ratio g=0.10 / g=0.05:  {gaps[0.1] / gaps[0.05]:5.1f}  (g^4 predicts 16)")
print(f"ratio g=0.05 / g=0.025: {gaps[0.05] / gaps[0.025]:5.1f}")

print()
print("is the reference converged? shift under n_max 7 -> 9:")
bath = DiscreteBath([(0.05, 1.0), (0.05, 1.7)], 0.0)
ex = [evolve_exact(TotalSystem(h_s, [SIGMA_X], TruncatedBath.from_discrete(bath, n)),
                   plus, times) for n in (7, 9)]
shift = max(trace_distance(a, b) for a, b in zip(ex[0].states, ex[1].states))
print(f"  max trace distance between the two references: {shift:.1e}")
