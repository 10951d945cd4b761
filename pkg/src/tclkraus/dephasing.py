"""Closed-form single-qubit dephasing channel.

System H_s = (eps0/2) sigma_z coupled through sigma_z to a scalar bath.
With the iterated correlation integral m(t) (:func:`~tclkraus.baths.double_time_integral`)
the closed-form operator pair in the interaction picture is

    K0 = (1 - m) I,      K1 = sqrt(2 Re m - |m|^2) sigma_z,

whose completeness |1-m|^2 + 2 Re m - |m|^2 = 1 is an exact algebraic
identity.  The channel action multiplies off-diagonals by 1 - 2 p with
p = 2 Re m - |m|^2 and leaves populations untouched.  This is the golden
analytic reference the rest of the package is validated against.
"""

from __future__ import annotations

import numpy as np

from .baths import double_time_integral
from .channel import KrausSet, apply_channel
from .linalg import (
    SIGMA_Z,
    SystemHamiltonian,
    ValidationError,
    check_density_matrix,
)
from .tcl import Trajectory

#: roundoff guard for p slightly below 0 at tiny times (not a physics clip)
_P_ROUNDOFF = 1e-12


class BornValidityError(ValueError):
    """The dephasing weight left [0, 1]: outside Born validity."""


def pair_weight(memory_value, t=None):
    """p = 2 Re m - |m|^2 for a memory value m; raises outside [0, 1]."""
    m = complex(memory_value)
    p = 2.0 * m.real - abs(m) ** 2
    where = "" if t is None else f" at t = {t:g}"
    if p > 1.0:
        raise BornValidityError(
            f"dephasing weight p = {p:.6g} > 1{where}: outside Born validity"
        )
    if p < 0.0:
        if p < -_P_ROUNDOFF:
            raise BornValidityError(
                f"dephasing weight p = {p:.6g} < 0{where}: outside Born validity"
            )
        p = 0.0
    return float(p)


def kraus_pair(memory_value, t=0.0):
    """Closed-form interaction-picture pair for a given memory value.

    K0 = (1 - m) I and K1 = sqrt(2 Re m - |m|^2) sigma_z; their completeness
    sum is the identity exactly, for any complex m inside validity.
    """
    m = complex(memory_value)
    p = pair_weight(m)
    k0 = (1.0 - m) * np.eye(2, dtype=complex)
    k1 = np.sqrt(p) * SIGMA_Z
    kset = KrausSet(operators=[k0, k1], eigenvalues=[],
                    picture="interaction", t=float(t))
    kset.completeness_dev = kset.completeness()
    return kset


class DephasingModel:
    """Level splitting eps0 plus a scalar bath correlation model."""

    def __init__(self, epsilon0, bath):
        self.epsilon0 = float(epsilon0)
        self.bath = bath
        self.h_s = SystemHamiltonian(0.5 * self.epsilon0 * SIGMA_Z)

    def memory_integral(self, t):
        """The iterated bath-correlation integral at time t."""
        return complex(double_time_integral(self.bath, t))

    def dephasing_probability(self, t):
        """p(t) = 2 Re m - |m|^2; raises outside [0, 1]."""
        return pair_weight(self.memory_integral(t), t)

    def coherence_factor(self, t):
        """1 - 2 p(t), the off-diagonal multiplier (interaction picture)."""
        return 1.0 - 2.0 * self.dephasing_probability(t)

    def first_invalid_time(self, t_max, n=512):
        """First grid time in (0, t_max] where the weight leaves [0, 1].

        Algebraically p = 1 - |1 - m|^2 can never exceed 1, so invalidity
        always shows up as p dropping below zero (|1 - m| > 1); the upper
        guard stays for symmetry.  Returns None when the whole grid is valid.
        """
        for t in np.linspace(0.0, float(t_max), int(n))[1:]:
            m = self.memory_integral(t)
            p = 2.0 * m.real - abs(m) ** 2
            if p > 1.0 or p < -_P_ROUNDOFF:
                return float(t)
        return None

    def kraus(self, t):
        return kraus_pair(self.memory_integral(t), t)

    def apply(self, t, rho0):
        rho0 = check_density_matrix(np.asarray(rho0, dtype=complex), "rho0")
        c = self.coherence_factor(t)
        out = rho0.copy()
        out[0, 1] *= c
        out[1, 0] *= c
        return out

    def trajectory(self, times, rho0, picture="schrodinger"):
        """Channel action sampled on a grid.

        In the Schrodinger picture the interaction-picture output is
        conjugated by the free propagator, which multiplies the coherence
        by exp(-i eps0 t).
        """
        times = np.asarray(times, dtype=float)
        states = []
        for t in times:
            s = self.apply(t, rho0)
            if picture == "schrodinger":
                u = self.h_s.propagator(t)
                s = u @ s @ u.conj().T
            elif picture != "interaction":
                raise ValidationError(f"unknown picture {picture!r}")
            states.append(s)
        return Trajectory(times, np.array(states))

    def table(self, times):
        """Rows of (t, Re m, Im m, p, 1 - 2p)."""
        rows = []
        for t in np.asarray(times, dtype=float):
            m = self.memory_integral(t)
            p = self.dephasing_probability(t)
            rows.append([t, m.real, m.imag, p, 1.0 - 2.0 * p])
        return np.array(rows)

    def table_to_csv(self, path, times):
        rows = self.table(times)
        lines = ["t,re_f,im_f,p,coherence"]
        for row in rows:
            lines.append(",".join(f"{x:.17e}" for x in row))
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def dephasing_kraus(model, t):
    """Closed-form interaction-picture operator pair at time t."""
    return model.kraus(t)


def dephasing_apply(model, t, rho0):
    """Closed-form channel action (interaction picture)."""
    return model.apply(t, rho0)


def dephasing_channel_state(model, t, rho0):
    """Apply the closed-form pair via the generic operator-sum machinery."""
    return apply_channel(model.kraus(t), rho0)
