"""Brute-force exact evolution of system (x) truncated bosonic bath.

Ground truth for everything else: build the full Hamiltonian

    H = H_s (x) I + I (x) sum_k w_k a_k^dag a_k + sum_g v_g (x) b_g,
    b_g = sum_k ( g_{gk} a_k^dag + conj(g_{gk}) a_k ),

diagonalize it once (dense), conjugate the initial product state through
the exact propagator at each snapshot, and partial-trace the bath.  No
integrator error enters the physics comparisons.

Also evaluates the bath two-point function Tr_b[ b(t) b rho_b ] directly
in the truncated Fock space, which cross-validates the closed-form
discrete-mode correlation.
"""

from __future__ import annotations

import numpy as np

from .linalg import (
    SystemHamiltonian,
    ValidationError,
    check_density_matrix,
    check_generator_set,
    check_hermitian,
    partial_trace_bath,
)
from .tcl import Trajectory

#: desk-scale guard on the total Hilbert-space dimension
MAX_TOTAL_DIM = 4096

#: per-mode relative thermal weight that may be lost to truncation
MAX_DISCARDED_WEIGHT = 1e-8


class TruncationError(ValueError):
    """Fock truncation is insufficient for the requested accuracy."""


def _lowering(n_levels):
    return np.diag(np.sqrt(np.arange(1, n_levels, dtype=float)), k=1)


def _kron_chain(ops):
    out = np.array([[1.0 + 0.0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


class TruncatedBath:
    """Finitely many bosonic modes, each truncated at n_max Fock levels.

    Parameters
    ----------
    modes : sequence of (omega, couplings)
        couplings is one complex g per generator (a bare complex also
        works for the single-generator case).
    n_max : highest retained Fock level per mode
    temperature : float, >= 0
    """

    def __init__(self, modes, n_max, temperature=0.0):
        if len(modes) == 0:
            raise ValidationError("truncated bath needs at least one mode")
        if n_max < 1:
            raise ValidationError(f"n_max must be >= 1, got {n_max}")
        if temperature < 0:
            raise ValidationError(f"temperature must be >= 0, got {temperature}")
        self.n_max = int(n_max)
        self.temperature = float(temperature)
        self.modes = []
        for omega, gs in modes:
            if omega <= 0:
                raise ValidationError(f"mode frequency must be > 0, got {omega}")
            gs = [complex(g) for g in (gs if np.iterable(gs) else [gs])]
            self.modes.append((float(omega), gs))
        self.n_gen = len(self.modes[0][1])
        if any(len(gs) != self.n_gen for _, gs in self.modes):
            raise ValidationError("all modes must couple to the same generator count")

        levels = self.n_max + 1
        self.dim = levels ** len(self.modes)

        # per-mode thermal weights; refuse truncations that drop real weight
        self._weights = []
        for omega, _ in self.modes:
            if self.temperature == 0.0:
                w = np.zeros(levels)
                w[0] = 1.0
                discarded = 0.0
            else:
                q = np.exp(-omega / self.temperature)
                w = q ** np.arange(levels)
                discarded = q ** levels  # geometric tail relative to full Z
                w = w / w.sum()
            if discarded >= MAX_DISCARDED_WEIGHT:
                raise TruncationError(
                    f"mode omega={omega:g}: discarded thermal weight "
                    f"{discarded:.3e} >= {MAX_DISCARDED_WEIGHT:g}; raise n_max"
                )
            self._weights.append(w)

        # diagonal bath energies sum_k w_k n_k; the occupation of mode k is
        # the k-th base-`levels` digit of the composite index, so no
        # operators are needed here (keeps oversized baths cheap to reject)
        idx = np.arange(self.dim)
        energy = np.zeros(self.dim)
        for k, (omega, _) in enumerate(self.modes):
            digit = (idx // levels ** (len(self.modes) - 1 - k)) % levels
            energy += omega * digit
        self.energies = energy
        self._lowerings_cache = None

    @property
    def _lowerings(self):
        if self._lowerings_cache is None:
            levels = self.n_max + 1
            eye = np.eye(levels)
            low = _lowering(levels)
            chains = []
            for k in range(len(self.modes)):
                chain = [low if j == k else eye for j in range(len(self.modes))]
                chains.append(_kron_chain(chain))
            self._lowerings_cache = chains
        return self._lowerings_cache

    @classmethod
    def from_discrete(cls, bath, n_max):
        """Single-generator bath from a DiscreteBath model."""
        return cls([(w, [g]) for g, w in bath.modes], n_max, bath.temperature)

    def with_n_max(self, n_max):
        modes = [(w, list(gs)) for w, gs in self.modes]
        return TruncatedBath(modes, n_max, self.temperature)

    def hamiltonian(self):
        return np.diag(self.energies.astype(complex))

    def thermal_state(self):
        return _kron_chain([np.diag(w.astype(complex)) for w in self._weights])

    def coupling_field(self, alpha):
        """b_alpha = sum_k ( g_k a_k^dag + conj(g_k) a_k )."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for k, (_, gs) in enumerate(self.modes):
            g = gs[alpha]
            out += g * self._lowerings[k].conj().T + np.conj(g) * self._lowerings[k]
        return out


def bath_correlation_exact(bath, t, *, alpha=0, check=False):
    """Tr_b[ b(t) b rho_b ] by Heisenberg evolution in the truncated space.

    With check=True the same value is recomputed at doubled n_max and a
    deviation above 1e-9 raises TruncationError.
    """
    b = bath.coupling_field(alpha)
    phases = np.exp(1j * bath.energies * t)
    b_t = (phases[:, None] * b) * phases.conj()[None, :]
    val = complex(np.trace(b_t @ b @ bath.thermal_state()))
    if check:
        ref = bath_correlation_exact(bath.with_n_max(2 * bath.n_max), t,
                                     alpha=alpha, check=False)
        if abs(val - ref) > 1e-9:
            raise TruncationError(
                f"doubling n_max moves chi({t:g}) by {abs(val - ref):.3e} > 1e-9"
            )
    return val


class TotalSystem:
    """System plus truncated bath under the full interacting Hamiltonian."""

    def __init__(self, h_s, generators, bath):
        self.h_s = h_s if isinstance(h_s, SystemHamiltonian) else SystemHamiltonian(h_s)
        self.generators = check_generator_set(generators)
        if len(self.generators) != bath.n_gen:
            raise ValidationError(
                f"{len(self.generators)} generators but bath couples {bath.n_gen}"
            )
        self.bath = bath
        d, db = self.h_s.dim, bath.dim
        self.dim = d * db
        if self.dim > MAX_TOTAL_DIM:
            raise ValidationError(
                f"total dimension {self.dim} exceeds guard {MAX_TOTAL_DIM}"
            )
        h = np.kron(self.h_s.matrix, np.eye(db)) + np.kron(
            np.eye(d), bath.hamiltonian()
        )
        for alpha, v in enumerate(self.generators):
            h += np.kron(v, bath.coupling_field(alpha))
        self.h_total = check_hermitian(h, "H_total")
        self._eig = None

    def _diagonalize(self):
        if self._eig is None:
            self._eig = np.linalg.eigh(self.h_total)
        return self._eig

    def total_state(self, rho_total0, t):
        """Exact rho_total(t) = e^{-iHt} rho_total(0) e^{+iHt}."""
        energies, u = self._diagonalize()
        r_eig = u.conj().T @ rho_total0 @ u
        ph = np.exp(-1j * energies * t)
        return u @ (np.outer(ph, ph.conj()) * r_eig) @ u.conj().T


def evolve_exact(total, rho_s0, times):
    """Reduced trajectory of the exact total evolution from rho_s0 (x) thermal."""
    rho_s0 = check_density_matrix(np.asarray(rho_s0, dtype=complex), "rho_s0")
    if rho_s0.shape[0] != total.h_s.dim:
        raise ValidationError(
            f"state dimension {rho_s0.shape[0]} != system dimension {total.h_s.dim}"
        )
    times = np.asarray(times, dtype=float)
    rho_total0 = np.kron(rho_s0, total.bath.thermal_state())
    d, db = total.h_s.dim, total.bath.dim
    states = np.empty((times.size, d, d), dtype=complex)
    for i, t in enumerate(times):
        states[i] = partial_trace_bath(total.total_state(rho_total0, t), d, db)
    traj = Trajectory(times, states)
    if traj.trace_dev.max() > 1e-10:
        raise ValidationError(
            f"reduced trace drifted by {traj.trace_dev.max():.3e} (unitarity bug?)"
        )
    return traj
