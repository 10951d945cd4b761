"""Master-equation generators and trajectory integration.

Two generators for the reduced dynamics d rho/dt = -i [H_s, rho] + D(t) rho:

* :class:`Tcl2Generator` -- second-order time-convolutionless dissipator.
  For a finite-memory bath the action on rho is

      D(t) rho = sum_a ( [L_a(t) rho, v_a] + [v_a, rho L_a(t)^dag] ),
      L_a(t)   = int_0^t chi_a(u) v_a(-u) du,

  where v_a(s) is the interaction-picture generator and chi_a(u) is the
  correlation at positive lag (later bath operator on the left).  This is an
  exact restructuring of the defining double-commutator form that needs one
  matrix quadrature per generator per right-hand-side call and is manifestly
  trace-free and Hermiticity-preserving.  For the white-noise bath the delta collapses
  the memory integral and D becomes the Lindblad dissipator exactly.

* :class:`LindbladGenerator` -- Markovian dissipator
  (1/2) sum_ab gamma_ab ( [v_a rho, v_b] + [v_a, rho v_b] ).

:func:`integrate` drives either generator with adaptive RK45 at 1e-10
local tolerance and interpolates onto the requested grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .baths import MarkovianBath
from .linalg import (
    SystemHamiltonian,
    ValidationError,
    check_density_matrix,
    check_generator_set,
    commutator,
)
from .quadrature import integrate_array

#: trajectory-level hard limits
TRACE_DRIFT_ABORT = 1e-8


class IntegrationError(RuntimeError):
    """Trajectory integration failed or violated an invariant."""


def _as_hamiltonian(h_s):
    return h_s if isinstance(h_s, SystemHamiltonian) else SystemHamiltonian(h_s)


class Tcl2Generator:
    """Second-order TCL dissipator for a set of Hermitian generators.

    Parameters
    ----------
    h_s : SystemHamiltonian or matrix
    generators : sequence of Hermitian matrices v_a
    bath : a correlation model shared by all generators, a sequence with one
        model per generator (diagonal coupling), or a
        :class:`~tclkraus.baths.MarkovianBath` (possibly with a full rate
        matrix over generator pairs).
    """

    def __init__(self, h_s, generators, bath, *, quad_rtol=1e-10, quad_atol=1e-13):
        self.h_s = _as_hamiltonian(h_s)
        self.generators = check_generator_set(generators)
        for v in self.generators:
            if v.shape[0] != self.h_s.dim:
                raise ValidationError(
                    f"generator dimension {v.shape[0]} != system dimension {self.h_s.dim}"
                )
        self.quad_rtol = quad_rtol
        self.quad_atol = quad_atol

        if isinstance(bath, MarkovianBath):
            self.bath = bath
            self.baths = None
            self._rate = bath.rate_matrix(len(self.generators))
        else:
            baths = list(bath) if isinstance(bath, (list, tuple)) else [bath] * len(
                self.generators
            )
            if len(baths) != len(self.generators):
                raise ValidationError(
                    f"{len(baths)} correlation models for {len(self.generators)} generators"
                )
            self.bath = baths[0] if len(set(map(id, baths))) == 1 else baths
            self.baths = baths
            self._rate = None

        # generators in the H_s eigenbasis, for cheap interaction-picture phases
        self._v_eig = [self.h_s.to_eigenbasis(v) for v in self.generators]

    @property
    def dim(self):
        return self.h_s.dim

    @property
    def is_markovian(self):
        return self._rate is not None

    def with_hamiltonian(self, h_s):
        """Same bath and generators under a new system Hamiltonian."""
        src = self.bath if self.is_markovian else self.baths
        return Tcl2Generator(h_s, self.generators, src,
                             quad_rtol=self.quad_rtol, quad_atol=self.quad_atol)

    def memory_operator(self, t, alpha):
        """L_a(t) = int_0^t chi_a(u) v_a(-u) du in the computational basis.

        The kernel carries the correlation at positive lag: u steps back into
        the memory, and the later bath operator always sits on the left.
        For the pure-dephasing case only Re chi survives in the dissipator, so
        that case cannot distinguish chi(u) from chi(-u); the exact-reference
        comparison with a non-commuting generator does, and fixes this form.
        """
        if self.is_markovian:
            raise ValidationError(
                "memory operator is not defined pointwise for the white-noise bath"
            )
        chi = self.baths[alpha].correlation
        v_eig = self._v_eig[alpha]

        def integrand(u):
            return chi(u) * (v_eig * self.h_s.phase_matrix(-u))

        lam = integrate_array(integrand, 0.0, t,
                              rtol=self.quad_rtol, atol=self.quad_atol)
        return self.h_s.from_eigenbasis(lam)

    def dissipator(self, t, rho):
        """D(t) rho.  t = 0 gives the zero matrix (empty memory integral)."""
        if t < 0:
            raise ValidationError(f"t must be >= 0, got {t}")
        rho = np.asarray(rho, dtype=complex)
        out = np.zeros_like(rho)
        if t == 0.0:
            return out
        if self.is_markovian:
            # the delta sits at the endpoint of the memory integral and is
            # consumed with full weight per term, which lands exactly on the
            # Lindblad dissipator (see decision record); v(0) = v collapses
            # the interaction-picture factors
            g = self._rate
            vs = self.generators
            for a in range(len(vs)):
                for b in range(len(vs)):
                    if g[a, b] == 0:
                        continue
                    out += 0.5 * g[a, b] * (
                        commutator(vs[b] @ rho, vs[a])
                        + commutator(vs[a], rho @ vs[b])
                    )
            return out
        for alpha, v in enumerate(self.generators):
            lam = self.memory_operator(t, alpha)
            out += commutator(lam @ rho, v) + commutator(v, rho @ lam.conj().T)
        return out

    def rhs(self, t, rho):
        """Full right-hand side -i[H_s, rho] + D(t) rho."""
        return -1j * commutator(self.h_s.matrix, rho) + self.dissipator(t, rho)


class LindbladGenerator:
    """Markovian dissipator with Hermitian PSD rate matrix gamma."""

    def __init__(self, h_s, generators, gamma):
        self.h_s = _as_hamiltonian(h_s)
        self.generators = check_generator_set(generators)
        for v in self.generators:
            if v.shape[0] != self.h_s.dim:
                raise ValidationError(
                    f"generator dimension {v.shape[0]} != system dimension {self.h_s.dim}"
                )
        bath = gamma if isinstance(gamma, MarkovianBath) else MarkovianBath(gamma)
        self.gamma = bath.rate_matrix(len(self.generators))

    @property
    def dim(self):
        return self.h_s.dim

    def with_hamiltonian(self, h_s):
        return LindbladGenerator(h_s, self.generators, self.gamma)

    def dissipator(self, rho):
        """(1/2) sum_ab gamma_ab ( [v_a rho, v_b] + [v_a, rho v_b] )."""
        rho = np.asarray(rho, dtype=complex)
        out = np.zeros_like(rho)
        vs = self.generators
        for a in range(len(vs)):
            for b in range(len(vs)):
                if self.gamma[a, b] == 0:
                    continue
                out += 0.5 * self.gamma[a, b] * (
                    commutator(vs[a] @ rho, vs[b])
                    + commutator(vs[a], rho @ vs[b])
                )
        return out

    def rhs(self, t, rho):
        return -1j * commutator(self.h_s.matrix, rho) + self.dissipator(rho)


def reduce_to_lindblad(gen):
    """Collapse a white-noise Tcl2Generator to its Lindblad form.

    The two act identically on states (for real symmetric rates this is an
    operator identity; tested to 1e-12), so this is bookkeeping, not an
    approximation.
    """
    if not isinstance(gen, Tcl2Generator) or not gen.is_markovian:
        raise ValidationError("reduce_to_lindblad needs a white-noise Tcl2Generator")
    return LindbladGenerator(gen.h_s, gen.generators, gen.bath)


@dataclass
class Trajectory:
    """Time grid, state snapshots, and per-snapshot diagnostics."""

    times: np.ndarray
    states: np.ndarray  # (n, d, d) complex
    trace_dev: np.ndarray = field(default=None)
    min_eig: np.ndarray = field(default=None)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        if self.states.shape[0] != self.times.shape[0]:
            raise ValidationError(
                f"{self.states.shape[0]} snapshots for {self.times.shape[0]} grid points"
            )
        if self.trace_dev is None:
            self.trace_dev = np.array(
                [abs(complex(np.trace(s)) - 1.0) for s in self.states]
            )
        if self.min_eig is None:
            self.min_eig = np.array(
                [float(np.linalg.eigvalsh(0.5 * (s + s.conj().T)).min())
                 for s in self.states]
            )

    @property
    def dim(self):
        return self.states.shape[1]

    def to_csv(self, path):
        """Columns: t, Re/Im of each state element (row-major), trace_dev, min_eig."""
        d = self.dim
        cols = ["t"]
        for a in range(d):
            for b in range(d):
                cols += [f"re_{a}{b}", f"im_{a}{b}"]
        cols += ["trace_dev", "min_eig"]
        lines = [",".join(cols)]
        for i, t in enumerate(self.times):
            row = [f"{t:.17e}"]
            for z in self.states[i].reshape(-1):
                row += [f"{z.real:.17e}", f"{z.imag:.17e}"]
            row += [f"{self.trace_dev[i]:.17e}", f"{self.min_eig[i]:.17e}"]
            lines.append(",".join(row))
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def _check_grid(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValidationError("time grid must be a 1-D array")
    if times[0] != 0.0:
        raise ValidationError(f"time grid must start at 0, got {times[0]}")
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise ValidationError("time grid must be strictly increasing")
    return times


def integrate(gen, rho0, times, controls=None):
    """Integrate d rho/dt = gen.rhs(t, rho) and sample on `times`.

    Parameters
    ----------
    gen : Tcl2Generator or LindbladGenerator
    rho0 : density matrix at t = 0
    times : strictly increasing grid starting at 0
    controls : optional piecewise-constant Hamiltonian schedule, a list of
        (t_start, H_matrix) with t_start[0] == 0.  The generator is rebuilt
        (eigen caches included) at each segment boundary.

    Aborts with :class:`IntegrationError` if the trace drifts by more than
    1e-8 at any snapshot.
    """
    times = _check_grid(times)
    rho0 = check_density_matrix(rho0, "rho0")
    d = gen.dim
    if rho0.shape[0] != d:
        raise ValidationError(f"state dimension {rho0.shape[0]} != generator {d}")

    if controls is None:
        segments = [(0.0, times[-1], gen)]
    else:
        starts = [float(s) for s, _ in controls]
        if starts[0] != 0.0 or any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValidationError(
                "controls must start at t=0 with strictly increasing segment times"
            )
        segments = []
        for i, (s, h) in enumerate(controls):
            end = starts[i + 1] if i + 1 < len(controls) else times[-1]
            if end > times[-1]:
                raise ValidationError("control segment extends past the grid")
            segments.append((s, end, gen.with_hamiltonian(h)))

    states = np.empty((times.size, d, d), dtype=complex)
    states[0] = rho0
    y = rho0.reshape(-1).astype(complex)

    for seg_start, seg_end, seg_gen in segments:
        if seg_end <= seg_start:
            continue

        def rhs_flat(t, yv, g=seg_gen):
            return g.rhs(t, yv.reshape(d, d)).reshape(-1)

        mask = (times > seg_start) & (times <= seg_end)
        t_eval = list(times[mask])
        if not t_eval or t_eval[-1] != seg_end:
            t_eval.append(seg_end)  # always land on the boundary for restart
        sol = solve_ivp(rhs_flat, (seg_start, seg_end), y, method="RK45",
                        rtol=1e-10, atol=1e-12, t_eval=np.array(t_eval),
                        dense_output=False)
        if not sol.success:
            raise IntegrationError(
                f"integrator failed on [{seg_start}, {seg_end}]: {sol.message}"
            )
        snaps = sol.y.T.reshape(-1, d, d)
        if mask.any():
            states[mask] = snaps[: int(mask.sum())]
        y = sol.y[:, -1]

    traj = Trajectory(times, states)
    worst = int(np.argmax(traj.trace_dev))
    if traj.trace_dev[worst] > TRACE_DRIFT_ABORT:
        raise IntegrationError(
            f"trace drifted by {traj.trace_dev[worst]:.3e} at t = {times[worst]:g} "
            f"(limit {TRACE_DRIFT_ABORT:g})"
        )
    return traj
