"""Born-order evolution superoperator and canonical Kraus extraction.

The second-order (Born) evolution superoperator in the interaction picture
has the matrix form, over composite indices (a, n) -> a*d + n in the H_s
eigenbasis,

    E[(a,n),(b,m)] = delta_an delta_bm - B[a,n] delta_bm
                     - delta_an conj(B[b,m]) + A[(a,n),(b,m)]

with the two double-time moments of the coupling

    B[a,n]        = sum_g int_0^t ds int_0^s dtau conj(chi(tau-s))
                    <a| v(s) v(tau) |n>                        (triangle)
    A[(a,n),(b,m)] = T + T^dag,
    T[(a,n),(b,m)] = sum_g int_0^t ds int_0^s dtau chi(tau-s)
                    <a| v(s) |n> conj(<b| v(tau) |m>)          (triangle)

A is the full-square two-sided moment written as triangle + Hermitian
transpose; this makes E exactly Hermitian under the (a,n)/(b,m) pairing and
exactly trace-preserving (sum_a E[(a,n),(a,m)] = delta_nm), which the tests
assert against a direct quadrature of the underlying evolution expression.

Diagonalizing the Hermitian E gives the canonical Kraus set
K_k = sqrt(d_k) * unvec(u_k); operators are returned in the computational
basis.  Small negative eigenvalues (Born truncation artifacts of order
|B|^2) are clipped and logged; large ones are errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baths import MarkovianBath
from .linalg import SystemHamiltonian, ValidationError, hermitize
from .quadrature import integrate_array

#: base absolute tolerance for the complete-positivity clip window
CP_BASE_TOL = 1e-8


class CPViolationError(RuntimeError):
    """Channel matrix is not completely positive beyond the Born budget."""


@dataclass
class DampingTerm:
    """Ordered double-time moment B (d x d) at time t."""

    t: float
    matrix: np.ndarray


@dataclass
class JumpTerm:
    """Two-sided double-time moment A (d^2 x d^2, Hermitian pairing) at time t."""

    t: float
    tensor: np.ndarray


@dataclass
class ChannelMatrix:
    """Evolution superoperator in composite-index form.

    Row/column indices are (a, n) -> a*d + n in the eigenbasis of `basis`
    (columns = H_s eigenvectors).  `herm_dev` is the pairing-Hermiticity
    deviation of the raw assembly; `cp_budget` is the clip window for
    slightly negative eigenvalues, 1e-8 + 10 * max|B|^2.
    """

    t: float
    dim: int
    matrix: np.ndarray
    basis: np.ndarray
    picture: str = "interaction"
    herm_dev: float = 0.0
    cp_budget: float = CP_BASE_TOL

    def in_computational_basis(self):
        """The same superoperator over computational-basis composite indices."""
        w = np.kron(self.basis, self.basis.conj())
        return w @ self.matrix @ w.conj().T

    def apply(self, rho):
        """Act on a computational-basis density matrix."""
        rho = np.asarray(rho, dtype=complex)
        rho_eig = self.basis.conj().T @ rho @ self.basis
        m4 = self.matrix.reshape(self.dim, self.dim, self.dim, self.dim)
        out_eig = np.einsum("anbm,nm->ab", m4, rho_eig)
        return self.basis @ out_eig @ self.basis.conj().T


@dataclass
class KrausSet:
    """Operator-sum representation: operators in the computational basis."""

    operators: list
    eigenvalues: list
    picture: str
    t: float
    completeness_dev: float = 0.0
    clipped: list = field(default_factory=list)

    @property
    def dim(self):
        return self.operators[0].shape[0]

    def completeness(self):
        """max |sum_k K_k^dag K_k - I|."""
        d = self.dim
        s = sum((k.conj().T @ k for k in self.operators), np.zeros((d, d), complex))
        return float(np.abs(s - np.eye(d)).max())

    def to_json_dict(self):
        from .linalg import matrix_to_json

        return {
            "t": float(self.t),
            "picture": self.picture,
            "completeness_dev": float(self.completeness_dev),
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "operators": [matrix_to_json(k) for k in self.operators],
        }


def _normalize_baths(generators, bath):
    if isinstance(bath, (list, tuple)):
        if len(bath) != len(generators):
            raise ValidationError(
                f"{len(bath)} correlation models for {len(generators)} generators"
            )
        return list(bath)
    return [bath] * len(generators)


def _check_time(t):
    if t < 0:
        raise ValidationError(f"t must be >= 0, got {t}")
    return float(t)


def _inner_moment(h_s, v_eig, chi, s, rtol, atol):
    """I(s) = int_0^s conj(chi(tau - s)) v(tau) dtau, eigenbasis."""

    def integrand(tau):
        return np.conj(chi(tau - s)) * (v_eig * h_s.phase_matrix(tau))

    return integrate_array(integrand, 0.0, s, rtol=rtol, atol=atol)


def damping_term(t, h_s, generators, bath, *, rtol=1e-11, atol=1e-12):
    """B(t) in the H_s eigenbasis; B(0) = 0."""
    t = _check_time(t)
    if not isinstance(h_s, SystemHamiltonian):
        h_s = SystemHamiltonian(h_s)
    d = h_s.dim
    if t == 0.0:
        return DampingTerm(0.0, np.zeros((d, d), complex))

    if isinstance(bath, MarkovianBath):
        # inner delta on the triangle boundary: half weight -> gamma/4
        g = bath.rate_matrix(len(generators))
        v_eigs = [h_s.to_eigenbasis(v) for v in generators]

        def integrand(s):
            p = h_s.phase_matrix(s)
            vs = [ve * p for ve in v_eigs]
            out = np.zeros((d, d), complex)
            for a in range(len(vs)):
                for b in range(len(vs)):
                    if g[a, b] == 0:
                        continue
                    out += 0.25 * np.conj(g[a, b]) * (vs[a] @ vs[b])
            return out

        return DampingTerm(t, integrate_array(integrand, 0.0, t,
                                              rtol=rtol, atol=atol))

    baths = _normalize_baths(generators, bath)
    total = np.zeros((d, d), complex)
    for v, bm in zip(generators, baths):
        v_eig = h_s.to_eigenbasis(v)
        chi = bm.correlation

        def integrand(s):
            inner = _inner_moment(h_s, v_eig, chi, s, rtol * 0.1, atol * 0.1)
            return (v_eig * h_s.phase_matrix(s)) @ inner

        total += integrate_array(integrand, 0.0, t, rtol=rtol, atol=atol)
    return DampingTerm(t, total)


def jump_term(t, h_s, generators, bath, *, rtol=1e-11, atol=1e-12):
    """A(t) = T + T^dag in the H_s eigenbasis; A(0) = 0."""
    t = _check_time(t)
    if not isinstance(h_s, SystemHamiltonian):
        h_s = SystemHamiltonian(h_s)
    d = h_s.dim
    if t == 0.0:
        return JumpTerm(0.0, np.zeros((d * d, d * d), complex))

    if isinstance(bath, MarkovianBath):
        # the delta line tau = s is interior to the full square: full weight
        g = bath.rate_matrix(len(generators))
        v_eigs = [h_s.to_eigenbasis(v) for v in generators]

        def integrand(s):
            p = h_s.phase_matrix(s)
            vecs = [(ve * p).reshape(-1) for ve in v_eigs]
            out = np.zeros((d * d, d * d), complex)
            for a in range(len(vecs)):
                for b in range(len(vecs)):
                    if g[a, b] == 0:
                        continue
                    out += 0.5 * g[a, b] * np.outer(vecs[a], vecs[b].conj())
            return out

        return JumpTerm(t, integrate_array(integrand, 0.0, t,
                                           rtol=rtol, atol=atol))

    baths = _normalize_baths(generators, bath)
    tri = np.zeros((d * d, d * d), complex)
    for v, bm in zip(generators, baths):
        v_eig = h_s.to_eigenbasis(v)
        chi = bm.correlation

        def integrand(s):
            # conj(inner) carries chi(tau-s) * conj(<b|v(tau)|m>) exactly
            inner = _inner_moment(h_s, v_eig, chi, s, rtol * 0.1, atol * 0.1)
            vec_v = (v_eig * h_s.phase_matrix(s)).reshape(-1)
            return np.outer(vec_v, inner.reshape(-1).conj())

        tri += integrate_array(integrand, 0.0, t, rtol=rtol, atol=atol)
    return JumpTerm(t, tri + tri.conj().T)


def assemble_channel(b_term, a_term, h_s):
    """E = 1 - B - B* + A over composite indices, interaction picture."""
    if not isinstance(h_s, SystemHamiltonian):
        h_s = SystemHamiltonian(h_s)
    d = h_s.dim
    if b_term.t != a_term.t:
        raise ValidationError(
            f"damping term at t={b_term.t} but jump term at t={a_term.t}"
        )
    if b_term.matrix.shape != (d, d) or a_term.tensor.shape != (d * d, d * d):
        raise ValidationError("term dimensions do not match the Hamiltonian")
    vec_i = np.eye(d, dtype=complex).reshape(-1)
    vec_b = b_term.matrix.reshape(-1)
    m = (
        np.outer(vec_i, vec_i)
        - np.outer(vec_b, vec_i)
        - np.outer(vec_i, vec_b.conj())
        + a_term.tensor
    )
    _, dev = hermitize(m)
    budget = CP_BASE_TOL + 10.0 * float(np.abs(b_term.matrix).max()) ** 2
    return ChannelMatrix(t=b_term.t, dim=d, matrix=m, basis=h_s.vectors.copy(),
                         picture="interaction", herm_dev=dev, cp_budget=budget)


def channel_at(t, h_s, generators, bath, **kw):
    """Convenience: assemble the channel matrix at time t from scratch."""
    if not isinstance(h_s, SystemHamiltonian):
        h_s = SystemHamiltonian(h_s)
    b = damping_term(t, h_s, generators, bath, **kw)
    a = jump_term(t, h_s, generators, bath, **kw)
    return assemble_channel(b, a, h_s)


def _fix_phase(k):
    idx = int(np.argmax(np.abs(k.reshape(-1))))
    z = k.reshape(-1)[idx]
    if abs(z) == 0.0:
        return k
    return k * (abs(z) / z)


def canonical_kraus(channel, *, eps_cp=None, normalize=False):
    """Extract the canonical Kraus set from a channel matrix.

    Eigen-decomposes the Hermitized matrix, keeps positive eigenvalues in
    descending order, clips negatives within the CP budget (logged), and
    errors on anything below -eps_cp.  Operators come out in the
    computational basis with the global phase of each fixed so its
    largest-magnitude entry is real positive.
    """
    eps = channel.cp_budget if eps_cp is None else eps_cp
    m_h, _ = hermitize(channel.matrix)
    evals, evecs = np.linalg.eigh(m_h)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]

    bad = evals[evals < -eps]
    if bad.size:
        raise CPViolationError(
            f"channel at t={channel.t:g} is not completely positive at this "
            f"order: eigenvalue {bad.min():.3e} below -{eps:.3e}"
        )
    clipped = [float(x) for x in evals[(evals < 0.0)]]
    keep = evals > 0.0
    evals, evecs = evals[keep], evecs[:, keep]

    d = channel.dim
    w = channel.basis
    ops, eigs = [], []
    for lam, col in zip(evals, evecs.T):
        kappa = np.sqrt(lam) * col.reshape(d, d)
        ops.append(_fix_phase(w @ kappa @ w.conj().T))
        eigs.append(float(lam))

    kset = KrausSet(operators=ops, eigenvalues=eigs, picture=channel.picture,
                    t=channel.t, clipped=clipped)
    if normalize:
        s = sum((k.conj().T @ k for k in ops), np.zeros((d, d), complex))
        se, sv = np.linalg.eigh(s)
        if se.min() <= 0:
            raise ValidationError("completeness sum is singular; cannot normalize")
        s_inv_sqrt = sv @ np.diag(1.0 / np.sqrt(se)) @ sv.conj().T
        kset.operators = [_fix_phase(k @ s_inv_sqrt) for k in ops]
    kset.completeness_dev = kset.completeness()
    return kset


def to_schrodinger(kset, h_s, t=None):
    """Left-multiply by the free propagator: K -> e^{-i H_s t} K."""
    if kset.picture != "interaction":
        raise ValidationError(f"expected an interaction-picture set, got {kset.picture}")
    if not isinstance(h_s, SystemHamiltonian):
        h_s = SystemHamiltonian(h_s)
    t = kset.t if t is None else t
    u = h_s.propagator(t)
    out = KrausSet(operators=[u @ k for k in kset.operators],
                   eigenvalues=list(kset.eigenvalues), picture="schrodinger",
                   t=t, clipped=list(kset.clipped))
    out.completeness_dev = out.completeness()
    return out


def apply_channel(kset, rho):
    """rho -> sum_k K_k rho K_k^dag."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (kset.dim, kset.dim):
        raise ValidationError(
            f"state shape {rho.shape} does not match Kraus dimension {kset.dim}"
        )
    out = np.zeros_like(rho)
    for k in kset.operators:
        out += k @ rho @ k.conj().T
    return out


def channel_matrix_from_kraus(kset):
    """Composite-index matrix sum_k vec(K_k) vec(K_k)^dag (computational basis)."""
    vecs = [k.reshape(-1) for k in kset.operators]
    d2 = kset.dim ** 2
    out = np.zeros((d2, d2), complex)
    for v in vecs:
        out += np.outer(v, v.conj())
    return out


def kraus_equivalent(k1, k2, tol=1e-10):
    """True iff the two sets induce the same channel within tol.

    Compares reconstructed channel matrices, so sets of different
    cardinality (remixed / zero-padded) compare equal when they should.
    """
    if k1.dim != k2.dim:
        raise ValidationError(f"dimension mismatch {k1.dim} vs {k2.dim}")
    if k1.picture != k2.picture:
        raise ValidationError(
            f"picture mismatch {k1.picture} vs {k2.picture}; convert first"
        )
    m1 = channel_matrix_from_kraus(k1)
    m2 = channel_matrix_from_kraus(k2)
    return bool(np.abs(m1 - m2).max() <= tol)
