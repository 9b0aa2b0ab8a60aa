"""Brute-force two-mode density matrices in a truncated Fock basis.

Used to check the closed-form measures for frequency-independent channels.
A channel of amplitude transmittance ``tau`` acts on one pulse as a beam
splitter with a vacuum ancilla that is traced out, i.e. the pure-loss map
with Kraus operators ``K_k |n> = sqrt(C(n, k)) tau^(n-k) (1-tau^2)^(k/2) |n-k>``.
Loss only lowers photon numbers, so it acts exactly on the truncated space.

Basis index of ``|n_a, n_d>`` is ``n_a * (n_max + 1) + n_d``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.special import comb

from .errors import DomainError, TruncationError

NEG_EIG_TOL = 1e-10


@dataclass(frozen=True)
class TruncatedTwoModeState:
    rho: np.ndarray
    n_max: int
    trace_deficit: float = 0.0

    @property
    def dim(self):
        return self.n_max + 1

    def trace(self):
        return float(np.trace(self.rho).real)


def _tmsv_amplitudes(q, n_max):
    n = np.arange(n_max + 1)
    return np.tanh(q.magnitude) ** n * np.exp(-1j * n * q.phase) / np.cosh(q.magnitude)


def tmsv_vector(q, n_max):
    """State vector of the truncated Schmidt series of the squeezed vacuum."""
    N = n_max + 1
    psi = np.zeros((N, N), dtype=complex)
    psi[np.arange(N), np.arange(N)] = _tmsv_amplitudes(q, n_max)
    return psi.reshape(-1)


def tmsv_density(q, n_max, tol=None):
    """Projector on the truncated squeezed vacuum (not renormalized).

    Raises:
        TruncationError: if ``tol`` is given and the dropped weight
            ``tanh^(2(n_max+1)) |q|`` exceeds it.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    deficit = float(np.tanh(q.magnitude) ** (2 * (n_max + 1)))
    if tol is not None and deficit > tol:
        raise TruncationError(f"truncation at n_max={n_max} drops weight {deficit:.3e}")
    psi = tmsv_vector(q, n_max)
    return TruncatedTwoModeState(np.outer(psi, psi.conj()), n_max, deficit)


def pair_superposition_density(state, n_max):
    """Projector on ``(|00> + lam |nn>) / sqrt(1 + |lam|^2)``."""
    if state.n > n_max:
        raise ValueError("n_max must be at least the pair photon number")
    N = n_max + 1
    psi = np.zeros(N * N, dtype=complex)
    psi[0] = 1.0
    psi[state.n * N + state.n] = state.lam
    psi /= np.sqrt(1 + abs(state.lam) ** 2)
    return TruncatedTwoModeState(np.outer(psi, psi.conj()), n_max, 0.0)


def n_max_for(q, tol=1e-12, cap=64):
    """Smallest truncation whose geometric tail is below ``tol``, capped."""
    t2 = np.tanh(q.magnitude) ** 2
    if t2 == 0:
        return 1
    n = int(np.ceil(np.log(tol) / np.log(t2))) - 1
    return int(min(max(n, 1), cap))


def _loss_coefficients(tau, N):
    # b[k, n] = sqrt(C(n, k)) tau^(n-k) (1 - tau^2)^(k/2), zero for k > n
    n = np.arange(N)
    b = np.zeros((N, N))
    loss = 1.0 - tau**2
    for k in range(N):
        m = n[k:]
        b[k, k:] = np.sqrt(comb(m, k)) * tau ** (m - k) * loss ** (k / 2)
    return b


def apply_flat_loss(state, tau, arm):
    """Pure-loss channel of amplitude transmittance ``tau`` on arm ``"a"`` or ``"d"``."""
    if not 0 <= tau <= 1:
        raise DomainError(f"amplitude transmittance must lie in [0, 1], got {tau}")
    if arm not in ("a", "d"):
        raise ValueError(f"arm must be 'a' or 'd', got {arm!r}")
    N = state.dim
    r = state.rho.reshape(N, N, N, N)
    if arm == "d":
        r = r.transpose(1, 0, 3, 2)
    b = _loss_coefficients(float(tau), N)
    out = np.zeros_like(r)
    for k in range(N):
        w = np.outer(b[k, k:], b[k, k:])
        if not w.any():
            continue
        out[: N - k, :, : N - k, :] += w[:, None, :, None] * r[k:, :, k:, :]
    if arm == "d":
        out = out.transpose(1, 0, 3, 2)
    return TruncatedTwoModeState(out.reshape(N * N, N * N), state.n_max, state.trace_deficit)


def state_overlap(s1, s2):
    """``Tr(rho_1 rho_2)``."""
    if s1.rho.shape != s2.rho.shape:
        raise ValueError(f"dimension mismatch: {s1.rho.shape} vs {s2.rho.shape}")
    return float(np.sum(s1.rho * s2.rho.T).real)


def vacuum_environment_fidelity(q, tau_a, tau_d, n_max):
    """``|<psi_in, 0_env | psi_out>|^2`` for flat loss on both arms.

    Projects the purified output on the vacuum of the loss ancillas, which
    keeps only the no-loss Kraus term ``tau_a^n_a tau_d^n_d``.
    """
    psi = tmsv_vector(q, n_max)
    N = n_max + 1
    na, nd = np.divmod(np.arange(N * N), N)
    kraus0 = float(tau_a) ** na * float(tau_d) ** nd
    return float(abs(np.vdot(psi, kraus0 * psi)) ** 2)


def reduce(state, keep):
    """Partial trace leaving arm ``"a"`` or ``"d"``."""
    N = state.dim
    r = state.rho.reshape(N, N, N, N)
    if keep == "a":
        return np.einsum("ijkj->ik", r)
    if keep == "d":
        return np.einsum("ijil->jl", r)
    raise ValueError(f"keep must be 'a' or 'd', got {keep!r}")


def _eigvalsh_blocks(rho):
    # exact zeros decouple the matrix into independent Hermitian blocks
    ncomp, labels = connected_components(rho != 0, directed=False)
    if ncomp == 1:
        return np.linalg.eigvalsh(rho)
    vals = []
    for c in range(ncomp):
        idx = np.flatnonzero(labels == c)
        vals.append(np.linalg.eigvalsh(rho[np.ix_(idx, idx)]))
    return np.concatenate(vals)


def von_neumann(state):
    """Entropy in nats of a density matrix or :class:`TruncatedTwoModeState`."""
    rho = state.rho if isinstance(state, TruncatedTwoModeState) else np.asarray(state)
    rho = (rho + rho.conj().T) / 2
    lam = _eigvalsh_blocks(rho)
    if lam.min() < -NEG_EIG_TOL:
        raise DomainError(f"density matrix has eigenvalue {lam.min():.3e}")
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))
