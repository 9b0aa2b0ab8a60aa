"""Gaussian description of the two output pulses.

Quadratures are ordered ``(x_a, p_a, x_d, p_d)`` with ``alpha = x_a + i p_a``
(likewise for ``beta``) and the vacuum covariance is the identity, so the
symmetric characteristic function reads ``exp(-xi^T V xi / 2)`` and a
thermal mode of mean photon number ``n`` has symplectic eigenvalue
``1 + 2 n``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

PHYS_TOL = 1e-10

OMEGA = np.array(
    [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=float
)
_Z = np.diag([1.0, -1.0])
_X = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class SqueezingParameter:
    """Two-mode squeezing ``q = magnitude * exp(i * phase)``."""

    magnitude: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.magnitude >= 0:
            raise DomainError(f"squeezing magnitude must be >= 0, got {self.magnitude}")
        object.__setattr__(self, "phase", float(self.phase) % (2 * np.pi))

    @classmethod
    def from_mean_photons(cls, n, phase=0.0):
        return cls(float(np.arcsinh(np.sqrt(n))), phase)

    @property
    def mean_photons(self):
        """``sinh^2 |q|``, the mean photon number per mode."""
        return float(np.sinh(self.magnitude) ** 2)


@dataclass(frozen=True)
class TwoModeCovariance:
    """Real symmetric 4x4 covariance matrix."""

    V: np.ndarray

    def __post_init__(self):
        V = np.array(self.V, dtype=float)
        if V.shape != (4, 4):
            raise ValueError("covariance must be 4x4")
        if not np.allclose(V, V.T, atol=1e-12):
            raise ValueError("covariance must be symmetric")
        V.setflags(write=False)
        object.__setattr__(self, "V", V)

    @property
    def blocks(self):
        V = self.V
        return V[:2, :2], V[2:, 2:], V[:2, 2:]

    def is_physical(self, tol=PHYS_TOL):
        return bool(np.linalg.eigvalsh(self.V + 1j * OMEGA).min() >= -tol)

    def to_csv(self, path):
        np.savetxt(path, self.V, delimiter=",", fmt="%.12g")


def char_fn_out(alpha, beta, ov, q):
    """Symmetric characteristic function of the two transmitted pulses."""
    ta = np.sqrt(ov.n2_T)
    td = np.sqrt(ov.n2_Tt)
    c2 = np.cosh(2 * q.magnitude) - 1
    s2 = np.sinh(2 * q.magnitude)
    ph = np.exp(-1j * q.phase)
    diag = abs(alpha) ** 2 * (1 + c2 * ov.n2_T) + abs(beta) ** 2 * (1 + c2 * ov.n2_Tt)
    cross = (alpha * beta * ph * s2 + np.conj(alpha) * np.conj(beta) * np.conj(ph) * s2) * ta * td
    return complex(np.exp(-0.5 * diag - 0.5 * cross))


def covariance_from_overlaps(ov, q):
    """Covariance matrix read off the exponent of :func:`char_fn_out`."""
    n = q.mean_photons
    a = 1 + 2 * n * ov.n2_T
    b = 1 + 2 * n * ov.n2_Tt
    c = np.sinh(2 * q.magnitude) * np.sqrt(ov.n2_T * ov.n2_Tt)
    off = c * (np.cos(q.phase) * _Z + np.sin(q.phase) * _X)
    V = np.block([[a * np.eye(2), off], [off.T, b * np.eye(2)]])
    return TwoModeCovariance(V)


def _check_physical(cov):
    if not cov.is_physical():
        raise DomainError("covariance violates V + i Omega >= 0")


def symplectic_eigenvalues(cov, check=True):
    """Symplectic spectrum ``(nu_plus, nu_minus)``.

    Computed as the positive eigenvalues of the Hermitian matrix
    ``V^(1/2) i Omega V^(1/2)``, which stays accurate to rounding for the
    degenerate spectra of pure states.
    """
    if check:
        _check_physical(cov)
    w, U = np.linalg.eigh(cov.V)
    if w.min() <= 0:
        raise DomainError("covariance is not positive definite")
    root = (U * np.sqrt(w)) @ U.T
    ev = np.linalg.eigvalsh(root @ (1j * OMEGA) @ root)
    return float(ev[3]), float(ev[2])


def symplectic_eigenvalues_closed(cov):
    """Two-mode closed form from block determinants.

    ``nu^2 = (Delta +- sqrt(Delta^2 - 4 det V)) / 2`` with
    ``Delta = det A + det B + 2 det C``. Near a degenerate spectrum the
    square root loses about half the significant digits.
    """
    A, B, C = cov.blocks
    delta = np.linalg.det(A) + np.linalg.det(B) + 2 * np.linalg.det(C)
    det = np.linalg.det(cov.V)
    disc = np.sqrt(max(delta**2 - 4 * det, 0.0))
    nu_p = np.sqrt((delta + disc) / 2)
    nu_m = np.sqrt(max((delta - disc) / 2, 0.0))
    return float(nu_p), float(nu_m)


def symplectic_eigenvalues_spectral(cov):
    """Symplectic spectrum from the (non-Hermitian) eigenvalues of ``i Omega V``."""
    ev = np.abs(np.linalg.eigvals(1j * OMEGA @ cov.V))
    ev = np.sort(ev)[::-1]
    return float(ev[0]), float(ev[2])


def thermal_entropy(n):
    """Von Neumann entropy (nats) of a thermal state with mean photon number ``n``."""
    n = float(n)
    if n < 0:
        if n > -1e-12:
            n = 0.0
        else:
            raise DomainError(f"mean photon number must be >= 0, got {n}")
    if n == 0:
        return 0.0
    return (n + 1) * np.log1p(n) - n * np.log(n)


def gaussian_entropy(cov):
    """Entropy as a sum of thermal entropies over the symplectic spectrum."""
    total = 0.0
    for nu in symplectic_eigenvalues(cov):
        # rounding can leave nu a few ulps below 1 for pure modes
        total += thermal_entropy(max((nu - 1) / 2, 0.0))
    return total


def simon_separability(cov):
    """Partial-transpose test for two-mode Gaussian states.

    Flips the sign of ``p_d`` and returns the smallest eigenvalue of
    ``V_pt + i Omega`` together with a verdict; the state is inseparable
    when that witness is below ``-1e-10``.

    Returns:
        tuple: ``(witness, "separable" | "inseparable")``.
    """
    _check_physical(cov)
    P = np.diag([1.0, 1.0, 1.0, -1.0])
    V_pt = P @ cov.V @ P
    witness = float(np.linalg.eigvalsh(V_pt + 1j * OMEGA).min())
    return witness, ("inseparable" if witness < -PHYS_TOL else "separable")
