"""Frequency response of lossy four-port devices.

A device is described by its transmission and reflection coefficients
``T(w)`` and ``R(w)`` for light entering the first input port. Frequencies
are normalized to the medium resonance ``w0`` and lengths to ``c / w0``, so
a slab of thickness ``d`` imposes the phase ``n(w) * w * d``.

Besides the scalar coefficients, the module builds the 2x2 transformation
matrix of a symmetric slab, the absorption matrix that completes it to an
isometry, and the unitary 4x4 matrix acting on radiation plus device
excitations.
"""

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError

_DENOM_FLOOR = 1e-14
_PSD_TOL = 1e-10
_SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class LorentzParams:
    """Single-resonance Lorentz medium forming a homogeneous slab.

    Attributes:
        eps_s: static permittivity.
        gamma_ratio: damping constant in units of the resonance frequency.
        thickness: slab thickness in units of ``c / w0``.
    """

    eps_s: float
    gamma_ratio: float
    thickness: float

    def __post_init__(self):
        if not self.eps_s >= 1:
            raise DomainError(f"eps_s must be >= 1, got {self.eps_s}")
        if not self.gamma_ratio >= 0:
            raise DomainError(f"gamma_ratio must be >= 0, got {self.gamma_ratio}")
        if not self.thickness >= 0:
            raise DomainError(f"thickness must be >= 0, got {self.thickness}")


def lorentz_permittivity(omega, params):
    """Complex Lorentz permittivity at normalized frequency ``omega``.

    Accepts scalars or arrays. Raises :class:`DomainError` for negative
    frequencies and for the undamped pole at ``omega == 1``.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("frequency must be non-negative")
    denom = 1.0 - w**2 - 2j * params.gamma_ratio * w
    if np.any(np.abs(denom) == 0):
        raise DomainError("undamped Lorentz pole at omega = w0")
    eps = 1.0 + (params.eps_s - 1.0) / denom
    return eps if eps.ndim else complex(eps)


def refractive_index(eps):
    """Square root of ``eps`` on the absorbing branch (``Im n >= 0``)."""
    e = np.asarray(eps, dtype=complex)
    if np.any(e == 0):
        raise DomainError("refractive index undefined for eps = 0")
    n = np.sqrt(e)
    # principal root has Re n >= 0; flip only where that leaves Im n < 0
    n = np.where(n.imag < 0, -n, n)
    return n if n.ndim else complex(n)


def slab_coefficients(omega, params, phase_reference="faces"):
    """Airy transmission and reflection of a slab in vacuum at normal incidence.

    With ``phase_reference="faces"`` phases are referred to the two slab
    faces, so ``thickness = 0`` gives ``(1, 0)`` exactly and an empty
    (``eps = 1``) slab gives ``T = exp(i w d)``. With ``"vacuum"`` the
    transmission is divided by ``exp(i w d)``, i.e. measured against free
    propagation over the same length; ``R`` is unaffected.

    Args:
        omega: normalized frequency (scalar or array), strictly positive.
        params: :class:`LorentzParams` of the slab.
        phase_reference: ``"faces"`` or ``"vacuum"``.

    Returns:
        tuple: complex ``(T, R)`` with the shape of ``omega``.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise DomainError("slab coefficients need omega > 0")
    if params.thickness == 0:
        # complex division x / x is not exactly 1 in floating point
        T, R = np.ones_like(w, dtype=complex), np.zeros_like(w, dtype=complex)
        return (complex(T), complex(R)) if T.ndim == 0 else (T, R)
    n = np.asarray(refractive_index(lorentz_permittivity(w, params)))
    beta = n * w * params.thickness
    r1 = (1 - n) / (1 + n)
    phase = np.exp(1j * beta)
    denom = 1 - r1**2 * phase**2
    if np.any(np.abs(denom) < _DENOM_FLOOR):
        raise DomainError("slab resonance with vanishing Airy denominator")
    T = (1 - r1**2) * phase / denom
    R = r1 * (1 - phase**2) / denom
    if phase_reference == "vacuum":
        T = T * np.exp(-1j * w * params.thickness)
    elif phase_reference != "faces":
        raise ValueError(f"unknown phase reference {phase_reference!r}")
    if T.ndim == 0:
        return complex(T), complex(R)
    return T, R


@dataclass(frozen=True)
class DeviceResponse:
    """Per-frequency ``(T, R)`` of a four-port device.

    Build instances with :meth:`lorentz_slab`, :meth:`flat`,
    :meth:`tabulated` or :meth:`from_csv`.
    """

    kind: str
    evaluator: Callable = field(repr=False, compare=False)
    params: object = None

    def __call__(self, omega):
        return self.evaluator(omega)

    def transmission(self, omega):
        return self.evaluator(omega)[0]

    def reflection(self, omega):
        return self.evaluator(omega)[1]

    def branch(self, name):
        """Scalar response of one output port, ``"transmitted"`` or ``"reflected"``."""
        if name == "transmitted":
            return self.transmission
        if name == "reflected":
            return self.reflection
        raise ValueError(f"unknown branch {name!r}")

    @classmethod
    def lorentz_slab(cls, params, phase_reference="faces"):
        if phase_reference not in ("faces", "vacuum"):
            raise ValueError(f"unknown phase reference {phase_reference!r}")
        return cls(
            "lorentz_slab",
            lambda w: slab_coefficients(w, params, phase_reference),
            params,
        )

    @classmethod
    def flat(cls, t, r=0.0):
        t, r = complex(t), complex(r)
        if abs(t) ** 2 + abs(r) ** 2 > 1 + 1e-12:
            raise DomainError("flat response violates passivity |t|^2 + |r|^2 <= 1")

        def evaluate(w):
            w = np.asarray(w, dtype=float)
            if w.ndim == 0:
                return t, r
            return np.full(w.shape, t), np.full(w.shape, r)

        return cls("flat", evaluate, (t, r))

    @classmethod
    def identity(cls):
        return cls.flat(1.0, 0.0)

    @classmethod
    def tabulated(cls, omega, T, R):
        """Linear interpolation between sampled coefficients.

        Evaluation outside the sampled range raises :class:`DomainError`.
        """
        grid = np.asarray(omega, dtype=float)
        T = np.asarray(T, dtype=complex)
        R = np.asarray(R, dtype=complex)
        if grid.ndim != 1 or grid.size < 2 or not np.all(np.diff(grid) > 0):
            raise ValueError("tabulated grid must be strictly increasing with >= 2 samples")
        if T.shape != grid.shape or R.shape != grid.shape:
            raise ValueError("T and R must match the frequency grid")
        if np.any(np.abs(T) ** 2 + np.abs(R) ** 2 > 1 + 1e-12):
            raise DomainError("tabulated response is not passive")

        def interp(values, w):
            return np.interp(w, grid, values.real) + 1j * np.interp(w, grid, values.imag)

        def evaluate(w):
            w = np.asarray(w, dtype=float)
            if np.any(w < grid[0]) or np.any(w > grid[-1]):
                raise DomainError(
                    f"frequency outside tabulated range [{grid[0]}, {grid[-1]}]"
                )
            t, r = interp(T, w), interp(R, w)
            if t.ndim == 0:
                return complex(t), complex(r)
            return t, r

        return cls("tabulated", evaluate, (grid, T, R))

    @classmethod
    def from_csv(cls, path):
        """Read columns ``omega, re_T, im_T, re_R, im_R`` from a CSV file."""
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ValueError(f"{path}: no data rows")
        try:
            omega = [float(r["omega"]) for r in rows]
            T = [complex(float(r["re_T"]), float(r["im_T"])) for r in rows]
            R = [complex(float(r["re_R"]), float(r["im_R"])) for r in rows]
        except KeyError as exc:
            raise ValueError(f"{path}: missing column {exc.args[0]}") from None
        return cls.tabulated(omega, T, R)


def slab_transfer_matrix(omega, params):
    """2x2 transformation matrix ``[[T, R], [R, T]]`` of a symmetric slab."""
    T, R = slab_coefficients(float(omega), params)
    return np.array([[T, R], [R, T]])


def _hermitian_sqrt(H):
    w, U = np.linalg.eigh(H)
    return (U * np.sqrt(np.clip(w, 0, None))) @ U.conj().T


def absorption_matrix(T_mat):
    """Hermitian absorption matrix ``A = sqrt(I - T T^+)``.

    Raises:
        DomainError: if ``I - T T^+`` has an eigenvalue below ``-1e-10``,
            i.e. the device would amplify.
    """
    T_mat = np.asarray(T_mat, dtype=complex)
    H = np.eye(2) - T_mat @ T_mat.conj().T
    H = (H + H.conj().T) / 2
    if np.linalg.eigvalsh(H).min() < -_PSD_TOL:
        raise DomainError("I - T T^+ is not positive semidefinite (non-passive device)")
    return _hermitian_sqrt(H)


@dataclass(frozen=True)
class FourPortMatrices:
    """Blocks of the unitary 4x4 matrix ``[[T, A], [F, G]]``.

    ``singular_blocks`` names the blocks (``"F"``, ``"G"``) whose inverse
    factor was singular, so they were fixed by the unitary polar completion.
    """

    T: np.ndarray
    A: np.ndarray
    F: np.ndarray
    G: np.ndarray
    C: np.ndarray
    S: np.ndarray
    Lambda: np.ndarray
    singular_blocks: tuple = ()


def _polar_unitary(M):
    # unitary factor U of M = sqrt(M M^+) U; arbitrary but fixed on the kernel
    W, _, Vh = np.linalg.svd(M)
    return W @ Vh


def lambda_matrix(T_mat, A_mat):
    """Assemble the unitary matrix mixing radiation and device excitations.

    ``F = -S C^-1 T`` and ``G = C S^-1 A`` with ``C = sqrt(T T^+)`` and
    ``S = sqrt(A A^+)``. Because ``C^-1 T`` and ``S^-1 A`` are the unitary
    polar factors of ``T`` and ``A`` whenever the inverses exist, the blocks
    are evaluated as ``F = -S U_T`` and ``G = C U_A``; this form stays
    unitary when ``C`` or ``S`` is singular.
    """
    T_mat = np.asarray(T_mat, dtype=complex)
    A_mat = np.asarray(A_mat, dtype=complex)
    resid = T_mat @ T_mat.conj().T + A_mat @ A_mat.conj().T - np.eye(2)
    if np.abs(resid).max() > 1e-10:
        raise DomainError("T T^+ + A A^+ != I; matrices do not describe a device in vacuum")
    C = _hermitian_sqrt(T_mat @ T_mat.conj().T)
    S = _hermitian_sqrt(A_mat @ A_mat.conj().T)
    singular = []
    if np.linalg.svd(C, compute_uv=False).min() < _SINGULAR_TOL:
        singular.append("F")
    if np.linalg.svd(S, compute_uv=False).min() < _SINGULAR_TOL:
        singular.append("G")
    F = -S @ _polar_unitary(T_mat)
    G = C @ _polar_unitary(A_mat)
    Lam = np.block([[T_mat, A_mat], [F, G]])
    return FourPortMatrices(T_mat, A_mat, F, G, C, S, Lam, tuple(singular))
