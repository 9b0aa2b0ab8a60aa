"""Spectral pulse profiles and the overlap scalars they produce with a device.

Every output-state quantity depends on the channel only through four
numbers: the amplitude overlap ``<eta|T eta>`` and the transmitted energy
fraction ``||T eta||^2`` for each of the two pulses. :class:`OverlapSet`
carries them.
"""

import csv
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .quadrature import adaptive_gauss_legendre

GAUSSIAN_SPAN = 8.0
QUAD_TOL = 1e-9


@dataclass(frozen=True)
class SpectralProfile:
    """Pulse spectrum ``eta(w)``, either an analytic Gaussian or tabulated.

    For the Gaussian, ``|eta|^2`` is a normal density with mean ``mid_freq``
    and standard deviation ``bandwidth``, times ``scale**2``. Tabulated
    profiles hold complex samples on a grid and integrate with the
    trapezoidal rule on that grid.
    """

    kind: str
    mid_freq: float = None
    bandwidth: float = None
    grid: np.ndarray = None
    amplitudes: np.ndarray = None
    scale: float = 1.0

    @classmethod
    def gaussian(cls, mid_freq, bandwidth):
        if not bandwidth > 0:
            raise DomainError(f"bandwidth must be > 0, got {bandwidth}")
        if not mid_freq > 0:
            raise DomainError(f"mid_freq must be > 0, got {mid_freq}")
        return cls("gaussian", mid_freq=float(mid_freq), bandwidth=float(bandwidth))

    @classmethod
    def tabulated(cls, grid, amplitudes):
        grid = np.asarray(grid, dtype=float)
        amps = np.asarray(amplitudes, dtype=complex)
        if grid.ndim != 1 or grid.size < 2 or not np.all(np.diff(grid) > 0):
            raise ValueError("profile grid must be strictly increasing with >= 2 samples")
        if amps.shape != grid.shape:
            raise ValueError("amplitudes must match the grid")
        if grid[0] <= 0:
            raise DomainError("profile support must lie at positive frequencies")
        grid.setflags(write=False)
        amps.setflags(write=False)
        return cls("tabulated", grid=grid, amplitudes=amps)

    @classmethod
    def from_csv(cls, path):
        """Read columns ``omega, re_eta, im_eta``."""
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        try:
            grid = [float(r["omega"]) for r in rows]
            amps = [complex(float(r["re_eta"]), float(r["im_eta"])) for r in rows]
        except KeyError as exc:
            raise ValueError(f"{path}: missing column {exc.args[0]}") from None
        return cls.tabulated(grid, amps)

    @property
    def domain(self):
        """Quadrature interval ``(w_min, w_max)``."""
        if self.kind == "tabulated":
            return float(self.grid[0]), float(self.grid[-1])
        half = GAUSSIAN_SPAN * self.bandwidth
        return max(self.mid_freq - half, 0.0), self.mid_freq + half

    def __call__(self, omega):
        w = np.asarray(omega, dtype=float)
        if self.kind == "gaussian":
            s = self.bandwidth
            amp = (2 * np.pi * s**2) ** -0.25 * np.exp(-((w - self.mid_freq) ** 2) / (4 * s**2))
            return self.scale * amp
        re = np.interp(w, self.grid, self.amplitudes.real, left=0.0, right=0.0)
        im = np.interp(w, self.grid, self.amplitudes.imag, left=0.0, right=0.0)
        return self.scale * (re + 1j * im)


def _integrate(profile, weight, tol=QUAD_TOL, order=16):
    """Integral of ``weight(w) * |eta(w)|^2`` over the profile domain."""
    if profile.kind == "tabulated":
        w = profile.grid
        vals = weight(w) * np.abs(profile(w)) ** 2
        return np.trapezoid(vals, w), 0.0
    lo, hi = profile.domain

    def integrand(w):
        w = np.where(w > 0, w, np.finfo(float).tiny)
        return weight(w) * np.abs(profile(w)) ** 2

    return adaptive_gauss_legendre(integrand, lo, hi, tol=tol, order=order)


def norm_sq(profile):
    """Quadrature value of ``int |eta|^2 dw``."""
    value, _ = _integrate(profile, lambda w: np.ones_like(w))
    return float(np.real(value))


def normalize(profile):
    """Rescale a profile to unit norm under its own quadrature rule."""
    n2 = norm_sq(profile)
    if not n2 > 0:
        raise DomainError("cannot normalize a zero profile")
    if profile.kind == "tabulated":
        amps = np.asarray(profile.amplitudes) * (profile.scale / np.sqrt(n2))
        return SpectralProfile.tabulated(profile.grid, amps)
    return replace(profile, scale=profile.scale / np.sqrt(n2))


def overlap_with_response(profile, response, return_error=False, order=16):
    """``<eta|resp eta> = int |eta(w)|^2 resp(w) dw``.

    ``response`` maps a frequency array to complex values. With
    ``return_error`` the quadrature error estimate is returned as well.
    """
    value, err = _integrate(profile, lambda w: np.asarray(response(w), dtype=complex), order=order)
    value = complex(value)
    return (value, err) if return_error else value


def weighted_norm_sq(profile, response, return_error=False, order=16):
    """``||resp eta||^2 = int |resp(w)|^2 |eta(w)|^2 dw``."""
    value, err = _integrate(profile, lambda w: np.abs(response(w)) ** 2, order=order)
    value = float(np.real(value))
    return (value, err) if return_error else value


@dataclass(frozen=True)
class OverlapSet:
    """Overlap scalars of the two channels (``_T``: pulse a, ``_Tt``: pulse d)."""

    ov_T: complex
    n2_T: float
    ov_Tt: complex
    n2_Tt: float

    def __post_init__(self):
        for ov, n2, tag in ((self.ov_T, self.n2_T, "T"), (self.ov_Tt, self.n2_Tt, "Tt")):
            if not -1e-12 <= n2 <= 1 + 1e-12:
                raise DomainError(f"n2_{tag} = {n2} outside [0, 1]")
            if abs(ov) ** 2 > n2 + 1e-9:
                raise DomainError(f"|ov_{tag}|^2 = {abs(ov) ** 2} exceeds n2_{tag} = {n2}")

    @classmethod
    def flat(cls, t=1.0, t_tilde=1.0):
        """Overlaps of frequency-independent amplitude transmittances."""
        t, tt = complex(t), complex(t_tilde)
        return cls(t, abs(t) ** 2, tt, abs(tt) ** 2)

    @property
    def product(self):
        return self.ov_T * self.ov_Tt


def channel_overlaps(profile, response):
    """``(<eta|resp eta>, ||resp eta||^2)`` for one normalized profile."""
    return overlap_with_response(profile, response), weighted_norm_sq(profile, response)


def overlap_set(profile_a, response_a, profile_d, response_d):
    """OverlapSet from full quadrature on both channels."""
    ov_a, n2_a = channel_overlaps(profile_a, response_a)
    ov_d, n2_d = channel_overlaps(profile_d, response_d)
    return OverlapSet(ov_a, min(n2_a, 1.0), ov_d, min(n2_d, 1.0))


def narrowband_overlaps(response_a, response_d, omega_f, omega_f_tilde):
    """Overlaps with each response frozen at the pulse mid-frequency."""
    t = complex(response_a(omega_f))
    tt = complex(response_d(omega_f_tilde))
    return OverlapSet(t, min(abs(t) ** 2, 1.0), tt, min(abs(tt) ** 2, 1.0))
