import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pulsecorr.device_response import (
    DeviceResponse,
    LorentzParams,
    absorption_matrix,
    lambda_matrix,
    lorentz_permittivity,
    refractive_index,
    slab_coefficients,
    slab_transfer_matrix,
)
from pulsecorr.errors import DomainError

FIG4 = LorentzParams(eps_s=1.5, gamma_ratio=0.01, thickness=2.0)


def half_angle_sqrt(z):
    """Square root with Im >= 0 from the half-angle identities."""
    mod = abs(z)
    re = np.sqrt((mod + z.real) / 2)
    im = np.sqrt((mod - z.real) / 2)
    return complex(re, im if z.imag >= 0 else -im) if z.imag >= 0 else complex(-re, im)


def characteristic_matrix_slab(omega, params):
    """Single-layer transfer-matrix (characteristic matrix) oracle.

    Fields (E, H) across the layer obey [E0, H0] = M [E1, H1] with
    M = [[cos d, -i sin d / n], [-i n sin d, cos d]], d = n w L, under the
    exp(-i w t) convention. Vacuum on both sides.
    """
    n = complex(refractive_index(lorentz_permittivity(omega, params)))
    d = n * omega * params.thickness
    m11, m12 = np.cos(d), -1j * np.sin(d) / n
    m21, m22 = -1j * n * np.sin(d), np.cos(d)
    den = m11 + m12 + m21 + m22
    t = 2 / den
    r = (m11 + m12 - m21 - m22) / den
    return t, r


class TestPermittivity:
    def test_static_limit(self):
        assert lorentz_permittivity(0.0, LorentzParams(1.5, 0.01, 1)) == pytest.approx(1.5 + 0j, abs=1e-15)

    def test_on_resonance(self):
        eps = lorentz_permittivity(1.0, FIG4)
        assert eps == pytest.approx(1 + 25j, abs=1e-12)

    def test_high_frequency_transparency(self):
        assert abs(lorentz_permittivity(1e6, FIG4) - 1) < 1e-9

    def test_undamped_pole_is_domain_error(self):
        with pytest.raises(DomainError):
            lorentz_permittivity(1.0, LorentzParams(1.5, 0.0, 1))

    def test_negative_frequency_rejected(self):
        with pytest.raises(DomainError):
            lorentz_permittivity(-0.1, FIG4)

    @pytest.mark.parametrize("gamma", [0.0, 1e-3, 0.01, 0.3])
    def test_absorbing_sign(self, gamma):
        w = np.linspace(0, 5, 1001)
        w = w[np.abs(w - 1) > 1e-9]
        eps = lorentz_permittivity(w, LorentzParams(2.0, gamma, 1))
        assert np.all(eps.imag >= 0)
        assert np.all(np.asarray(refractive_index(eps)).imag >= 0)

    def test_params_validation(self):
        with pytest.raises(DomainError):
            LorentzParams(0.5, 0.01, 1)
        with pytest.raises(DomainError):
            LorentzParams(1.5, -0.01, 1)
        with pytest.raises(DomainError):
            LorentzParams(1.5, 0.01, -1)


class TestRefractiveIndex:
    @pytest.mark.parametrize("eps, n", [(4, 2), (1, 1)])
    def test_trivial(self, eps, n):
        assert refractive_index(eps) == pytest.approx(n, abs=1e-15)

    def test_resonant_value(self):
        # half-angle formula: sqrt((|z| +- 1) / 2) with |z| = sqrt(626)
        expected = half_angle_sqrt(1 + 25j)
        assert refractive_index(1 + 25j) == pytest.approx(expected, abs=1e-12)
        assert refractive_index(1 + 25j) == pytest.approx(3.606937 + 3.465544j, abs=1e-6)

    @pytest.mark.parametrize("eps", [-4 + 0j, -4 + 1e-3j, 0.3 - 2j, -1 - 1j, 2 + 5j])
    def test_branch_and_square(self, eps):
        n = refractive_index(eps)
        assert n.imag >= 0
        assert n * n == pytest.approx(eps, abs=1e-12)


class TestSlab:
    def test_empty_slab(self):
        T, R = slab_coefficients(0.7, LorentzParams(1.5, 0.01, 0.0))
        assert T == 1 and R == 0

    @pytest.mark.parametrize("d", [0.5, 2.0, 7.3])
    def test_vacuum_slab_is_propagation_phase(self, d):
        T, R = slab_coefficients(1.3, LorentzParams(1.0, 0.0, d))
        assert T == pytest.approx(np.exp(1.3j * d), abs=1e-14)
        assert R == pytest.approx(0, abs=1e-14)

    def test_vacuum_reference_removes_free_phase(self):
        T, R = slab_coefficients(1.3, LorentzParams(1.0, 0.0, 2.0), phase_reference="vacuum")
        assert T == pytest.approx(1, abs=1e-14)
        T_faces, R_faces = slab_coefficients(0.8, FIG4)
        T_vac, R_vac = slab_coefficients(0.8, FIG4, phase_reference="vacuum")
        assert T_vac == pytest.approx(T_faces * np.exp(-0.8j * 2.0), abs=1e-15)
        assert R_vac == R_faces

    @pytest.mark.parametrize("omega", [0.2, 0.5, 0.95, 1.0, 1.07, 1.5, 2.2])
    @pytest.mark.parametrize("gamma", [0.0, 0.01, 0.2])
    def test_matches_characteristic_matrix(self, omega, gamma):
        params = LorentzParams(1.5, gamma, 2.0)
        if gamma == 0 and omega == 1.0:
            with pytest.raises(DomainError):
                slab_coefficients(omega, params)
            return
        T, R = slab_coefficients(omega, params)
        t, r = characteristic_matrix_slab(omega, params)
        assert T == pytest.approx(t, abs=1e-12)
        assert R == pytest.approx(r, abs=1e-12)

    def test_lossless_energy_conservation(self):
        params = LorentzParams(1.5, 0.0, 2.0)
        w = np.linspace(0.05, 3.0, 400)
        T, R = slab_coefficients(w, params)
        assert np.max(np.abs(np.abs(T) ** 2 + np.abs(R) ** 2 - 1)) < 1e-10

    @settings(max_examples=200, deadline=None)
    @given(
        w=st.floats(0.01, 5.0),
        eps_s=st.floats(1.0, 6.0),
        gamma=st.floats(1e-4, 0.5),
        d=st.floats(0.0, 10.0),
    )
    def test_passivity(self, w, eps_s, gamma, d):
        T, R = slab_coefficients(w, LorentzParams(eps_s, gamma, d))
        assert abs(T) ** 2 + abs(R) ** 2 <= 1 + 1e-12

    def test_resonance_dip_and_peak(self):
        w = np.linspace(0.2, 2.2, 4001)
        T, R = slab_coefficients(w, FIG4)
        assert 0.9 <= w[np.argmin(np.abs(T))] <= 1.1
        assert 0.9 <= w[np.argmax(np.abs(R))] <= 1.1

    def test_continuity_on_damped_grid(self):
        # Lipschitz constant estimated on a 16x finer grid, with 50% margin
        fine = np.linspace(0.2, 2.2, 16 * 400 + 1)
        Tf, Rf = slab_coefficients(fine, FIG4)
        h_fine = fine[1] - fine[0]
        L_T = np.max(np.abs(np.diff(np.abs(Tf)))) / h_fine
        L_R = np.max(np.abs(np.diff(np.abs(Rf)))) / h_fine
        grid = fine[::16]
        T, R = slab_coefficients(grid, FIG4)
        h = grid[1] - grid[0]
        assert np.max(np.abs(np.diff(np.abs(T)))) <= 1.5 * L_T * h
        assert np.max(np.abs(np.diff(np.abs(R)))) <= 1.5 * L_R * h

    def test_nonpositive_frequency(self):
        with pytest.raises(DomainError):
            slab_coefficients(0.0, FIG4)


class TestDeviceResponse:
    def test_kinds(self):
        slab = DeviceResponse.lorentz_slab(FIG4)
        assert slab.kind == "lorentz_slab"
        assert slab(0.5) == slab_coefficients(0.5, FIG4)
        flat = DeviceResponse.flat(0.6, 0.8j)
        assert flat(1.7) == (0.6, 0.8j)
        assert np.all(flat.transmission(np.array([0.1, 0.2])) == 0.6)

    def test_flat_rejects_gain(self):
        with pytest.raises(DomainError):
            DeviceResponse.flat(0.9, 0.9)

    def test_tabulated_interpolates_linearly(self, tmp_path):
        path = tmp_path / "dev.csv"
        path.write_text("omega,re_T,im_T,re_R,im_R\n1.0,0.5,0,0,0.1\n2.0,0.7,0.2,0.1,0.3\n")
        dev = DeviceResponse.from_csv(path)
        T, R = dev(1.25)
        assert T == pytest.approx(0.55 + 0.05j)
        assert R == pytest.approx(0.025 + 0.15j)
        with pytest.raises(DomainError):
            dev(2.5)

    def test_tabulated_rejects_gain(self):
        with pytest.raises(DomainError):
            DeviceResponse.tabulated([1, 2], [1, 1], [0.5, 0])

    def test_branch(self):
        dev = DeviceResponse.flat(0.6, 0.8)
        assert dev.branch("transmitted")(1.0) == 0.6
        assert dev.branch("reflected")(1.0) == 0.8
        with pytest.raises(ValueError):
            dev.branch("sideways")


def random_passive(rng):
    def haar():
        z = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / np.sqrt(2)
        q, r = np.linalg.qr(z)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    t = rng.uniform(0, 1, size=2)
    return haar() @ np.diag(t) @ haar().conj().T


class TestAbsorptionMatrix:
    def test_identity(self):
        assert np.allclose(absorption_matrix(np.eye(2)), 0, atol=1e-15)

    def test_zero(self):
        assert np.allclose(absorption_matrix(np.zeros((2, 2))), np.eye(2), atol=1e-15)

    def test_scalar(self):
        assert np.allclose(absorption_matrix(0.6 * np.eye(2)), 0.8 * np.eye(2), atol=1e-15)

    def test_random_completion(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            T = random_passive(rng)
            A = absorption_matrix(T)
            assert np.allclose(A, A.conj().T, atol=1e-14)
            assert np.linalg.eigvalsh(A).min() >= -1e-14
            resid = T @ T.conj().T + A @ A.conj().T - np.eye(2)
            assert np.abs(resid).max() < 1e-12

    def test_gain_rejected(self):
        with pytest.raises(DomainError):
            absorption_matrix(1.1 * np.eye(2))

    def test_slab_matrix(self):
        T = slab_transfer_matrix(1.02, FIG4)
        A = absorption_matrix(T)
        assert np.abs(T @ T.conj().T + A @ A.conj().T - np.eye(2)).max() < 1e-12


class TestLambdaMatrix:
    def test_scalar_case(self):
        m = lambda_matrix(0.6 * np.eye(2), 0.8 * np.eye(2))
        assert np.allclose(m.F, -0.8 * np.eye(2), atol=1e-14)
        assert np.allclose(m.G, 0.6 * np.eye(2), atol=1e-14)
        assert np.abs(m.Lambda @ m.Lambda.conj().T - np.eye(4)).max() < 1e-12
        assert m.singular_blocks == ()

    def test_lossless_limit(self):
        m = lambda_matrix(np.eye(2), np.zeros((2, 2)))
        assert np.allclose(m.Lambda, np.eye(4), atol=1e-14)
        assert m.singular_blocks == ("G",)

    def test_full_absorption_limit(self):
        m = lambda_matrix(np.zeros((2, 2)), np.eye(2))
        assert np.abs(m.Lambda @ m.Lambda.conj().T - np.eye(4)).max() < 1e-12
        assert m.singular_blocks == ("F",)

    def test_agrees_with_inverse_formula_when_regular(self):
        rng = np.random.default_rng(3)
        T = random_passive(rng)
        A = absorption_matrix(T)
        m = lambda_matrix(T, A)
        F_direct = -m.S @ np.linalg.inv(m.C) @ T
        G_direct = m.C @ np.linalg.inv(m.S) @ A
        assert np.allclose(m.F, F_direct, atol=1e-10)
        assert np.allclose(m.G, G_direct, atol=1e-10)
        assert np.allclose(m.C @ m.C + m.S @ m.S, np.eye(2), atol=1e-12)
        assert np.allclose(m.C @ m.S, m.S @ m.C, atol=1e-12)

    def test_random_unitarity(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            T = random_passive(rng)
            m = lambda_matrix(T, absorption_matrix(T))
            assert np.abs(m.Lambda @ m.Lambda.conj().T - np.eye(4)).max() < 1e-10

    def test_rank_deficient_transmission(self):
        T = np.array([[0.6, 0.0], [0.0, 0.0]])
        m = lambda_matrix(T, absorption_matrix(T))
        assert "F" in m.singular_blocks
        assert np.abs(m.Lambda @ m.Lambda.conj().T - np.eye(4)).max() < 1e-12

    def test_rejects_incomplete_pair(self):
        with pytest.raises(DomainError):
            lambda_matrix(0.6 * np.eye(2), 0.5 * np.eye(2))
