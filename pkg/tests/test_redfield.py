import numpy as np
import pytest

from enaqt.chain import ChainSpec, build_chain, build_hamiltonian, eigendecomposition
from enaqt.lindblad import (
    TransportSpec,
    build_liouvillian,
    build_operator_set,
    steady_state,
)
from enaqt.redfield import (
    BathSpec,
    DrudeLorentzSpectralDensity,
    FlatSpectralDensity,
    build_redfield_liouvillian,
    drude_lorentz,
    eigenoperator_decomposition,
    noise_power,
)

FLAT = BathSpec(1.0, FlatSpectralDensity(1.0))


class TestEigenOperators:
    def test_single_site_is_single_zero_frequency(self):
        h = build_hamiltonian([0.0])
        ops = build_operator_set(1)
        [eigen_set] = eigenoperator_decomposition(h, [ops.dephasers[0]])
        assert eigen_set.frequencies.tolist() == [0.0]
        assert np.allclose(eigen_set.operators[0], ops.dephasers[0])

    def test_completeness(self):
        h = build_chain(ChainSpec(7, 0.2, 0.9, seed=3))
        ops = build_operator_set(7)
        for a, eigen_set in zip(
            ops.dephasers, eigenoperator_decomposition(h, list(ops.dephasers))
        ):
            total = sum(eigen_set.operators)
            assert np.abs(total - a).max() < 1e-10

    def test_adjoint_pairing(self):
        h = build_chain(ChainSpec(5, 0.0, 0.6, seed=1))
        ops = build_operator_set(5)
        [eigen_set] = eigenoperator_decomposition(h, [ops.dephasers[2]])
        freq_map = {round(f, 9): op for f, op in zip(eigen_set.frequencies, eigen_set.operators)}
        for f, op in freq_map.items():
            partner = freq_map.get(round(-f, 9))
            assert partner is not None
            assert np.abs(partner - op.conj().T).max() < 1e-10

    def test_degenerate_dimer_frequencies(self):
        # eigenvalues +-J: splittings 0 and +-2J
        h = build_hamiltonian([0.0, 0.0])
        ops = build_operator_set(2)
        [eigen_set] = eigenoperator_decomposition(h, [ops.dephasers[0]])
        assert np.allclose(sorted(eigen_set.frequencies), [-2.0, 0.0, 2.0], atol=1e-9)


class TestNoisePower:
    def test_zero_temperature_emission_only(self):
        cold = BathSpec(1e8, FlatSpectralDensity(1.0))
        assert noise_power(1.0, cold) == pytest.approx(1.0)
        assert noise_power(-1.0, cold) == pytest.approx(0.0)

    def test_unit_temperature_value(self):
        assert noise_power(1.0, FLAT) == pytest.approx(1.0 / (np.e - 1.0) + 1.0)

    def test_detailed_balance_ratio(self):
        for beta in (0.1, 1.0, 10.0):
            bath = BathSpec(beta, FlatSpectralDensity(1.0))
            for omega in (0.3, 1.0, 2.7):
                ratio = noise_power(-omega, bath) / noise_power(omega, bath)
                assert ratio == pytest.approx(np.exp(-beta * omega), abs=1e-10)

    def test_high_temperature_ratio_near_one(self):
        bath = BathSpec(0.1, FlatSpectralDensity(1.0))
        for omega in (0.2, 0.5, 1.0):
            ratio = noise_power(-omega, bath) / noise_power(omega, bath)
            assert 0.9 <= ratio <= 1.0

    def test_flat_zero_frequency_channel(self):
        assert noise_power(0.0, FLAT) == pytest.approx(1.0)

    def test_invalid_bath(self):
        with pytest.raises(ValueError):
            BathSpec(0.0)


class TestDrudeLorentz:
    def test_peak_value(self):
        assert drude_lorentz(2.0, 3.0, 2.0) == pytest.approx(3.0 / np.pi)

    def test_zero_at_origin(self):
        assert drude_lorentz(0.0, 1.0, 1.0) == pytest.approx(0.0)

    def test_monotone_tail(self):
        omegas = np.linspace(1.0, 50.0, 60)
        values = [drude_lorentz(w, 1.0, 1.0) for w in omegas]
        assert np.all(np.diff(values) < 0)

    def test_even_extension(self):
        assert drude_lorentz(-1.3, 2.0, 0.7) == pytest.approx(drude_lorentz(1.3, 2.0, 0.7))

    def test_zero_frequency_noise_limit(self):
        density = DrudeLorentzSpectralDensity(2.0, 0.5)
        beta = 2.0
        # numerical limit of N_BE(w) J(w) as w -> 0
        w = 1e-8
        numeric = density.value(w) / np.expm1(beta * w)
        assert density.zero_frequency_noise(beta) == pytest.approx(numeric, rel=1e-6)


class TestRedfieldGenerator:
    def test_gamma_zero_matches_lindblad(self):
        h = build_chain(ChainSpec(6, 0.1, 0.5, seed=3))
        transport = TransportSpec(0.0, 3.0)
        redfield = build_redfield_liouvillian(h, 0.0, FLAT, transport)
        lindblad = build_liouvillian(h, transport)
        assert (redfield.matrix - lindblad.matrix).nnz == 0

    def test_trace_preservation(self):
        h = build_chain(ChainSpec(5, 0.0, 0.8, seed=2))
        liou = build_redfield_liouvillian(h, 0.4, FLAT, TransportSpec(0.0))
        ones = np.zeros(liou.dim**2)
        ones[np.arange(liou.dim) * (liou.dim + 1)] = 1.0
        assert np.abs(ones @ liou.matrix.toarray()).max() < 1e-10

    def test_steady_state_contract_with_pump_and_trap(self):
        for seed in range(4):
            h = build_chain(ChainSpec(5, 0.1, 0.7, seed=seed))
            spec = TransportSpec(0.0, 3.0)
            rho = steady_state(build_redfield_liouvillian(h, 0.3, FLAT, spec))
            assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
            assert np.linalg.norm(rho - rho.conj().T) < 1e-10
            assert np.linalg.eigvalsh(rho).min() > -1e-6
            outflux = spec.trap_rate * rho[4, 4].real
            influx = spec.injection_rate(5) * 5 * rho[5, 5].real
            assert outflux == pytest.approx(influx, abs=1e-8)

    def test_weak_coupling_thermalization(self):
        # closed chain, weak coupling: eigenbasis populations approach Gibbs
        h = build_chain(ChainSpec(6, 0.0, 0.5, seed=11))
        beta = 1.0
        bath = BathSpec(beta, FlatSpectralDensity(1.0))
        liou = build_redfield_liouvillian(h, 1e-2, bath, TransportSpec(0.0, trap_rate=0.0))
        rho = steady_state(liou)
        energies, vectors = eigendecomposition(h)
        populations = np.real(np.diag(vectors.conj().T @ rho @ vectors))
        gibbs = np.exp(-beta * energies)
        gibbs /= gibbs.sum()
        assert np.abs(populations - gibbs).max() / gibbs.max() < 0.05
        assert np.allclose(populations, gibbs, rtol=0.05)

    def test_negative_gamma_rejected(self):
        h = build_chain(ChainSpec(3))
        with pytest.raises(ValueError):
            build_redfield_liouvillian(h, -0.1, FLAT, TransportSpec(0.0))

    def test_drude_lorentz_bath_runs(self):
        h = build_chain(ChainSpec(4, 0.0, 0.4, seed=5))
        bath = BathSpec(1.0, DrudeLorentzSpectralDensity(1.0, 1.0))
        spec = TransportSpec(0.0, 3.0)
        rho = steady_state(build_redfield_liouvillian(h, 0.5, bath, spec))
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
