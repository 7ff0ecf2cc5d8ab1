"""Finite-temperature, nonsecular Bloch-Redfield generator.

The site dephasers are decomposed into eigenoperators of the chain
Hamiltonian; each frequency component is weighted by a noise-power
spectrum S(w) = (N_BE(w, beta) + Theta(w)) * J(w), so downward transitions
(w > 0) carry stimulated plus spontaneous emission while upward ones carry
absorption only.  Baths are independent per site (S_mn diagonal).  The
pump/trap dissipators are shared, temperature-independent, with the
Lindblad module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .chain import eigendecomposition
from .lindblad import (
    Liouvillian,
    TransportSpec,
    build_operator_set,
    dissipator,
    static_superoperator,
)


@dataclass(frozen=True)
class FlatSpectralDensity:
    """Frequency-independent spectral density J(w) = J0."""

    magnitude: float = 1.0

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError("magnitude must be >= 0")

    def value(self, omega: float) -> float:
        return self.magnitude

    def zero_frequency_noise(self, beta: float) -> float:
        # N_BE diverges as w -> 0 for a flat spectrum; the w = 0 channel is
        # pinned to the pure-dephasing rate J0 so the Lindblad limit is
        # recovered.
        return self.magnitude


@dataclass(frozen=True)
class DrudeLorentzSpectralDensity:
    """Ohmic spectral density with Lorentzian cutoff.

    J(w) = coupling * (2/pi) * w * linewidth / (w^2 + linewidth^2),
    peaked at w = linewidth with peak value coupling/pi.
    """

    coupling: float
    linewidth: float

    def __post_init__(self):
        if self.coupling < 0:
            raise ValueError("coupling must be >= 0")
        if self.linewidth <= 0:
            raise ValueError("linewidth must be > 0")

    def value(self, omega: float) -> float:
        omega = abs(omega)
        return (
            self.coupling
            * (2.0 / np.pi)
            * omega
            * self.linewidth
            / (omega**2 + self.linewidth**2)
        )

    def zero_frequency_noise(self, beta: float) -> float:
        # lim_{w->0} N_BE(w) J(w) = (2/pi) * coupling / (linewidth * beta)
        return 2.0 * self.coupling / (np.pi * self.linewidth * beta)


SpectralDensity = FlatSpectralDensity | DrudeLorentzSpectralDensity


@dataclass(frozen=True)
class BathSpec:
    """Thermal environment: inverse temperature and spectral density."""

    inverse_temperature: float
    spectral_density: SpectralDensity = FlatSpectralDensity(1.0)

    def __post_init__(self):
        if self.inverse_temperature <= 0:
            raise ValueError("inverse_temperature must be > 0")


def bose_einstein(omega: float, beta: float) -> float:
    """Bose-Einstein occupation at |omega|; clamps the overflow tail to 0."""
    x = beta * abs(omega)
    if x > 700:
        return 0.0
    return 1.0 / np.expm1(x)


def noise_power(omega: float, bath: BathSpec) -> float:
    """Thermal noise-power spectrum S(w).

    w > 0: (N_BE + 1) J(w)  (phonon emission, downward transitions)
    w < 0:  N_BE(|w|) J(|w|) (absorption, upward transitions)
    w = 0: spectral-density-specific limit (pure-dephasing channel).
    """
    beta = bath.inverse_temperature
    density = bath.spectral_density
    if omega == 0:
        return density.zero_frequency_noise(beta)
    occupation = bose_einstein(omega, beta)
    if omega > 0:
        return (occupation + 1.0) * density.value(omega)
    return occupation * density.value(-omega)


def drude_lorentz(omega: float, coupling: float, linewidth: float) -> float:
    """Drude-Lorentz spectral density, extended evenly in |w|."""
    return DrudeLorentzSpectralDensity(coupling, linewidth).value(omega)


@dataclass(frozen=True)
class EigenOperatorSet:
    """Frequency components of one site dephaser in the eigenbasis.

    ``frequencies[k]`` is the eigenenergy splitting E_b - E_a carried by
    ``operators[k]`` (expressed back in the site basis, trap row/column
    zero when present).  Components at -w are the adjoints of those at +w,
    and the components sum to the original operator.
    """

    frequencies: np.ndarray
    operators: tuple[np.ndarray, ...]


def _bin_frequencies(gaps: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Map each gap to a representative value, grouping within ``tol``."""
    order = np.argsort(gaps)
    representative = np.empty_like(gaps)
    current = None
    for idx in order:
        value = gaps[idx]
        if current is None or value - current > tol:
            current = value
        representative[idx] = current
    return representative


def eigenoperator_decomposition(
    h: np.ndarray, operators: list[np.ndarray], tol: float = 1e-9
) -> list[EigenOperatorSet]:
    """Decompose site-basis operators into Hamiltonian eigenoperators.

    A(w) = sum over eigenpairs (a, b) with E_b - E_a = w of P_a A P_b;
    splittings are binned with absolute tolerance ``tol``.  ``h`` is the
    full chain Hamiltonian (trap level included when the operators carry
    one); the decomposition acts on the N-site block, and the trap
    row/column of every component stays zero.
    """
    dim = operators[0].shape[0]
    energies, vectors = eigendecomposition(h)
    n = energies.size

    gaps = np.subtract.outer(energies, energies) * -1.0  # (a, b) -> E_b - E_a
    binned = _bin_frequencies(gaps.reshape(-1), tol).reshape(n, n)

    results = []
    for a_full in operators:
        a_site = a_full[:n, :n]
        a_eig = vectors.conj().T @ a_site @ vectors
        frequencies = np.unique(binned)
        components = []
        for omega in frequencies:
            mask = binned == omega
            comp_eig = np.where(mask, a_eig, 0.0)
            comp_site = vectors @ comp_eig @ vectors.conj().T
            comp = np.zeros((dim, dim), dtype=complex)
            comp[:n, :n] = comp_site
            components.append(comp)
        results.append(EigenOperatorSet(frequencies, tuple(components)))
    return results


def bath_superoperator(h: np.ndarray, bath: BathSpec, include_trap: bool = True) -> sp.csr_matrix:
    """Unit-coupling thermal dissipator (multiply by Gamma).

    Sum over sites m and splittings w of S(w) D[A_m(w)] with the site
    dephasers decomposed in the chain eigenbasis; site baths are
    uncorrelated, so cross-site terms vanish.  Assembled densely in the
    eigenbasis and transformed back to the site basis.
    """
    energies, vectors = eigendecomposition(h)
    n = energies.size
    dim = n + 1 if include_trap else n
    gaps = np.subtract.outer(energies, energies) * -1.0  # (a, b) -> E_b - E_a
    binned = _bin_frequencies(gaps.reshape(-1)).reshape(n, n)
    frequencies = np.unique(binned)

    eye = np.eye(n)
    # Site dephasers 2|m><m| - I expressed in the eigenbasis.
    dephasers_eig = [
        2.0 * np.outer(vectors[m].conj(), vectors[m]) - eye for m in range(n)
    ]

    sandwich_eig = np.zeros((n * n, n * n), dtype=complex)
    damping_eig = np.zeros((n, n), dtype=complex)
    for a_eig in dephasers_eig:
        for omega in frequencies:
            weight = noise_power(float(omega), bath)
            if weight == 0.0:
                continue
            component = np.where(binned == omega, a_eig, 0.0)
            if not component.any():
                continue
            sandwich_eig += weight * np.kron(component.conj(), component)
            damping_eig += weight * (component.conj().T @ component)

    # vec(rho_site) = (conj(V) kron V) vec(rho_eig)
    basis_map = np.kron(vectors.conj(), vectors)
    sandwich_site = basis_map @ sandwich_eig @ basis_map.conj().T
    damping_site = vectors @ damping_eig @ vectors.conj().T

    if not include_trap:
        eye_site = np.eye(n)
        total = sandwich_site - 0.5 * (
            np.kron(eye_site, damping_site) + np.kron(damping_site.T, eye_site)
        )
        return sp.csr_matrix(total)

    # The sandwich term lives on the site block, but the damping term also
    # decays site-trap coherences, so it is embedded at full dimension.
    full = np.zeros((dim * dim, dim * dim), dtype=complex)
    site_vec = (np.arange(n)[:, None] + dim * np.arange(n)[None, :]).reshape(-1, order="F")
    full[np.ix_(site_vec, site_vec)] = sandwich_site
    damping_full = np.zeros((dim, dim), dtype=complex)
    damping_full[:n, :n] = damping_site
    eye_full = np.eye(dim)
    full -= 0.5 * (np.kron(eye_full, damping_full) + np.kron(damping_full.T, eye_full))
    return sp.csr_matrix(full)


def build_redfield_liouvillian(
    h: np.ndarray,
    gamma: float,
    bath: BathSpec,
    transport: TransportSpec,
) -> Liouvillian:
    """Full finite-temperature generator: coherent + pump/trap + thermal bath."""
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    n_sites = h.shape[0] - 1
    include_trap = not (transport.closed and transport.injection_site is None)
    static = static_superoperator(h, transport)
    matrix = static
    if gamma > 0:
        matrix = static + gamma * bath_superoperator(h, bath, include_trap)
    dim = n_sites + 1 if include_trap else n_sites
    return Liouvillian(matrix.tocsr(), dim, n_sites, transport)
