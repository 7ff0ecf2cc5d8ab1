"""Pure-dephasing Lindblad master equation with extraction and re-injection.

The chain couples to three kinds of environment channels: site-local
dephasers A_i = 2|i><i| - I (identity on the site block), an extractor
|trap><N| that moves population from the last site onto the trap shelf,
and injectors |i><trap| that return it to the chain.  Density matrices are
column-vectorized; Liouvillians are sparse superoperators acting on those
vectors.

When the trap rate is zero and no injection is requested the model is a
closed chain and all operators are built on the N-site block alone (the
trap level would otherwise be trivially decoupled and make the steady
state degenerate).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import spsolve


class SteadyStateError(Exception):
    """Base class for steady-state solver failures."""


class NonUniqueSteadyState(SteadyStateError):
    """The Liouvillian null space has dimension > 1."""


class SolverFailure(SteadyStateError):
    """The linear solve did not produce a valid steady state."""


class PropagationError(Exception):
    """Time integration failed (step-size underflow or divergence)."""


@dataclass(frozen=True)
class TransportSpec:
    """Rates and injection scheme for the open-chain transport setup.

    ``injection_site=None`` re-injects onto all sites with per-site rate
    trap_rate/N; a 1-based site index injects the full trap_rate onto that
    single site.  ``trap_rate=0`` with all-sites injection describes a
    closed chain.
    """

    dephasing_rate: float
    trap_rate: float = 3.0
    injection_site: int | None = None

    def __post_init__(self):
        if self.dephasing_rate < 0:
            raise ValueError(f"dephasing_rate must be >= 0, got {self.dephasing_rate}")
        if self.trap_rate < 0:
            raise ValueError(f"trap_rate must be >= 0, got {self.trap_rate}")

    def injection_rate(self, n_sites: int) -> float:
        """Per-injector rate; total injection always matches trap_rate."""
        if self.injection_site is None:
            return self.trap_rate / n_sites
        return self.trap_rate

    @property
    def closed(self) -> bool:
        return self.trap_rate == 0


@dataclass(frozen=True)
class OperatorSet:
    """Site-basis jump operators of the transport model."""

    dephasers: tuple[np.ndarray, ...]
    extractor: np.ndarray | None
    injectors: tuple[np.ndarray, ...]


def build_operator_set(
    n_sites: int, injection_site: int | None = None, include_trap: bool = True
) -> OperatorSet:
    """Dephasing, extraction and injection operators for an N-site chain.

    With ``include_trap=False`` only the dephasers are built, on the bare
    N-dimensional site space (closed chain).
    """
    if n_sites < 1:
        raise ValueError(f"n_sites must be >= 1, got {n_sites}")
    if injection_site is not None and not 1 <= injection_site <= n_sites:
        raise ValueError(
            f"injection_site must be in 1..{n_sites}, got {injection_site}"
        )
    dim = n_sites + 1 if include_trap else n_sites
    site_identity = np.zeros((dim, dim))
    site_identity[:n_sites, :n_sites] = np.eye(n_sites)

    dephasers = []
    for i in range(n_sites):
        a = -site_identity.copy()
        a[i, i] = 1.0
        dephasers.append(a)

    if not include_trap:
        return OperatorSet(tuple(dephasers), None, ())

    trap = n_sites
    extractor = np.zeros((dim, dim))
    extractor[trap, n_sites - 1] = 1.0

    sites = range(n_sites) if injection_site is None else [injection_site - 1]
    injectors = []
    for i in sites:
        a = np.zeros((dim, dim))
        a[i, trap] = 1.0
        injectors.append(a)

    return OperatorSet(tuple(dephasers), extractor, tuple(injectors))


def dissipator(a: np.ndarray) -> sp.csr_matrix:
    """Superoperator of the Lindblad dissipator A . A† - {A†A, .}/2.

    Column-stacking convention: vec(A rho B) = (B^T kron A) vec(rho).
    """
    a = sp.csr_matrix(a)
    adag_a = (a.conj().T @ a).tocsr()
    dim = a.shape[0]
    eye = sp.identity(dim, format="csr")
    return (
        sp.kron(a.conj(), a, format="csr")
        - 0.5 * sp.kron(eye, adag_a, format="csr")
        - 0.5 * sp.kron(adag_a.T, eye, format="csr")
    )


def commutator_superoperator(h: np.ndarray) -> sp.csr_matrix:
    """Superoperator of -i[H, .] in the column-stacking convention."""
    h = sp.csr_matrix(h)
    dim = h.shape[0]
    eye = sp.identity(dim, format="csr")
    return -1j * (sp.kron(eye, h, format="csr") - sp.kron(h.T, eye, format="csr"))


def dephasing_superoperator(n_sites: int, include_trap: bool = True) -> sp.csr_matrix:
    """Unit-rate sum of the site dephasing dissipators (multiply by Gamma)."""
    ops = build_operator_set(n_sites, include_trap=include_trap)
    dim = (n_sites + 1 if include_trap else n_sites) ** 2
    total = sp.csr_matrix((dim, dim), dtype=complex)
    for a in ops.dephasers:
        total = total + dissipator(a)
    return total


def static_superoperator(h: np.ndarray, spec: TransportSpec) -> sp.csr_matrix:
    """Gamma-independent part of the generator: commutator plus pump/trap."""
    n_sites = h.shape[0] - 1
    if spec.closed and spec.injection_site is None:
        return commutator_superoperator(h[:n_sites, :n_sites])
    total = commutator_superoperator(h)
    ops = build_operator_set(n_sites, spec.injection_site)
    total = total + spec.trap_rate * dissipator(ops.extractor)
    gamma_inj = spec.injection_rate(n_sites)
    for a in ops.injectors:
        total = total + gamma_inj * dissipator(a)
    return total.tocsr()


@dataclass(frozen=True)
class Liouvillian:
    """Sparse generator of the open-chain dynamics.

    ``matrix`` acts on column-vectorized density matrices of dimension
    ``dim`` (N+1 for transport setups, N for closed chains).
    """

    matrix: sp.csr_matrix
    dim: int
    n_sites: int
    spec: TransportSpec | None = field(default=None, compare=False)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """d(rho)/dt for a matrix-shaped state."""
        return (self.matrix @ rho.reshape(-1, order="F")).reshape(
            self.dim, self.dim, order="F"
        )


def build_liouvillian(h: np.ndarray, spec: TransportSpec) -> Liouvillian:
    """Assemble the full Lindblad generator for a chain Hamiltonian."""
    n_sites = h.shape[0] - 1
    include_trap = not (spec.closed and spec.injection_site is None)
    matrix = static_superoperator(h, spec)
    if spec.dephasing_rate > 0:
        matrix = matrix + spec.dephasing_rate * dephasing_superoperator(
            n_sites, include_trap
        )
    dim = n_sites + 1 if include_trap else n_sites
    return Liouvillian(matrix.tocsr(), dim, n_sites, spec)


def _trace_row(dim: int, size: int) -> sp.csr_matrix:
    cols = np.arange(dim) * (dim + 1)
    return sp.csr_matrix(
        (np.ones(dim), (np.zeros(dim, dtype=int), cols)), shape=(1, size)
    )


def _null_space_fallback(matrix: sp.csr_matrix, dim: int, tol: float = 1e-8):
    """Dense SVD null-space solve; classifies degenerate generators."""
    dense = matrix.toarray()
    _, s, vh = np.linalg.svd(dense)
    scale = s[0] if s[0] > 0 else 1.0
    null_dim = int(np.sum(s < tol * scale))
    if null_dim > 1:
        raise NonUniqueSteadyState(
            f"Liouvillian null space has dimension {null_dim}"
        )
    if null_dim == 0:
        raise SolverFailure("no numerical null vector found")
    return vh[-1].conj()


def steady_state(liouvillian: Liouvillian | sp.spmatrix) -> np.ndarray:
    """Solve L(rho) = 0 for the trace-one stationary density matrix.

    One row of the generator is replaced by the trace constraint and the
    resulting square system solved by sparse LU; on a singular or
    inaccurate solve the null space is computed directly, raising
    NonUniqueSteadyState for degenerate generators and SolverFailure if no
    valid solution exists.
    """
    matrix = liouvillian.matrix if isinstance(liouvillian, Liouvillian) else liouvillian
    matrix = sp.csr_matrix(matrix)
    size = matrix.shape[0]
    dim = int(round(np.sqrt(size)))

    rhs = np.zeros(size, dtype=complex)
    rhs[0] = 1.0

    vec = None
    if size <= 512:
        system = matrix.toarray()
        system[0, :] = 0.0
        system[0, np.arange(dim) * (dim + 1)] = 1.0
        try:
            candidate = np.linalg.solve(system, rhs)
            if np.all(np.isfinite(candidate)):
                vec = candidate
        except np.linalg.LinAlgError:
            vec = None
    else:
        system = sp.vstack([_trace_row(dim, size), matrix[1:]], format="csc")
        try:
            with np.errstate(all="ignore"):
                candidate = spsolve(system, rhs)
            if np.all(np.isfinite(candidate)):
                vec = candidate
        except Exception:
            vec = None

    l_norm = sp.linalg.norm(matrix)
    if vec is not None:
        residual = np.linalg.norm(matrix @ vec) / max(np.linalg.norm(vec), 1e-300)
        if residual >= 1e-9 * l_norm:
            vec = None

    if vec is None:
        vec = _null_space_fallback(matrix, dim)
        residual = np.linalg.norm(matrix @ vec) / max(np.linalg.norm(vec), 1e-300)
        if residual >= 1e-9 * max(l_norm, 1.0):
            raise SolverFailure(f"null-space residual {residual:.2e} too large")

    rho = vec.reshape(dim, dim, order="F")
    rho = 0.5 * (rho + rho.conj().T)
    trace = np.trace(rho).real
    if abs(trace) < 1e-12:
        raise SolverFailure("steady-state candidate has vanishing trace")
    return rho / trace


def steady_current(rho: np.ndarray, spec: TransportSpec, n_sites: int | None = None) -> float:
    """Steady-state current: trap rate times the extraction-site population."""
    n = n_sites if n_sites is not None else rho.shape[0] - 1
    return float(spec.trap_rate * rho[n - 1, n - 1].real)


def propagate(
    liouvillian: Liouvillian,
    rho0: np.ndarray,
    times: np.ndarray,
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> np.ndarray:
    """Adaptive Runge-Kutta integration of d(rho)/dt = L(rho).

    Returns an array of density matrices, one per requested time.  The
    first time may be nonzero; integration starts there with ``rho0``.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or (times.size > 1 and not np.all(np.diff(times) > 0)):
        raise ValueError("times must be a strictly ascending 1-D grid")
    matrix = liouvillian.matrix
    y0 = np.asarray(rho0, dtype=complex).reshape(-1, order="F")
    if times.size == 1:
        return np.asarray(rho0, dtype=complex)[np.newaxis]

    result = solve_ivp(
        lambda _t, y: matrix @ y,
        (times[0], times[-1]),
        y0,
        method="DOP853",
        t_eval=times,
        rtol=rtol,
        atol=atol,
    )
    if not result.success:
        raise PropagationError(result.message)
    dim = liouvillian.dim
    return np.array(
        [result.y[:, k].reshape(dim, dim, order="F") for k in range(times.size)]
    )


def population_variance(rho: np.ndarray, n_sites: int | None = None) -> float:
    """Variance of the chain-site populations (trap excluded)."""
    dim = rho.shape[0]
    n = n_sites if n_sites is not None else dim - 1
    populations = np.diag(rho).real[:n]
    return float(np.var(populations))


def wavepacket_variance(state: np.ndarray, n_sites: int | None = None) -> float:
    """Second moment sum_n n^2 p_n about the central site of an odd chain.

    ``state`` may be a density matrix (site populations from its diagonal)
    or a pure-state amplitude vector.
    """
    state = np.asarray(state)
    if state.ndim == 2:
        dim = state.shape[0]
        n = n_sites if n_sites is not None else dim
        populations = np.diag(state).real[:n]
    else:
        populations = np.abs(state) ** 2
        n = populations.size
    if n % 2 == 0:
        raise ValueError("wavepacket variance requires an odd-length chain")
    offsets = np.arange(n) - (n - 1) / 2
    return float(np.sum(offsets**2 * populations[:n]))
