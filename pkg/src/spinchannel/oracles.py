"""Independent reference results for checking the diagonalization engine.

Nothing here reuses the engine's Kronecker assembly: the RK4 integrator works
on density matrices directly, and the full-space evolver builds its
superoperator by applying the master equation to matrix units in the full
2^N-dimensional Hilbert space.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import ShapeError

MAX_RK4_STEPS = 10**8


# ---------------------------------------------------------------------------
# closed forms (dissipative perfect-transfer chain, dephasing limits, two-site k-family chain)


class ClosedFormKind(str, enum.Enum):
    F_T0_DISSIPATIVE = "f_t0_dissipative"
    AVG_F_T0_DISSIPATIVE = "F_t0_dissipative"
    F_T_DISSIPATIVE = "f_t_dissipative"
    AVG_F_T_DISSIPATIVE = "F_t_dissipative"
    DEPHASING_F_LIMIT = "dephasing_f_limit"
    DEPHASING_AVG_F_LIMIT = "dephasing_F_limit"
    SHI_N2_F = "shi_n2_f"
    SHI_N2_AVG_F = "shi_n2_F"
    GAMMA_C_DISSIPATIVE = "gamma_c_dissipative"


def phase_pattern(N: int, k: int = 1) -> float:
    """cos(alpha) = Re[i^{(N-1)(2k-1)}]: +1, 0, -1 for N = 4r+1, 2r, 4r-1."""
    return (1, 0, -1, 0)[((N - 1) * (2 * k - 1)) % 4]


@dataclass(frozen=True)
class ClosedForm:
    """A closed-form expression with its parameters.

    ``cos_alpha`` defaults to the phase pattern of (N, k).  The time-resolved
    average fidelity uses the signed ``sin^{N-1}(lam t)``, so with k = 1 the
    pattern value is correct at every transfer peak.
    """

    kind: ClosedFormKind
    N: int = 2
    gamma: float = 0.0
    lam: float = 1.0
    k: int = 1
    cos_alpha: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ClosedFormKind(self.kind))
        if self.N < 1:
            raise ValueError("N must be positive")
        if self.kind in (ClosedFormKind.SHI_N2_F, ClosedFormKind.SHI_N2_AVG_F) and self.N != 2:
            raise ValueError("the k-family closed form only exists for N = 2")

    @property
    def cosa(self) -> float:
        return phase_pattern(self.N, self.k) if self.cos_alpha is None else self.cos_alpha


def closed_form(c: ClosedForm, t: float) -> float:
    """Evaluate ``c`` at time ``t`` (``t`` is t0 or t_c for the point forms)."""
    K = ClosedFormKind
    g, lam, N = c.gamma, c.lam, c.N
    if c.kind is K.F_T0_DISSIPATIVE:
        return math.exp(-g * t)
    if c.kind is K.AVG_F_T0_DISSIPATIVE:
        return math.exp(-g * t / 2) * c.cosa / 3 + math.exp(-g * t) / 6 + 0.5
    if c.kind is K.F_T_DISSIPATIVE:
        return math.exp(-g * t) * math.sin(lam * t) ** (2 * (N - 1))
    if c.kind is K.AVG_F_T_DISSIPATIVE:
        s = math.sin(lam * t)
        return (math.exp(-g * t / 2) * s ** (N - 1) * c.cosa / 3
                + math.exp(-g * t) * s ** (2 * (N - 1)) / 6 + 0.5)
    if c.kind is K.DEPHASING_F_LIMIT:
        return 1.0 / N
    if c.kind is K.DEPHASING_AVG_F_LIMIT:
        return 1.0 / (6 * N) + 0.5
    if c.kind is K.SHI_N2_F:
        return math.exp(-g * t) * math.sin((2 * c.k + 1) * lam * t) ** 2
    if c.kind is K.SHI_N2_AVG_F:
        return math.exp(-g * t) * math.sin((2 * c.k + 1) * lam * t) ** 2 / 6 + 0.5
    if c.kind is K.GAMMA_C_DISSIPATIVE:
        ca = c.cosa
        return math.log(2 * ca**2 + 2 * ca * math.sqrt(1 + ca**2) + 1) / t
    raise ValueError(f"unhandled kind {c.kind}")


# ---------------------------------------------------------------------------
# perfect-transfer chain eigensystem by recursion


def christandl_eigensystem(N: int, lam: float = 1.0):
    """Eigenvalues and eigenvectors of the perfect-transfer chain in ``(sites, vac)``.

    Returns ``(values, vectors)``: ``values[k-1] = -(N - 2k + 1) lam`` for
    k = 1..N followed by the vacuum energy 0; column k-1 of ``vectors`` is the
    k-th eigenvector from the three-term recursion (normalized afterwards),
    the last column is the vacuum.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if N > 60:
        raise OverflowError("recursion is only trusted up to N = 60")
    energies = np.array([-(N - 2 * k + 1) for k in range(1, N + 1)], dtype=float)
    c = np.zeros((N + 1, N + 1))  # c[k, n], 1-based, row 0 / column 0 unused

    def fill(k: int):
        e = energies[k - 1]
        for n in range(2, N + 1):
            prev2 = c[k, n - 2] if n >= 3 else 0.0
            c[k, n] = (e * c[k, n - 1] - math.sqrt((n - 2) * (N - n + 2)) * prev2) / math.sqrt(
                (n - 1) * (N - n + 1))

    c[1, 1] = 2.0 ** (-(N - 1) / 2)
    fill(1)
    for k in range(2, N + 1):
        c[k, 1] = (-1) ** (k + 1) * c[1, k]
        fill(k)

    vectors = np.zeros((N + 1, N + 1), dtype=complex)
    for k in range(1, N + 1):
        v = c[k, 1:]
        vectors[:N, k - 1] = v / np.linalg.norm(v)
    vectors[N, N] = 1.0
    return np.append(energies * lam, 0.0), vectors


# ---------------------------------------------------------------------------
# RK4


def lindblad_rhs(H: np.ndarray, jumps, gamma: float) -> Callable[[np.ndarray], np.ndarray]:
    """``rho -> -i[H, rho] + gamma sum (c rho c^+ - {c^+ c, rho}/2)``.

    Works on a single d x d matrix or a stack of shape (..., d, d).
    """
    H = np.asarray(H, dtype=complex)
    jumps = [np.asarray(c, dtype=complex) for c in jumps]
    number = sum((c.conj().T @ c for c in jumps), np.zeros_like(H))
    # rho -> K rho + rho K^+ + gamma sum c rho c^+ with K = -iH - gamma/2 n
    K = -1j * H - 0.5 * gamma * number
    Kd = K.conj().T
    cds = [c.conj().T for c in jumps]

    def rhs(rho):
        out = K @ rho + rho @ Kd
        for c, cd in zip(jumps, cds):
            out = out + gamma * (c @ rho @ cd)
        return out

    return rhs


def rk4_evolve(rhs, y0: np.ndarray, t_final: float, dt: float = 1e-3) -> np.ndarray:
    """Classic fixed-step fourth-order Runge-Kutta for ``dy/dt = rhs(y)``.

    ``rhs`` is a callable or a matrix (then ``dy/dt = rhs @ y``).  The step is
    shrunk slightly so that an integer number of steps lands on ``t_final``.
    """
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not callable(rhs):
        mat = np.asarray(getattr(rhs, "matrix", rhs))
        rhs = mat.__matmul__
    steps = math.ceil(t_final / dt - 1e-12) if t_final > 0 else 0
    if steps > MAX_RK4_STEPS:
        raise OverflowError(f"{steps} RK4 steps exceed the {MAX_RK4_STEPS} guard")
    y = np.array(y0, dtype=complex)
    if steps == 0:
        return y
    h = t_final / steps
    for _ in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def rk4_propagator(H: np.ndarray, jumps, gamma: float, t: float, dt: float = 1e-3) -> np.ndarray:
    """Propagator in the row-major vectorized picture, column by column from RK4.

    Column ``i*d + j`` is the evolved matrix unit ``|i><j|`` flattened row-major.
    """
    d = np.asarray(H).shape[0]
    units = np.eye(d * d, dtype=complex).reshape(d * d, d, d)
    out = rk4_evolve(lindblad_rhs(H, jumps, gamma), units, t, dt)
    return out.reshape(d * d, d * d).T


# ---------------------------------------------------------------------------
# full Hilbert space brute force

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_LOWER = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|, |1> = excited


def _embed(op: np.ndarray, q: int, n: int) -> np.ndarray:
    """``op`` on qubit ``q`` (0 = most significant) of an ``n``-qubit register."""
    out = np.array([[1.0 + 0j]])
    for j in range(n):
        out = np.kron(out, op if j == q else np.eye(2))
    return out


def full_hamiltonian(edges, n_qubits: int, qubit_of) -> np.ndarray:
    dim = 2**n_qubits
    H = np.zeros((dim, dim), dtype=complex)
    for a, b, J in edges:
        qa, qb = qubit_of[a], qubit_of[b]
        H += 0.5 * J * (_embed(_SX, qa, n_qubits) @ _embed(_SX, qb, n_qubits)
                        + _embed(_SY, qa, n_qubits) @ _embed(_SY, qb, n_qubits))
    return H


def full_jumps(kind: str, n_qubits: int) -> list[np.ndarray]:
    if kind == "none":
        return []
    low = [_embed(_LOWER, q, n_qubits) for q in range(n_qubits)]
    if kind == "dissipative":
        return low
    if kind == "dephasing":
        return [c.conj().T @ c for c in low]
    raise ValueError(f"unknown decoherence kind {kind!r}")


def _superoperator(H, jumps, gamma) -> np.ndarray:
    """Matrix of the master-equation map, built by acting on matrix units."""
    dim = H.shape[0]
    rhs = lindblad_rhs(H, jumps, gamma)
    units = np.eye(dim * dim, dtype=complex).reshape(dim * dim, dim, dim)
    images = rhs(units)
    return images.reshape(dim * dim, dim * dim).T


def single_excitation_basis(n_qubits: int) -> list[int]:
    """Full-space indices of |1>, ..., |N> (excitation on qubit q) then |0...0>."""
    return [1 << (n_qubits - 1 - q) for q in range(n_qubits)] + [0]


def embed_subspace(rho_sub: np.ndarray) -> np.ndarray:
    """Place a ``(sites, vac)`` density matrix in the full 2^N space."""
    n = rho_sub.shape[0] - 1
    idx = single_excitation_basis(n)
    full = np.zeros((2**n, 2**n), dtype=complex)
    full[np.ix_(idx, idx)] = rho_sub
    return full


def project_subspace(rho_full: np.ndarray) -> np.ndarray:
    n = int(round(math.log2(rho_full.shape[0])))
    idx = single_excitation_basis(n)
    return rho_full[np.ix_(idx, idx)]


def brute_force_full(net, kind: str, gamma: float, rho0_full: np.ndarray, t: float) -> np.ndarray:
    """Evolve a full 2^N density matrix under the XX network with local
    sigma^- (dissipative) or sigma^+ sigma^- (dephasing) jumps on every qubit.
    """
    n = net.n_sites
    if n > 4:
        raise ValueError(f"brute force is limited to 4 qubits, got {n}")
    dim = 2**n
    rho0_full = np.asarray(rho0_full, dtype=complex)
    if rho0_full.shape != (dim, dim):
        raise ShapeError(f"expected a {dim}x{dim} density matrix")
    qubit_of = {s: q for q, s in enumerate(net.sites)}
    H = full_hamiltonian(net.edges, n, qubit_of)
    S = _superoperator(H, full_jumps(kind, n), gamma)
    vec = scipy.linalg.expm(S * t) @ rho0_full.reshape(-1)
    return vec.reshape(dim, dim)
