"""Vectorized Lindblad dynamics in the zero-plus-single-excitation subspace.

The density matrix of an N-site network restricted to the span of the
single-excitation states |1>, ..., |N> and the all-ground state |vac> is a
d x d matrix with d = N + 1.  Sites come first and the vacuum is the LAST
basis vector.  Flattening is row-major, so entry (i, j) (0-based) of rho
lives at position i*d + j of the vector, and

    vec(A rho B) = (A kron B^T) vec(rho).

With that convention the master equation
``drho/dt = -i[H, rho] + gamma * sum_n (c rho c^+ - {c^+ c, rho}/2)``
becomes ``dvec/dt = L vec`` with

    L = A kron I + I kron B^T + gamma * sum_n c_n kron conj(c_n),
    A = -iH - gamma/2 sum c^+c,   B = +iH - gamma/2 sum c^+c.

``L`` is diagonalized once per (H, model) and the propagator
``U(t) = M exp(E t) M^-1`` is then available for any time and any initial
state.  When the eigenvector matrix is too ill conditioned the propagator
falls back to a scaling-and-squaring matrix exponential.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import NumericError, ShapeError

logger = logging.getLogger(__name__)

#: eigenvector matrices with a 1-norm condition estimate above this are rejected;
#: the reconstruction error of M e^{Et} M^-1 grows like cond * eps
CONDITION_LIMIT = 1e6


# ---------------------------------------------------------------------------
# index helpers (0-based positions; vacuum is position d-1)


def population_index(d: int, p: int) -> int:
    """Vector position of rho[p, p]."""
    return p * d + p


def site_vacuum_index(d: int, p: int) -> int:
    """Vector position of rho[p, vac]."""
    return p * d + d - 1


def vacuum_site_index(d: int, p: int) -> int:
    """Vector position of rho[vac, p]."""
    return (d - 1) * d + p


def vacuum_index(d: int) -> int:
    return d * d - 1


# ---------------------------------------------------------------------------
# vectorization


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Row-major flattening ``vec[i*d + j] = rho[i, j]``."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {rho.shape}")
    return rho.reshape(-1).astype(complex, copy=True)


def devectorize(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec)
    if vec.ndim != 1:
        raise ShapeError(f"expected a vector, got shape {vec.shape}")
    d = math.isqrt(vec.size)
    if d * d != vec.size:
        raise ShapeError(f"vector length {vec.size} is not a perfect square")
    return vec.reshape(d, d).astype(complex, copy=True)


def _default_sites(n_sites: int) -> tuple:
    return tuple(range(1, n_sites + 1))


@dataclass(frozen=True, eq=False)
class SubspaceState:
    """Density matrix over ``(*sites, vac)``.

    ``sites`` holds the labels of the rows/columns preceding the vacuum.  Plain
    chains use 1..N; a network with an attached non-interacting qubit uses
    0..N so the extra qubit can be addressed as site 0.
    """

    matrix: np.ndarray
    sites: tuple = ()

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise ShapeError(f"density matrix must be square with d >= 2, got {m.shape}")
        object.__setattr__(self, "matrix", m)
        sites = tuple(self.sites) or _default_sites(m.shape[0] - 1)
        if len(sites) != m.shape[0] - 1:
            raise ShapeError(f"{len(sites)} site labels for a {m.shape[0]}-dim state")
        object.__setattr__(self, "sites", sites)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_sites(self) -> int:
        return self.dim - 1

    @property
    def vector(self) -> np.ndarray:
        return vectorize(self.matrix)

    def position(self, site) -> int:
        """0-based row of ``site``; raises IndexError for unknown labels."""
        try:
            return self.sites.index(site)
        except ValueError:
            raise IndexError(f"site {site!r} not in {self.sites}") from None

    @classmethod
    def from_vector(cls, vec: np.ndarray, sites: Sequence = ()) -> "SubspaceState":
        return cls(devectorize(vec), tuple(sites))

    @classmethod
    def from_amplitudes(cls, amplitudes: dict, sites: Sequence) -> "SubspaceState":
        """Pure state from ``{site_label or 'vac': amplitude}``; normalized here."""
        sites = tuple(sites)
        psi = np.zeros(len(sites) + 1, dtype=complex)
        for key, amp in amplitudes.items():
            pos = len(sites) if key == "vac" else sites.index(key)
            psi[pos] = amp
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise ValueError("all amplitudes are zero")
        psi /= norm
        return cls(np.outer(psi, psi.conj()), sites)


def encode_input(n_sites: int, m: int, theta: float, phi: float,
                 sites: Sequence = ()) -> SubspaceState:
    """Input qubit ``cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`` written on
    position ``m`` (1-based) with every other spin in |0>.

    The resulting vector has four nonzero entries: the site population
    ``sin^2(theta/2)``, the vacuum population ``cos^2(theta/2)`` and the two
    site/vacuum coherences ``e^{+-i phi} sin(theta) / 2``.
    """
    if not 1 <= m <= n_sites:
        raise IndexError(f"injection site {m} outside 1..{n_sites}")
    d = n_sites + 1
    p = m - 1
    rho = np.zeros((d, d), dtype=complex)
    rho[p, p] = math.sin(theta / 2) ** 2
    rho[d - 1, d - 1] = math.cos(theta / 2) ** 2
    rho[p, d - 1] = 0.5 * np.exp(1j * phi) * math.sin(theta)
    rho[d - 1, p] = 0.5 * np.exp(-1j * phi) * math.sin(theta)
    return SubspaceState(rho, tuple(sites))


# ---------------------------------------------------------------------------
# decoherence model


class Decoherence(str, enum.Enum):
    DISSIPATIVE = "dissipative"
    DEPHASING = "dephasing"
    NONE = "none"


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Local decoherence acting independently on every site."""

    kind: Decoherence
    gamma: float
    jumps: tuple = field(default=())

    @classmethod
    def build(cls, kind, gamma: float, n_sites: int) -> "LindbladModel":
        """Jump operators for ``n_sites`` sites in the ``(sites, vac)`` basis.

        dissipative: |vac><n| (sigma^-), dephasing: |n><n| (sigma^+ sigma^-).
        """
        kind = Decoherence(kind)
        if gamma < 0:
            raise ValueError(f"decay rate must be non-negative, got {gamma}")
        d = n_sites + 1
        jumps = []
        if kind is not Decoherence.NONE:
            for p in range(n_sites):
                c = np.zeros((d, d), dtype=complex)
                if kind is Decoherence.DISSIPATIVE:
                    c[d - 1, p] = 1.0
                else:
                    c[p, p] = 1.0
                jumps.append(c)
        return cls(kind, float(gamma) if kind is not Decoherence.NONE else 0.0, tuple(jumps))


# ---------------------------------------------------------------------------
# generator


@dataclass(frozen=True)
class Spectral:
    values: np.ndarray
    vectors: np.ndarray
    inverse: np.ndarray
    condition: float


@dataclass(frozen=True, eq=False)
class Generator:
    """``matrix = coherent + dissipator`` with the two parts kept separately."""

    matrix: np.ndarray
    coherent: np.ndarray
    dissipator: np.ndarray
    model: LindbladModel
    sites: tuple
    condition_limit: float = CONDITION_LIMIT

    @property
    def dim(self) -> int:
        """Dimension d of the underlying density matrix."""
        return math.isqrt(self.matrix.shape[0])

    @cached_property
    def spectral(self) -> Spectral | None:
        """Eigendecomposition of the generator, or None when it is rejected."""
        L = self.matrix
        if np.abs(L + L.conj().T).max() <= 1e-14 * max(1.0, np.abs(L).max()):
            # purely coherent: i*L is Hermitian, so use a unitary eigenbasis
            w, vectors = np.linalg.eigh(1j * L)
            return Spectral(-1j * w, vectors, vectors.conj().T, 1.0)
        try:
            values, vectors = np.linalg.eig(L)
            inverse = np.linalg.inv(vectors)
        except np.linalg.LinAlgError as exc:
            logger.warning("eigendecomposition failed (%s); using expm", exc)
            return None
        cond = float(np.linalg.norm(vectors, 1) * np.linalg.norm(inverse, 1))
        if not np.isfinite(cond) or cond >= self.condition_limit:
            logger.warning("eigenvector condition %.3g over limit; using expm", cond)
            return None
        return Spectral(values, vectors, inverse, cond)


def kron_form(H: np.ndarray, jumps: Sequence[np.ndarray], gamma: float) -> np.ndarray:
    """``A kron I + I kron B^T + gamma sum c kron conj(c)`` assembled directly."""
    d = H.shape[0]
    eye = np.eye(d)
    number = sum((c.conj().T @ c for c in jumps), np.zeros((d, d), dtype=complex))
    A = -1j * H - 0.5 * gamma * number
    B = 1j * H - 0.5 * gamma * number
    out = np.kron(A, eye) + np.kron(eye, B.T)
    for c in jumps:
        out = out + gamma * np.kron(c, c.conj())
    return out


def build_generator(H, model: LindbladModel, sites: Sequence = (),
                    condition_limit: float = CONDITION_LIMIT) -> Generator:
    """Assemble the vectorized generator for Hamiltonian ``H`` under ``model``.

    ``H`` may be a plain matrix or anything with ``matrix`` and ``sites``
    attributes (see :func:`spinchannel.networks.hamiltonian`).
    """
    if hasattr(H, "matrix"):
        sites = sites or H.sites
        H = H.matrix
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ShapeError(f"Hamiltonian must be square, got {H.shape}")
    if np.abs(H - H.conj().T).max() > 1e-12:
        raise ValueError("Hamiltonian is not Hermitian")
    d = H.shape[0]
    for c in model.jumps:
        if c.shape != (d, d):
            raise ShapeError(f"jump operator shape {c.shape} does not match d={d}")
    sites = tuple(sites) or _default_sites(d - 1)
    if len(sites) != d - 1:
        raise ShapeError(f"{len(sites)} site labels for d={d}")

    eye = np.eye(d)
    coherent = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    dissipator = np.zeros((d * d, d * d), dtype=complex)
    for c in model.jumps:
        cc = c.conj().T @ c
        dissipator += model.gamma * (np.kron(c, c.conj())
                                     - 0.5 * (np.kron(cc, eye) + np.kron(eye, cc.T)))
    return Generator(coherent + dissipator, coherent, dissipator, model, sites,
                     condition_limit)


# ---------------------------------------------------------------------------
# propagator


class Propagator:
    """``U(t) = exp(L t)`` for one generator and one time.

    Cheap to create: the full d^2 x d^2 matrix is only formed on demand.
    Single elements and matrix-vector products go through the cached
    eigendecomposition directly.  ``method`` is ``"eig"`` or ``"expm"``.
    """

    def __init__(self, generator: Generator, t: float):
        if t < 0:
            raise ValueError(f"time must be non-negative, got {t}")
        self.generator = generator
        self.t = float(t)
        spec = generator.spectral
        self.method = "eig" if spec is not None else "expm"
        if spec is not None:
            self._phases = np.exp(spec.values * self.t)

    @property
    def dim(self) -> int:
        return self.generator.dim

    @property
    def sites(self) -> tuple:
        return self.generator.sites

    @cached_property
    def matrix(self) -> np.ndarray:
        if self.method == "eig":
            spec = self.generator.spectral
            return (spec.vectors * self._phases) @ spec.inverse
        try:
            out = scipy.linalg.expm(self.generator.matrix * self.t)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericError(f"matrix exponential failed: {exc}") from exc
        if not np.all(np.isfinite(out)):
            raise NumericError("matrix exponential produced non-finite entries")
        return out

    def element(self, i: int, j: int) -> complex:
        """``U[i, j]`` with 0-based vector indices."""
        if "matrix" in self.__dict__ or self.method == "expm":
            return complex(self.matrix[i, j])
        spec = self.generator.spectral
        return complex(np.sum(spec.vectors[i] * self._phases * spec.inverse[:, j]))

    def apply(self, vec: np.ndarray) -> np.ndarray:
        if "matrix" in self.__dict__ or self.method == "expm":
            return self.matrix @ vec
        spec = self.generator.spectral
        return spec.vectors @ (self._phases * (spec.inverse @ vec))


def propagator(g: Generator, t: float) -> Propagator:
    return Propagator(g, t)


def evolve(p: Propagator, s0: SubspaceState) -> SubspaceState:
    """``vec(rho(t)) = U(t) vec(rho(0))``."""
    if s0.dim != p.dim:
        raise ShapeError(f"state dimension {s0.dim} does not match propagator {p.dim}")
    return SubspaceState.from_vector(p.apply(s0.vector), p.sites)


def evolve_at(g: Generator, s0: SubspaceState, t: float) -> SubspaceState:
    return evolve(Propagator(g, t), s0)
