"""Engineered XX spin networks and their single-excitation Hamiltonians.

The XX bond ``(J/2)(X_a X_b + Y_a Y_b)`` moves a single excitation between
sites a and b with amplitude J, so in the ``(sites, vac)`` basis the
Hamiltonian is the weighted adjacency matrix of the network padded with a
zero vacuum row and column.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

NI_SITE = 0


@dataclass(frozen=True)
class SpinNetwork:
    """Sites, weighted XX bonds and the input/output roles.

    ``sites`` lists the interacting sites in basis order.  When a
    non-interacting qubit has been attached it is site 0 and sits first.
    """

    sites: tuple
    edges: tuple  # ((a, b, J), ...)
    scale: float = 1.0
    input_site: int = 1
    output_sites: tuple = ()
    has_ni: bool = False
    kind: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        labels = set(self.sites)
        if len(labels) != len(self.sites):
            raise ValueError("duplicate site labels")
        seen = set()
        for a, b, J in self.edges:
            if a not in labels or b not in labels:
                raise ValueError(f"edge ({a}, {b}) references an unknown site")
            if a == b:
                raise ValueError(f"self-loop at site {a}")
            if not np.isreal(J):
                raise ValueError(f"coupling on ({a}, {b}) must be real")
            key = frozenset((a, b))
            if key in seen:
                raise ValueError(f"duplicate edge ({a}, {b})")
            seen.add(key)
            if self.has_ni and NI_SITE in key:
                raise ValueError("the non-interacting qubit cannot carry bonds")
        if self.input_site not in labels:
            raise ValueError(f"input site {self.input_site} not in network")
        for s in self.output_sites:
            if s not in labels:
                raise ValueError(f"output site {s} not in network")
        if not self._connected():
            raise ValueError("network is not connected")

    def _connected(self) -> bool:
        active = [s for s in self.sites if not (self.has_ni and s == NI_SITE)]
        if len(active) <= 1:
            return True
        adj = {s: [] for s in active}
        for a, b, _ in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        seen = {active[0]}
        queue = deque(seen)
        while queue:
            for nb in adj[queue.popleft()]:
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
        return len(seen) == len(active)

    @property
    def n_sites(self) -> int:
        """Number of basis sites (including the non-interacting qubit)."""
        return len(self.sites)

    @property
    def n_interacting(self) -> int:
        return self.n_sites - int(self.has_ni)

    @property
    def dim(self) -> int:
        return self.n_sites + 1

    @property
    def output_site(self) -> int:
        return self.output_sites[0]

    def position(self, site) -> int:
        """1-based basis position of ``site``."""
        try:
            return self.sites.index(site) + 1
        except ValueError:
            raise IndexError(f"site {site!r} not in network") from None

    def coupling(self, a, b) -> float:
        for x, y, J in self.edges:
            if {x, y} == {a, b}:
                return float(J)
        return 0.0

    def chain_couplings(self) -> list[float]:
        """Bond strengths along consecutive interacting sites (chains only)."""
        active = [s for s in self.sites if not (self.has_ni and s == NI_SITE)]
        return [self.coupling(a, b) for a, b in zip(active, active[1:])]

    def is_mirror_symmetric(self) -> bool:
        J = self.chain_couplings()
        return len(self.edges) == len(J) and J == J[::-1]

    def to_dict(self) -> dict:
        return {
            "type": "custom",
            "sites": list(self.sites),
            "edges": [[a, b, float(J)] for a, b, J in self.edges],
            "lambda": self.scale,
            "input": self.input_site,
            "outputs": list(self.output_sites),
            "ni": self.has_ni,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpinNetwork":
        return cls(
            sites=tuple(data["sites"]),
            edges=tuple((a, b, float(J)) for a, b, J in data["edges"]),
            scale=float(data.get("lambda", 1.0)),
            input_site=data.get("input", data["sites"][0]),
            output_sites=tuple(data.get("outputs", ())),
            has_ni=bool(data.get("ni", False)),
        )


def _chain(couplings, scale, kind, params) -> SpinNetwork:
    n = len(couplings) + 1
    edges = tuple((i + 1, i + 2, J) for i, J in enumerate(couplings))
    return SpinNetwork(tuple(range(1, n + 1)), edges, scale, 1, (n,), False, kind, params)


def christandl_chain(N: int, lam: float = 1.0) -> SpinNetwork:
    """Chain with ``J_{n,n+1} = lam * sqrt(n (N - n))``: perfect transfer 1 -> N at
    ``t = pi / (2 lam)``."""
    if N < 2:
        raise ValueError(f"chain needs at least 2 sites, got {N}")
    if lam <= 0:
        raise ValueError("scale must be positive")
    J = [lam * math.sqrt(n * (N - n)) for n in range(1, N)]
    return _chain(J, lam, "christandl", {"N": N})


def shi_chain(N: int, k: int, lam: float = 1.0) -> SpinNetwork:
    """Family with odd bonds ``lam sqrt((n+2k)(N-n+2k))`` and even bonds as in the
    perfect-transfer chain; ``k = 0`` reproduces it."""
    if N < 2:
        raise ValueError(f"chain needs at least 2 sites, got {N}")
    if k < 0:
        raise ValueError("family index must be >= 0")
    if lam <= 0:
        raise ValueError("scale must be positive")
    J = []
    for n in range(1, N):
        if n % 2 == 0:
            J.append(lam * math.sqrt(n * (N - n)))
        else:
            J.append(lam * math.sqrt((n + 2 * k) * (N - n + 2 * k)))
    return _chain(J, lam, "shi", {"N": N, "k": k})


def multiarm_network(N1: int, N2: int, NA: int, lam: float = 1.0) -> SpinNetwork:
    """Input arm of ``N1`` sites, a hub, and ``NA`` identical output arms of
    ``N2`` sites.

    Bonds follow the perfect-transfer chain of length ``N1 + N2 + 1`` position by
    position; the hub-to-arm bonds are divided by ``sqrt(NA)`` so that the
    symmetric arm mode sees exactly the backbone chain.  Outputs are the arm
    ends, ordered by arm.
    """
    if min(N1, N2, NA) < 1:
        raise ValueError("N1, N2 and NA must all be >= 1")
    if lam <= 0:
        raise ValueError("scale must be positive")
    N = N1 + N2 + 1
    bond = [lam * math.sqrt(p * (N - p)) for p in range(1, N)]  # bond p joins p, p+1
    hub = N1 + 1
    edges = [(p, p + 1, bond[p - 1]) for p in range(1, hub)]
    ends = []
    for arm in range(NA):
        first = hub + arm * N2 + 1
        edges.append((hub, first, bond[hub - 1] / math.sqrt(NA)))
        for q in range(1, N2):
            edges.append((first + q - 1, first + q, bond[hub + q - 1]))
        ends.append(first + N2 - 1)
    n_sites = hub + NA * N2
    return SpinNetwork(tuple(range(1, n_sites + 1)), tuple(edges), lam, 1, tuple(ends),
                       False, "multiarm", {"N1": N1, "N2": N2, "NA": NA})


def attach_noninteracting(net: SpinNetwork) -> SpinNetwork:
    """Prepend an uncoupled qubit as site 0 (it still feels decoherence)."""
    if net.has_ni:
        raise ValueError("network already has a non-interacting qubit")
    if NI_SITE in net.sites:
        raise ValueError("site label 0 is taken")
    return SpinNetwork((NI_SITE,) + net.sites, net.edges, net.scale, net.input_site,
                       net.output_sites, True, net.kind, dict(net.params, ni=True))


@dataclass(frozen=True, eq=False)
class SingleExcitationHamiltonian:
    matrix: np.ndarray
    sites: tuple

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def hamiltonian(net: SpinNetwork) -> SingleExcitationHamiltonian:
    d = net.dim
    H = np.zeros((d, d), dtype=complex)
    for a, b, J in net.edges:
        i, j = net.position(a) - 1, net.position(b) - 1
        H[i, j] = J
        H[j, i] = J
    return SingleExcitationHamiltonian(H, net.sites)
