"""Fidelities, reduced states, concurrence and critical-point searches.

Site arguments are network labels (1..N for chains, 0 for an attached
non-interacting qubit); they are mapped to basis positions through the
``sites`` tuple carried by states and propagators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.optimize

from .engine import (
    Decoherence,
    LindbladModel,
    Propagator,
    SubspaceState,
    build_generator,
    encode_input,
    evolve,
    population_index,
    site_vacuum_index,
    vacuum_index,
    vacuum_site_index,
)
from .errors import BracketError, NoPeakError, NumericError, ThresholdError, ValidationError
from .networks import SpinNetwork, hamiltonian

CLASSICAL_FIDELITY = 2.0 / 3.0

_SIGMA_Y2 = np.array([[0, 0, 0, -1],
                      [0, 0, 1, 0],
                      [0, 1, 0, 0],
                      [-1, 0, 0, 0]], dtype=complex)


@dataclass(frozen=True)
class FidelityReadout:
    f: float
    F: float
    alpha: float
    correct_phase: bool


@dataclass(frozen=True)
class CriticalPoint:
    """Result of a peak, half-maximum or threshold search.

    ``residual`` is the remaining uncertainty of the search: the final
    bracket width for peaks, the curve mismatch at the half-maximum crossings,
    and the bracket width in gamma for thresholds.
    """

    kind: str  # "t_c" | "fwhm" | "gamma_c"
    value: float
    bracket: tuple
    residual: float
    peak: float | None = None


def _pos(sites: tuple, site) -> int:
    try:
        return sites.index(site)
    except ValueError:
        raise IndexError(f"site {site!r} not in {sites}") from None


# ---------------------------------------------------------------------------
# reduced states


def reduced_1q(s: SubspaceState, n) -> np.ndarray:
    """Reduced state of site ``n`` in the basis {|0>, |1>}."""
    p = s.position(n)
    v = s.dim - 1
    rho = s.matrix
    return np.array([[1 - rho[p, p], rho[v, p]],
                     [rho[p, v], rho[p, p]]], dtype=complex)


def reduced_2q(s: SubspaceState, a, b) -> np.ndarray:
    """Reduced state of sites ``(a, b)`` in the basis {|00>, |01>, |10>, |11>}.

    Only one excitation is ever present, so |11> is empty.
    """
    if a == b:
        raise ValueError("pair sites must differ")
    i, j = s.position(a), s.position(b)
    v = s.dim - 1
    rho = s.matrix
    out = np.zeros((4, 4), dtype=complex)
    out[0, 0] = 1 - rho[i, i] - rho[j, j]
    out[1, 1] = rho[j, j]
    out[2, 2] = rho[i, i]
    out[2, 1] = rho[i, j]
    out[0, 1] = rho[v, j]
    out[0, 2] = rho[v, i]
    out[1, 2] = np.conj(out[2, 1])
    out[1, 0] = np.conj(out[0, 1])
    out[2, 0] = np.conj(out[0, 2])
    return out


# ---------------------------------------------------------------------------
# fidelities


def transfer_fidelity(s: SubspaceState, n, theta: float, phi: float,
                      phase: float = 0.0) -> float:
    """Overlap of the input qubit state with the reduced state of site ``n``.

    ``phase`` applies ``diag(1, e^{-i phase})`` to the receiver first, which is
    how a phase flip or a z-field would undo an accumulated transfer phase.
    """
    p = s.position(n)
    v = s.dim - 1
    rho = s.matrix
    rot = np.exp(1j * phase)
    coh = np.exp(1j * phi) * rho[v, p] * rot + np.exp(-1j * phi) * rho[p, v] / rot
    val = math.cos(theta / 2) ** 2 - rho[p, p] * math.cos(theta) + 0.5 * coh * math.sin(theta)
    if abs(val.imag) > 1e-10:
        raise NumericError(f"fidelity has imaginary part {val.imag:.3g}; state not Hermitian")
    return float(val.real)


def excitation_fidelity(p: Propagator, m, n) -> float:
    """Population reaching ``n`` from a single excitation on ``m``."""
    d = p.dim
    i, j = _pos(p.sites, n), _pos(p.sites, m)
    return p.element(population_index(d, i), population_index(d, j)).real


def transfer_phase(p: Propagator, m, n) -> float:
    """Argument of the ``rho[m, vac] -> rho[n, vac]`` propagator element."""
    d = p.dim
    i, j = _pos(p.sites, n), _pos(p.sites, m)
    return float(np.angle(p.element(site_vacuum_index(d, i), site_vacuum_index(d, j))))


def average_fidelity(p: Propagator, m, n, correct_phase: bool = False,
                     simplified: bool = False) -> float:
    """Bloch-sphere average of the transfer fidelity from ``m`` to ``n``.

    Four propagator elements suffice::

        F = (U[vn,vm] + U[nv,mv])/6 + U[nn,mm]/6 - U[nn,vv]/6 + 1/2

    ``simplified`` drops the ``U[nn,vv]`` term, which vanishes because the
    vacuum never feeds the sites.  With ``correct_phase`` the coherence pair
    enters through its modulus, i.e. cos(alpha) -> 1.
    """
    d = p.dim
    i, j = _pos(p.sites, n), _pos(p.sites, m)
    u_vv = p.element(vacuum_site_index(d, i), vacuum_site_index(d, j))
    u_ss = p.element(site_vacuum_index(d, i), site_vacuum_index(d, j))
    u_pop = p.element(population_index(d, i), population_index(d, j))
    coherence = abs(u_vv) + abs(u_ss) if correct_phase else u_vv + u_ss
    F = coherence / 6 + u_pop / 6 + 0.5
    if not simplified:
        F -= p.element(population_index(d, i), vacuum_index(d)) / 6
    return float(np.real(F))


def fidelity_readout(p: Propagator, m, n, theta: float = math.pi, phi: float = 0.0,
                     correct_phase: bool = False) -> FidelityReadout:
    alpha = transfer_phase(p, m, n)
    s0 = encode_input(len(p.sites), _pos(p.sites, m) + 1, theta, phi, p.sites)
    f = transfer_fidelity(evolve(p, s0), n, theta, phi, alpha if correct_phase else 0.0)
    F = average_fidelity(p, m, n, correct_phase)
    return FidelityReadout(f, F, alpha, correct_phase)


# ---------------------------------------------------------------------------
# concurrence


def _check_density(rho: np.ndarray, tol: float) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValidationError(f"expected a 4x4 matrix, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ValidationError("matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValidationError(f"trace {np.trace(rho).real:.6g} differs from 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -tol:
        raise ValidationError("matrix has negative eigenvalues")
    return rho


def concurrence(rho4: np.ndarray, tol: float = 1e-8) -> float:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``.

    When |11> is unpopulated (every state reachable from one excitation) the
    result reduces to ``2 |<10|rho|01>|`` and is returned in that form: the
    generic route takes square roots of near-zero eigenvalues of R and loses
    about half the digits.
    """
    rho = _check_density(rho4, tol)
    if np.abs(rho[3]).max() <= 1e-14:
        bound = math.sqrt(max(rho[1, 1].real, 0.0) * max(rho[2, 2].real, 0.0))
        return float(min(1.0, 2 * min(abs(rho[2, 1]), bound)))
    R = rho @ _SIGMA_Y2 @ rho.conj() @ _SIGMA_Y2
    ev = np.sort(np.sqrt(np.clip(np.linalg.eigvals(R).real, 0.0, None)))[::-1]
    return float(min(1.0, max(0.0, ev[0] - ev[1] - ev[2] - ev[3])))


def pair_concurrence(s: SubspaceState, a, b) -> float:
    return concurrence(reduced_2q(s, a, b))


# ---------------------------------------------------------------------------
# peak / width / threshold searches

_INVPHI = (math.sqrt(5) - 1) / 2


def _golden_max(f: Callable[[float], float], a: float, b: float, tol: float):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b), a, b


def find_peak(curve: Callable[[float], float], window: tuple, n_grid: int = 401,
              tol: float = 1e-7) -> CriticalPoint:
    """Locate the maximum of ``curve`` inside ``window``.

    Dense grid first, then golden-section refinement on the grid cell pair
    around the best sample.
    """
    lo, hi = window
    if not hi > lo:
        raise ValueError(f"empty window {window}")
    grid = np.linspace(lo, hi, max(n_grid, 3))
    vals = np.array([curve(t) for t in grid])
    if not np.all(np.isfinite(vals)):
        raise NumericError("curve returned non-finite values")
    if vals.max() - vals.min() < 1e-13:
        raise NoPeakError(f"curve is flat on {window}")
    k = int(np.argmax(vals))
    if k == 0 or k == len(grid) - 1:
        raise NoPeakError(f"maximum sits on the window edge at t={grid[k]:.6g}")
    t_c, a, b = _golden_max(curve, grid[k - 1], grid[k + 1], tol)
    return CriticalPoint("t_c", t_c, (float(grid[k - 1]), float(grid[k + 1])), b - a,
                         float(curve(t_c)))


def _half_crossing(g: Callable[[float], float], t_c: float, step: float, limit: float,
                   xtol: float) -> float:
    prev = t_c
    t = t_c
    while True:
        t = t + step
        if (step < 0 and t < limit) or (step > 0 and t > limit):
            t = limit
        if g(t) < 0:
            a, b = sorted((prev, t))
            return scipy.optimize.bisect(g, a, b, xtol=xtol)
        if t == limit:
            raise BracketError("half maximum not reached within one period of the peak")
        prev = t


def fwhm(curve: Callable[[float], float], t_c: float, baseline: float = 0.0,
         span: float = math.pi, n_scan: int = 400, xtol: float = 1e-10) -> CriticalPoint:
    """Full width of the peak at ``t_c`` where the curve drops halfway to ``baseline``.

    The crossings are first bracketed by stepping outward from ``t_c`` (never
    further than ``span`` and never below t=0), then located by bisection.
    """
    peak = float(curve(t_c))
    if peak - baseline <= 0:
        raise ValueError("peak must lie above the baseline")
    half = baseline + 0.5 * (peak - baseline)

    def g(t):
        return curve(t) - half

    step = span / n_scan
    t1 = _half_crossing(g, t_c, -step, max(0.0, t_c - span), xtol)
    t2 = _half_crossing(g, t_c, step, t_c + span, xtol)
    resid = max(abs(g(t1)), abs(g(t2)))
    return CriticalPoint("fwhm", t2 - t1, (t1, t2), resid, peak)


def fidelity_curve(g, m, n, quantity: str = "f", correct_phase: bool = False):
    """``t -> f(t)`` (excitation) or ``t -> F(t)`` (average) for generator ``g``."""
    if quantity == "f":
        return lambda t: excitation_fidelity(Propagator(g, t), m, n)
    if quantity == "F":
        return lambda t: average_fidelity(Propagator(g, t), m, n, correct_phase)
    raise ValueError(f"unknown quantity {quantity!r}")


def critical_gamma(net: SpinNetwork, kind, correct_phase: bool = True, *,
                   m=None, n=None, at: str = "peak", gamma_max: float = 10.0,
                   tol: float = 1e-4, n_grid: int = 401) -> CriticalPoint:
    """Largest decay rate for which the average fidelity still beats 2/3.

    ``at="peak"`` uses the maximum of F over the first transfer window
    ``(0, pi/lam)``; ``at="t0"`` evaluates F at ``t0 = pi/(2 lam)``.
    """
    if at not in ("peak", "t0"):
        raise ValueError(f"unknown evaluation point {at!r}")
    kind = Decoherence(kind)
    if kind is Decoherence.NONE:
        raise ValueError("a decoherence channel is required")
    m = net.input_site if m is None else m
    n = net.output_site if n is None else n
    H = hamiltonian(net)
    t0 = math.pi / (2 * net.scale)

    def margin(gamma: float) -> float:
        g = build_generator(H, LindbladModel.build(kind, gamma, net.n_sites))
        curve = fidelity_curve(g, m, n, "F", correct_phase)
        if at == "t0":
            return curve(t0) - CLASSICAL_FIDELITY
        try:
            return find_peak(curve, (0.0, 2 * t0), n_grid).peak - CLASSICAL_FIDELITY
        except NoPeakError:
            # overdamped: no interior peak, the window maximum decides
            grid = np.linspace(0.0, 2 * t0, n_grid)
            return max(curve(t) for t in grid) - CLASSICAL_FIDELITY

    lo_val = margin(0.0)
    hi_val = margin(gamma_max)
    if not (lo_val > 0 > hi_val):
        raise ThresholdError(
            f"no sign change of F - 2/3 on [0, {gamma_max}] ({lo_val:.4g}, {hi_val:.4g})")
    root, info = scipy.optimize.bisect(margin, 0.0, gamma_max, xtol=tol, full_output=True)
    if not info.converged:
        raise NumericError("bisection for the critical rate did not converge")
    return CriticalPoint("gamma_c", root, (max(0.0, root - tol), root + tol), tol)
