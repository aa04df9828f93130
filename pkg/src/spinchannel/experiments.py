"""Experiment configs, sweeps, figure bundles and the oracle verification suite."""

from __future__ import annotations

import csv
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .engine import (
    Decoherence,
    LindbladModel,
    Propagator,
    SubspaceState,
    build_generator,
    encode_input,
    evolve,
)
from .errors import ConfigError, NumericError
from .metrics import (
    average_fidelity,
    critical_gamma,
    excitation_fidelity,
    fidelity_curve,
    fidelity_readout,
    find_peak,
    fwhm,
    pair_concurrence,
    transfer_phase,
)
from .networks import (
    NI_SITE,
    SpinNetwork,
    attach_noninteracting,
    christandl_chain,
    hamiltonian,
    multiarm_network,
    shi_chain,
)

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "SPINCHANNEL_OUTPUT_DIR"

TASKS = ("evolve", "fidelity_curve", "avgF_curve", "peak", "fwhm", "gamma_c",
         "distribute", "create_w", "verify")
_GRID_TASKS = ("evolve", "fidelity_curve", "avgF_curve", "distribute", "create_w")


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


# ---------------------------------------------------------------------------
# config


@dataclass(frozen=True)
class TimeGrid:
    lo: float
    hi: float
    points: int

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    task: str
    network: dict
    kind: str = "dissipative"
    gammas: tuple = (0.0,)
    lam: float = 1.0
    time: TimeGrid | None = None
    peak_index: int | None = None
    m: int | None = None
    n: int | None = None
    correct_phase: bool = False
    theta: float = math.pi
    phi: float = 0.0
    quantity: str | None = None
    at: str = "peak"
    quick: bool = False
    output: str | None = None

    def build_network(self) -> SpinNetwork:
        return network_from_spec(self.network, self.lam)


def network_from_spec(spec: dict, lam: float = 1.0) -> SpinNetwork:
    """Build a network from its config table.

    ``type`` is one of christandl (N), shi (N, k), multiarm (N1, N2, NA),
    with_ni (N plus optional ``base`` = christandl|shi and k) or custom
    (explicit sites/edges as produced by :meth:`SpinNetwork.to_dict`).
    """
    kind = spec.get("type")
    lam = float(spec.get("lambda", lam))
    try:
        if kind == "christandl":
            return christandl_chain(int(spec["N"]), lam)
        if kind == "shi":
            return shi_chain(int(spec["N"]), int(spec.get("k", 0)), lam)
        if kind == "multiarm":
            return multiarm_network(int(spec["N1"]), int(spec["N2"]), int(spec["NA"]), lam)
        if kind == "with_ni":
            base = spec.get("base", "christandl")
            inner = {**spec, "type": base}
            return attach_noninteracting(network_from_spec(inner, lam))
        if kind == "custom":
            return SpinNetwork.from_dict(spec)
    except KeyError as exc:
        raise ConfigError(f"network of type {kind!r} needs field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"network: {exc}") from None
    raise ConfigError(f"unknown network type {kind!r}")


def _field(table: dict, key: str, where: str, typ, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError(f"{where}: missing field '{key}'")
        return default
    val = table[key]
    if typ is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, typ) or (typ is int and isinstance(val, bool)):
        raise ConfigError(f"{where}.{key}: expected {typ.__name__}, got {val!r}")
    return val


def parse_experiment(table: dict, where: str, defaults: dict | None = None) -> ExperimentConfig:
    defaults = defaults or {}
    table = {**defaults, **table}
    task = _field(table, "task", where, str, required=True)
    if task not in TASKS:
        raise ConfigError(f"{where}.task: unknown task {task!r} (expected one of {', '.join(TASKS)})")
    name = _field(table, "name", where, str, default=f"{task}")
    lam = _field(table, "lambda", where, float, default=1.0)
    if lam <= 0:
        raise ConfigError(f"{where}.lambda: must be positive")

    network = table.get("network", {"type": "christandl", "N": 2})
    if task != "verify" and "network" not in table:
        raise ConfigError(f"{where}: missing table 'network'")
    if not isinstance(network, dict):
        raise ConfigError(f"{where}.network: expected a table")

    model = table.get("model", {})
    if not isinstance(model, dict):
        raise ConfigError(f"{where}.model: expected a table")
    kind = _field(model, "kind", f"{where}.model", str, default="dissipative")
    try:
        Decoherence(kind)
    except ValueError:
        raise ConfigError(f"{where}.model.kind: unknown decoherence {kind!r}") from None
    gam = model.get("gamma", 0.0)
    gammas = tuple(gam) if isinstance(gam, list) else (gam,)
    if not gammas:
        raise ConfigError(f"{where}.model.gamma: empty list")
    for g in gammas:
        if isinstance(g, bool) or not isinstance(g, (int, float)) or not math.isfinite(g) or g < 0:
            raise ConfigError(f"{where}.model.gamma: values must be finite and >= 0, got {g!r}")
    gammas = tuple(float(g) for g in gammas)

    grid = None
    if "time" in table:
        tt = table["time"]
        if not isinstance(tt, dict):
            raise ConfigError(f"{where}.time: expected a table")
        lo = _field(tt, "lo", f"{where}.time", float, default=0.0)
        hi = _field(tt, "hi", f"{where}.time", float, required=True)
        pts = _field(tt, "points", f"{where}.time", int, required=True)
        if pts < 1:
            raise ConfigError(f"{where}.time.points: grid must be non-empty")
        if lo < 0 or hi < lo:
            raise ConfigError(f"{where}.time: need 0 <= lo <= hi")
        grid = TimeGrid(lo, hi, pts)
    k = _field(table, "peak_index", where, int)
    if k is not None and k < 1:
        raise ConfigError(f"{where}.peak_index: must be >= 1")
    if task in _GRID_TASKS and grid is None and k is None:
        raise ConfigError(f"{where}: task {task!r} needs a 'time' table or 'peak_index'")

    sites = table.get("sites", {})
    if not isinstance(sites, dict):
        raise ConfigError(f"{where}.sites: expected a table")
    quantity = _field(table, "quantity", where, str)
    if quantity is not None and quantity not in ("f", "F", "C"):
        raise ConfigError(f"{where}.quantity: expected 'f', 'F' or 'C'")
    at = _field(table, "at", where, str, default="peak")
    if at not in ("peak", "t0"):
        raise ConfigError(f"{where}.at: expected 'peak' or 't0'")
    output = _field(table, "output", where, str)

    cfg = ExperimentConfig(
        name=name, task=task, network=network, kind=kind, gammas=gammas, lam=lam,
        time=grid, peak_index=k,
        m=_field(sites, "m", f"{where}.sites", int), n=_field(sites, "n", f"{where}.sites", int),
        correct_phase=_field(table, "correct_phase", where, bool, default=False),
        theta=_field(table, "theta", where, float, default=math.pi),
        phi=_field(table, "phi", where, float, default=0.0),
        quantity=quantity, at=at, quick=_field(table, "quick", where, bool, default=False),
        output=output,
    )
    if task != "verify":
        try:
            net = cfg.build_network()
        except ConfigError as exc:
            raise ConfigError(f"{where}.{exc}") from None
        for label, val in (("m", cfg.m), ("n", cfg.n)):
            if val is not None and val not in net.sites:
                raise ConfigError(f"{where}.sites.{label}: site {val} not in network")
        if task == "distribute" and not net.has_ni:
            raise ConfigError(f"{where}: task 'distribute' needs a network of type 'with_ni'")
        if task == "create_w" and len(net.output_sites) < 2:
            raise ConfigError(f"{where}: task 'create_w' needs a multiarm network with NA >= 2")
        if task == "gamma_c" and kind == "none":
            raise ConfigError(f"{where}.model.kind: gamma_c needs a decoherence channel")
    return cfg


def load_config(path) -> list[ExperimentConfig]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    experiments = data.get("experiment")
    if isinstance(experiments, dict):
        experiments = [experiments]
    if not experiments:
        raise ConfigError(f"{path}: no [[experiment]] tables")
    defaults = data.get("defaults", {})
    if not isinstance(defaults, dict):
        raise ConfigError(f"{path}: 'defaults' must be a table")
    out = [parse_experiment(tbl, f"experiment[{i}]", defaults) for i, tbl in enumerate(experiments)]
    names = [c.name for c in out]
    if len(set(names)) != len(names):
        raise ConfigError(f"{path}: experiment names must be unique")
    return out


# ---------------------------------------------------------------------------
# csv


def format_value(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.15g}"


def write_csv(path, header: Iterable[str], rows: Iterable[Iterable]) -> Path:
    """Comma-separated, 15 significant digits, LF line endings; rejects NaN/inf."""
    header = list(header)
    rows = [list(r) for r in rows]
    for r in rows:
        if len(r) != len(header):
            raise ValueError(f"row of length {len(r)} under a {len(header)}-column header")
        for x in r:
            if not isinstance(x, str) and not math.isfinite(float(x)):
                raise NumericError(f"non-finite value in row {r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([format_value(x) for x in r])
    return path


# ---------------------------------------------------------------------------
# task implementations


@contextmanager
def _pool(threads: int):
    if threads <= 1:
        yield None
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            yield ex


def _map(pool, fn, items):
    items = list(items)
    if pool is None:
        return [fn(x) for x in items]
    return list(pool.map(fn, items))


def _generator(net: SpinNetwork, kind: str, gamma: float):
    g = build_generator(hamiltonian(net), LindbladModel.build(kind, gamma, net.n_sites))
    g.spectral  # diagonalize once, before any worker threads share it
    return g


def _times(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.time is not None:
        return cfg.time.values()
    return np.array([(2 * cfg.peak_index - 1) * math.pi / (2 * cfg.lam)])


def bell_input(net: SpinNetwork) -> SubspaceState:
    """(|01> + |10>)/sqrt(2) on (non-interacting qubit, input site)."""
    return SubspaceState.from_amplitudes({NI_SITE: 1.0, net.input_site: 1.0}, net.sites)


def pair_for(net: SpinNetwork) -> tuple:
    if net.has_ni:
        return NI_SITE, net.output_site
    if len(net.output_sites) >= 2:
        return net.output_sites[0], net.output_sites[1]
    raise ConfigError("concurrence needs a network with an NI qubit or two output arms")


def concurrence_curve(g, net: SpinNetwork):
    a, b = pair_for(net)
    if net.has_ni:
        s0 = bell_input(net)
    else:
        s0 = encode_input(net.n_sites, net.position(net.input_site), math.pi, 0.0, net.sites)
    return lambda t: pair_concurrence(evolve(Propagator(g, t), s0), a, b)


def _quantity_curve(cfg, g, net, m, n, quantity):
    if quantity == "C":
        return concurrence_curve(g, net)
    return fidelity_curve(g, m, n, quantity, cfg.correct_phase)


def _task_rows(cfg: ExperimentConfig, pool) -> tuple[list[str], list[list]]:
    if cfg.task == "verify":
        results = verify(quick=cfg.quick)
        return (["check", "residual", "tolerance", "passed"],
                [[r.check, r.residual, r.tolerance, r.passed] for r in results])

    net = cfg.build_network()
    m = cfg.m if cfg.m is not None else net.input_site
    n = cfg.n if cfg.n is not None else net.output_site
    N = net.n_interacting
    t0 = math.pi / (2 * cfg.lam)

    if cfg.task == "gamma_c":
        def one(_):
            cp = critical_gamma(net, cfg.kind, cfg.correct_phase, m=m, n=n, at=cfg.at)
            return [N, cp.value, cp.residual]
        return ["N", "gamma_c", "residual"], _map(pool, one, [None])

    rows: list[list] = []
    header: list[str]
    for gamma in cfg.gammas:
        g = _generator(net, cfg.kind, gamma)
        if cfg.task == "evolve":
            s0 = encode_input(net.n_sites, net.position(m), cfg.theta, cfg.phi, net.sites)
            if net.has_ni and m == net.input_site and cfg.theta == math.pi:
                s0 = bell_input(net)

            def point(t, g=g, s0=s0):
                s = evolve(Propagator(g, t), s0)
                pops = np.real(np.diag(s.matrix))
                return [gamma, t, float(np.real(np.trace(s.matrix)))] + list(pops)

            header = ["gamma", "t", "trace"] + [f"p_{s}" for s in net.sites] + ["p_vac"]
            rows += _map(pool, point, _times(cfg))
        elif cfg.task == "fidelity_curve":
            def point(t, g=g):
                r = fidelity_readout(Propagator(g, t), m, n, cfg.theta, cfg.phi, cfg.correct_phase)
                return [gamma, t, r.f, r.F]

            header = ["gamma", "t", "f", "F"]
            rows += _map(pool, point, _times(cfg))
        elif cfg.task == "avgF_curve":
            def point(t, g=g):
                p = Propagator(g, t)
                return [gamma, t, average_fidelity(p, m, n), average_fidelity(p, m, n, True),
                        math.cos(transfer_phase(p, m, n))]

            header = ["gamma", "t", "F", "F_corrected", "cos_alpha"]
            rows += _map(pool, point, _times(cfg))
        elif cfg.task in ("distribute", "create_w"):
            curve = concurrence_curve(g, net)
            header = ["gamma", "t", "C"]
            rows += _map(pool, lambda t, curve=curve: [gamma, t, curve(t)], _times(cfg))
        elif cfg.task in ("peak", "fwhm"):
            default_q = "C" if (net.has_ni or net.kind == "multiarm") else "f"
            q = cfg.quantity or default_q
            curve = _quantity_curve(cfg, g, net, m, n, q)
            k = cfg.peak_index or 1
            tk = (2 * k - 1) * t0
            pk = find_peak(curve, (tk - t0, tk + t0))
            if cfg.task == "peak":
                header = ["gamma", "N", "t_c", "value", "value_t0"]
                rows.append([gamma, N, pk.value, pk.peak, curve(tk)])
            else:
                base = 0.5 if q == "F" else 0.0
                w = fwhm(curve, pk.value, baseline=base, span=2 * t0)
                header = ["gamma", "N", "t1", "t2", "dt"]
                rows.append([gamma, N, w.bracket[0], w.bracket[1], w.value])
    return header, rows


def run_experiment(cfg: ExperimentConfig, out_dir=None, threads: int = 1) -> Path:
    out_dir = Path(out_dir) if out_dir is not None else default_output_dir()
    path = Path(cfg.output) if cfg.output else Path(f"{cfg.name}.csv")
    if not path.is_absolute():
        path = out_dir / path
    with _pool(threads) as pool:
        header, rows = _task_rows(cfg, pool)
    return write_csv(path, header, rows)


def apply_overrides(cfg: ExperimentConfig, lam: float | None = None,
                    gamma: float | None = None) -> ExperimentConfig:
    changes = {}
    if lam is not None:
        changes["lam"] = lam
        if "lambda" in cfg.network:
            changes["network"] = {**cfg.network, "lambda": lam}
    if gamma is not None:
        changes["gammas"] = (gamma,)
    return replace(cfg, **changes) if changes else cfg


# ---------------------------------------------------------------------------
# figures

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")


def _t0_table(kind: str, gamma: float, lam: float, Ns, ks, pool):
    """f(t0) and F(t0) (raw and phase-corrected) for every N and peak index k."""
    def one(N):
        net = christandl_chain(N, lam)
        g = _generator(net, kind, gamma)
        rows = []
        for k in ks:
            t = (2 * k - 1) * math.pi / (2 * lam)
            p = Propagator(g, t)
            rows.append([N, k, t / math.pi, excitation_fidelity(p, 1, N),
                         math.cos(transfer_phase(p, 1, N)),
                         average_fidelity(p, 1, N), average_fidelity(p, 1, N, True)])
        return rows
    return [r for rows in _map(pool, one, Ns) for r in rows]


def _peak_time(curve, lam):
    t0 = math.pi / (2 * lam)
    return find_peak(curve, (0.0, 2 * t0))


def figure(name: str, out_dir, lam: float = 1.0, gamma: float | None = None,
           quick: bool = False, threads: int = 1) -> list[Path]:
    """Write the CSV panels for one figure; returns the written paths."""
    if name not in FIGURES:
        raise ConfigError(f"unknown figure {name!r} (expected one of {', '.join(FIGURES)})")
    out = Path(out_dir)
    paths = []
    with _pool(threads) as pool:
        if name in ("fig1", "fig2"):
            kind = "dissipative" if name == "fig1" else "dephasing"
            gam = 0.1 if gamma is None else gamma
            Ns = range(2, 7) if quick else range(2, 21)
            ks = range(1, 4) if quick else range(1, 11)
            table = _t0_table(kind, gam, lam, Ns, ks, pool)
            paths.append(write_csv(out / f"{name}a.csv", ["N", "k", "t0_over_pi", "f"],
                                   [r[:4] for r in table]))
            paths.append(write_csv(out / f"{name}b.csv",
                                   ["N", "k", "t0_over_pi", "cos_alpha", "F", "F_corrected"],
                                   [r[:3] + r[4:] for r in table]))
            if name == "fig1":
                def tc(N):
                    g = _generator(christandl_chain(N, lam), kind, gam)
                    a = _peak_time(fidelity_curve(g, 1, N, "f"), lam).value
                    b = _peak_time(fidelity_curve(g, 1, N, "F", True), lam).value
                    return [N, a / math.pi, b / math.pi]
                paths.append(write_csv(out / "fig1_inset.csv", ["N", "tc_f_over_pi", "tc_F_over_pi"],
                                       _map(pool, tc, Ns)))
            else:
                paths.append(write_csv(out / "fig2_inset.csv",
                                       ["N", "k", "t0_over_pi", "F", "F_corrected"],
                                       [[r[0], r[1], r[2], r[5], r[6]] for r in table if r[0] == 4]))
        elif name == "fig3":
            Ns = range(2, 6) if quick else range(2, 13)

            def gc(N):
                cp = critical_gamma(christandl_chain(N, lam), "dephasing", True)
                return [N, cp.value]
            paths.append(write_csv(out / "fig3.csv", ["N", "gamma_c"], _map(pool, gc, Ns)))
        elif name == "fig4":
            gam = 0.1 if gamma is None else gamma
            Ns = range(2, 7) if quick else range(2, 21)

            def widths(N):
                row = [N]
                for kind in ("dissipative", "dephasing"):
                    g = _generator(christandl_chain(N, lam), kind, gam)
                    for q, base in (("f", 0.0), ("F", 0.5)):
                        curve = fidelity_curve(g, 1, N, q, True)
                        pk = _peak_time(curve, lam)
                        row.append(fwhm(curve, pk.value, base, span=math.pi / lam).value)
                return row
            paths.append(write_csv(out / "fig4.csv",
                                   ["N", "dt_f_dissipative", "dt_F_dissipative",
                                    "dt_f_dephasing", "dt_F_dephasing"], _map(pool, widths, Ns)))
        elif name == "fig5":
            gams = (0.1, 0.2, 0.3, 0.4, 0.5) if gamma is None else (gamma,)
            Ns = range(2, 6) if quick else range(2, 21)
            jobs = [(kind, gm, N) for kind in ("dissipative", "dephasing") for gm in gams for N in Ns]

            def dist(job):
                kind, gm, N = job
                net = attach_noninteracting(christandl_chain(N, lam))
                pk = _peak_time(concurrence_curve(_generator(net, kind, gm), net), lam)
                return [kind, gm, N, pk.value / math.pi, pk.peak]
            res = _map(pool, dist, jobs)
            paths.append(write_csv(out / "fig5a.csv", ["kind", "gamma", "N", "tc_over_pi"],
                                   [r[:4] for r in res]))
            paths.append(write_csv(out / "fig5b.csv", ["kind", "gamma", "N", "C_tc"],
                                   [r[:3] + r[4:] for r in res]))
            net = attach_noninteracting(christandl_chain(5, lam))
            gm = 0.1 if gamma is None else gamma
            curves = [concurrence_curve(_generator(net, k, gm), net) for k in ("dissipative", "dephasing")]
            ts = np.linspace(0.0, 3 * math.pi / lam, 61 if quick else 301)
            paths.append(write_csv(out / "fig5_inset.csv", ["t_over_pi", "C_dissipative", "C_dephasing"],
                                   [[t / math.pi, curves[0](t), curves[1](t)] for t in ts]))
        elif name == "fig6":
            gam = 0.3 if gamma is None else gamma
            N1s = range(1, 5) if quick else range(1, 21)
            jobs = [(kind, N1) for kind in ("dissipative", "dephasing") for N1 in N1s]

            def create(job):
                kind, N1 = job
                net = multiarm_network(N1, 1, 3, lam)
                pk = _peak_time(concurrence_curve(_generator(net, kind, gam), net), lam)
                return [kind, N1, pk.value / math.pi, pk.peak]
            res = _map(pool, create, jobs)
            paths.append(write_csv(out / "fig6a.csv", ["kind", "N1", "tc_over_pi"], [r[:3] for r in res]))
            paths.append(write_csv(out / "fig6b.csv", ["kind", "N1", "C_tc"],
                                   [r[:2] + r[3:] for r in res]))
    return paths


# ---------------------------------------------------------------------------
# oracle cross-checks


@dataclass(frozen=True)
class VerifyResult:
    check: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tolerance)


def verify(quick: bool = False) -> list[VerifyResult]:
    """Cross-check the engine against the independent oracles."""
    from . import oracles
    from .oracles import ClosedForm, closed_form

    results = []

    worst = 0.0
    for N in range(2, 9 if quick else 21):
        g = _generator(christandl_chain(N), "none", 0.0)
        worst = max(worst, abs(excitation_fidelity(Propagator(g, math.pi / 2), 1, N) - 1))
    results.append(VerifyResult("pst_unit_fidelity", worst, 1e-9))

    worst = 0.0
    ts = np.linspace(0, 3 * math.pi, 50 if quick else 200)
    for N in range(2, 6 if quick else 11):
        for gm in (0.1, 0.5):
            g = _generator(christandl_chain(N), "dissipative", gm)
            cf_f = ClosedForm("f_t_dissipative", N, gm)
            cf_F = ClosedForm("F_t_dissipative", N, gm)
            for t in ts:
                p = Propagator(g, t)
                worst = max(worst, abs(excitation_fidelity(p, 1, N) - closed_form(cf_f, t)),
                            abs(average_fidelity(p, 1, N) - closed_form(cf_F, t)))
    results.append(VerifyResult("dissipative_closed_form", worst, 1e-8))

    worst_rk = worst_bf = 0.0
    net = christandl_chain(3)
    H = hamiltonian(net)
    for kind in ("dissipative", "dephasing"):
        model = LindbladModel.build(kind, 0.1, 3)
        g = build_generator(H, model)
        U = Propagator(g, 1.0).matrix
        worst_rk = max(worst_rk, np.abs(U - oracles.rk4_propagator(H.matrix, model.jumps, 0.1, 1.0)).max())
        s0 = encode_input(3, 1, 1.1, 0.4)
        for t in (0.5, 1.5):
            full = oracles.brute_force_full(net, kind, 0.1, oracles.embed_subspace(s0.matrix), t)
            diff = oracles.project_subspace(full) - evolve(Propagator(g, t), s0).matrix
            worst_bf = max(worst_bf, np.abs(diff).max())
    results.append(VerifyResult("rk4_agreement", worst_rk, 1e-7))
    results.append(VerifyResult("full_space_agreement", worst_bf, 1e-9))

    worst = 0.0
    for N in range(2, 11):
        vals, vecs = oracles.christandl_eigensystem(N)
        Hm = hamiltonian(christandl_chain(N)).matrix
        worst = max(worst, np.abs(Hm @ vecs - vecs * vals).max())
    results.append(VerifyResult("eigensystem_recursion", worst, 1e-8))

    worst = 0.0
    for k in (1, 2, 3):
        g = _generator(shi_chain(2, k), "dissipative", 0.1)
        cf = ClosedForm("shi_n2_f", 2, 0.1, k=k)
        for t in np.linspace(0, math.pi, 25):
            worst = max(worst, abs(excitation_fidelity(Propagator(g, t), 1, 2) - closed_form(cf, t)))
    results.append(VerifyResult("shi_n2_closed_form", worst, 1e-8))

    worst = 0.0
    for kind in ("dissipative", "dephasing"):
        g = _generator(christandl_chain(5), kind, 0.3)
        for t in (0.7, 4.0):
            col = Propagator(g, t).matrix[:, -1]
            e = np.zeros_like(col)
            e[-1] = 1
            worst = max(worst, np.abs(col - e).max())
    results.append(VerifyResult("vacuum_column", worst, 1e-10))
    return results
