"""Monte Carlo size and power experiments and figure reproduction.

Replicate ``k`` of an experiment always draws from ``RngStream(master_seed, k)``,
whatever the concentration, so curves over a tau grid use common random
numbers and results do not depend on the number of workers.
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from . import limlaw
from .linalg import jacobi_eigh
from .models import WATSON, AngularFunction, AxialModel, AxialSampler
from .numerics import (
    RngStream,
    chisq_quantile,
    noncentral_chisq_pdf,
    normal_quantile,
    std_normal_pdf,
)
from .svg import emit_svg
from .teststats import bingham_df, gamma_scalar

__all__ = [
    "ExperimentSpec",
    "PowerRow",
    "PowerCurve",
    "KdeCurve",
    "simulate_statistics",
    "critical_values",
    "run_size_experiment",
    "run_power_experiment",
    "kde",
    "bw_nrd0",
    "histogram",
    "replicate_figure",
    "FIGURE_CONFIGS",
]

STAT_NAMES = ("specified", "bingham", "t_plus", "t_minus", "t_pm", "rayleigh")
_TEST_STAT = {
    "specified_right": "specified",
    "specified_left": "specified",
    "specified_two_sided": "specified",
    "bingham": "bingham",
    "t_plus": "t_plus",
    "t_minus": "t_minus",
    "t_pm": "t_pm",
    "rayleigh": "rayleigh",
}
_CHUNK = 64


@dataclass
class ExperimentSpec:
    """Monte Carlo design; ``kappa = tau * p / sqrt(n)`` about ``theta = e_1``."""

    p: int
    n: int
    tau_grid: tuple = (0.0,)
    tests: tuple = ("specified_right", "bingham", "t_plus")
    alpha: float = 0.05
    replicates: int = 2000
    master_seed: int = 0
    f: AngularFunction = WATSON
    crit_m: int = limlaw.DEFAULT_CRIT_M
    asym_m: int = limlaw.DEFAULT_POWER_M
    workers: int = 1

    def __post_init__(self):
        self.tau_grid = tuple(float(t) for t in self.tau_grid)
        self.tests = tuple(self.tests)
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not all(math.isfinite(t) for t in self.tau_grid):
            raise ValueError("tau grid must be finite")
        for name in self.tests:
            if name not in _TEST_STAT:
                raise ValueError(f"unknown test {name!r}")
        for tau in self.tau_grid:
            self.model(tau)  # positivity check

    def kappa(self, tau: float) -> float:
        return tau * self.p / math.sqrt(self.n)

    def model(self, tau: float) -> AxialModel:
        return AxialModel.standard(self.p, self.kappa(tau), self.f)


@dataclass(frozen=True)
class PowerRow:
    test: str
    tau: float
    n: int
    M: int
    freq: float
    se: float
    asym_power: float


@dataclass
class PowerCurve:
    spec: ExperimentSpec
    rows: list = field(default_factory=list)

    def get(self, test, tau) -> PowerRow:
        for r in self.rows:
            if r.test == test and r.tau == float(tau):
                return r
        raise KeyError((test, tau))

    def write(self, fh) -> None:
        fh.write(f"# seed={self.spec.master_seed} p={self.spec.p} alpha={self.spec.alpha!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["test", "tau", "n", "M", "freq", "se", "asym_power"])
        for r in self.rows:
            w.writerow([r.test, repr(float(r.tau)), r.n, r.M, repr(float(r.freq)),
                        repr(float(r.se)), repr(float(r.asym_power))])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            self.write(fh)


@dataclass(frozen=True)
class KdeCurve:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float

    def to_csv(self, path) -> None:
        _write_columns(path, ("grid", "density"), (self.grid, self.density))


def _write_columns(path, names, cols):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])


def _replicate_block(sampler, n, seed, start, stop, p):
    S = np.empty((stop - start, p, p))
    xbar = np.empty((stop - start, p))
    for k in range(start, stop):
        x = sampler.draw(n, RngStream(seed, k))
        S[k - start] = x.T @ x / n
        xbar[k - start] = x.mean(axis=0)
    return S, xbar


def simulate_statistics(p, n, tau, replicates, master_seed=0, f=WATSON, workers=1):
    """Values of every statistic over ``replicates`` Monte Carlo samples.

    Returns a dict keyed by ``STAT_NAMES``; ``"specified"`` is ``T_theta``
    at the true axis ``theta = e_1``.
    """
    model = AxialModel.standard(p, tau * p / math.sqrt(n), f)
    sampler = AxialSampler(model)
    bounds = [(s, min(s + _CHUNK, replicates)) for s in range(0, replicates, _CHUNK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda b: _replicate_block(sampler, n, master_seed, *b, p), bounds))
    else:
        parts = [_replicate_block(sampler, n, master_seed, *b, p) for b in bounds]
    S = np.concatenate([s for s, _ in parts])
    xbar = np.concatenate([x for _, x in parts])
    S = 0.5 * (S + S.transpose(0, 2, 1))
    w = jacobi_eigh(S, vectors=False)
    sn = math.sqrt(n)
    tp = sn * (p * w[:, 0] - 1.0)
    tm = -sn * (p * w[:, -1] - 1.0)
    return {
        "specified": sn * (p * S[:, 0, 0] - 1.0) / math.sqrt(gamma_scalar(p)),
        "bingham": 0.5 * n * p * (p + 2) * (np.einsum("bij,bij->b", S, S) - 1.0 / p),
        "t_plus": tp,
        "t_minus": tm,
        "t_pm": np.maximum(tp, tm),
        "rayleigh": n * p * np.einsum("bi,bi->b", xbar, xbar),
    }


def critical_values(tests, p, alpha, crit_m=limlaw.DEFAULT_CRIT_M, crit_seed=0):
    """Rejection thresholds; each test rejects when its statistic exceeds ``crit``.

    The left-sided specified test is handled by negating its statistic.
    """
    out = {}
    for name in tests:
        if name in ("specified_right", "specified_left"):
            out[name] = normal_quantile(alpha)
        elif name == "specified_two_sided":
            out[name] = normal_quantile(alpha / 2.0)
        elif name == "bingham":
            out[name] = chisq_quantile(alpha, bingham_df(p))
        elif name == "rayleigh":
            out[name] = chisq_quantile(alpha, p)
        else:
            out[name] = limlaw.default_crit(name, p, alpha, crit_m, crit_seed)
    return out


def rejections(stats, crits):
    """Boolean rejection arrays per test."""
    out = {}
    for name, c in crits.items():
        v = stats[_TEST_STAT[name]]
        if name == "specified_left":
            v = -v
        elif name == "specified_two_sided":
            v = np.abs(v)
        out[name] = v > c
    return out


def asymptotic_power(name, p, tau, alpha, crit, asym_m=limlaw.DEFAULT_POWER_M, seed=0):
    if name.startswith("specified_"):
        return limlaw.power_specified(p, tau, alpha, name[len("specified_"):])
    if name == "bingham":
        return limlaw.power_bingham(p, tau, alpha)
    if name == "rayleigh":
        # the mean stays zero under axial alternatives, so the null limit persists
        return alpha
    return limlaw.power_eigen_mc(name, p, tau, alpha, m=asym_m, seed=seed, crit=crit)


def run_power_experiment(spec: ExperimentSpec) -> PowerCurve:
    """Rejection frequencies with Monte Carlo errors and asymptotic powers."""
    crits = critical_values(spec.tests, spec.p, spec.alpha, spec.crit_m, spec.master_seed + 1)
    curve = PowerCurve(spec)
    M = spec.replicates
    for tau in spec.tau_grid:
        stats = simulate_statistics(spec.p, spec.n, tau, M, spec.master_seed, spec.f, spec.workers)
        rej = rejections(stats, crits)
        for name in spec.tests:
            freq = float(np.mean(rej[name]))
            curve.rows.append(PowerRow(
                name, tau, spec.n, M, freq, math.sqrt(freq * (1.0 - freq) / M),
                asymptotic_power(name, spec.p, tau, spec.alpha, crits[name], spec.asym_m,
                                 spec.master_seed + 2)))
    return curve


def run_size_experiment(spec: ExperimentSpec) -> PowerCurve:
    """Empirical sizes, i.e. the tau = 0 slice of :func:`run_power_experiment`."""
    if 0.0 not in spec.tau_grid:
        raise ValueError("size experiments need tau = 0 in the grid")
    sub = ExperimentSpec(**{**spec.__dict__, "tau_grid": (0.0,)})
    return run_power_experiment(sub)


def bw_nrd0(values) -> float:
    """Silverman's rule of thumb ``0.9 min(sd, IQR/1.34) n^(-1/5)`` with R's fallbacks."""
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two values")
    sd = float(np.std(x, ddof=1))
    q75, q25 = np.quantile(x, [0.75, 0.25])
    lo = min(sd, (q75 - q25) / 1.34)
    if lo <= 0:
        lo = sd or abs(float(x[0])) or 1.0
    return 0.9 * lo * x.size ** -0.2


def kde(values, n_grid=512, cut=3.0) -> KdeCurve:
    """Gaussian kernel density estimate on ``n_grid`` points over ``[min - 3bw, max + 3bw]``."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size < 2 or np.all(x == x[0]):
        raise ValueError("KDE needs at least two distinct values")
    bw = bw_nrd0(x)
    grid = np.linspace(x.min() - cut * bw, x.max() + cut * bw, n_grid)
    if x.size > _DIRECT_KDE_MAX:
        return KdeCurve(grid, _binned_density(x, grid, bw), bw)
    dens = np.zeros(n_grid)
    for start in range(0, x.size, 8192):
        chunk = x[start:start + 8192]
        dens += std_normal_pdf((grid[:, None] - chunk[None, :]) / bw).sum(axis=1)
    return KdeCurve(grid, dens / (x.size * bw), bw)


_DIRECT_KDE_MAX = 20_000


def _binned_density(x, grid, bw, n_fine=1 << 13):
    """Linear binning onto a fine grid followed by FFT convolution with the kernel."""
    lo, hi = grid[0], grid[-1]
    delta = (hi - lo) / (n_fine - 1)
    pos = (x - lo) / delta
    i = np.clip(np.floor(pos).astype(np.int64), 0, n_fine - 2)
    w = pos - i
    counts = (np.bincount(i, 1.0 - w, n_fine) + np.bincount(i + 1, w, n_fine))
    half = min(n_fine - 1, int(math.ceil(8.0 * bw / delta)))
    kern = std_normal_pdf(np.arange(-half, half + 1) * delta / bw)
    fine = fftconvolve(counts, kern, mode="same") / (x.size * bw)
    return np.interp(grid, lo + delta * np.arange(n_fine), np.clip(fine, 0.0, None))


def histogram(values):
    """Freedman-Diaconis histogram; returns ``(bin_left, bin_right, count)``."""
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins="fd")
    return edges[:-1], edges[1:], counts


# --------------------------------------------------------------------------
# figure reproduction

FIGURE_CONFIGS = {
    1: {"paper": {"panels": [(3, 100), (3, 1000), (10, 100), (10, 1000)], "M": 5000},
        "desk": {"panels": [(3, 100), (3, 1000), (10, 100), (10, 1000)], "M": 2000},
        "taus": (-2.0, -1.0, 0.0, 1.0, 2.0)},
    2: {"paper": {"panels": [(3, 2000), (10, 10000)], "M": 5000},
        "desk": {"panels": [(3, 2000), (10, 2000)], "M": 2000},
        "taus": (-4.0, -3.0, 0.0, 3.0, 4.0)},
    3: {"paper": {"panels": [(3, 2000), (10, 10000)], "M": 5000, "m": 1_000_000},
        "desk": {"panels": [(3, 2000), (10, 2000)], "M": 2000, "m": 200_000},
        "taus": (-4.0, -3.0, 0.0, 3.0, 4.0)},
    4: {"paper": {"panels": [(3, 200), (3, 20000), (10, 200), (10, 20000)], "M": 2000},
        "desk": {"panels": [(3, 200), (3, 2000), (10, 200), (10, 2000)], "M": 2000},
        "taus": tuple(0.8 * l for l in range(6))},
}


def _tag(tau):
    return f"{tau:+.1f}".replace("+", "p").replace("-", "m").replace(".", "_")


class _Manifest:
    def __init__(self, out_dir, fig_id, scale, seed):
        self.out_dir = out_dir
        self.data = {"figure": fig_id, "scale": scale, "seed": seed, "artifacts": []}

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def add(self, name, kind, **meta):
        self.data["artifacts"].append({"path": name, "kind": kind, **meta})

    def write(self):
        with open(self.path("manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(self.data, fh, indent=2)
        return self.data


def _null_histogram(man, name, values, seed):
    left, right, counts = histogram(values)
    _write_columns(man.path(name), ("bin_left", "bin_right", "count"), (left, right, counts))
    man.add(name, "histogram", seed=seed)
    width = right - left
    return {"x": np.append(left, right[-1]), "y": counts / (counts.sum() * width),
            "style": "step", "label": "histogram tau=0"}


def _kde_with_reference(man, stem, values, ref_fn, seed, color):
    k = kde(values)
    k.to_csv(man.path(stem + "_kde.csv"))
    man.add(stem + "_kde.csv", "kde", seed=seed, bandwidth=k.bandwidth)
    ref = ref_fn(k.grid)
    _write_columns(man.path(stem + "_ref.csv"), ("grid", "density"), (k.grid, ref))
    man.add(stem + "_ref.csv", "reference", seed=seed)
    return [{"x": k.grid, "y": k.density, "style": "solid", "color": color},
            {"x": k.grid, "y": ref, "style": "dashed", "color": color}]


def _figure_kde_panels(man, fig_id, cfg, taus, seed, M, workers, stat_keys, ref_factory):
    for p, n in cfg["panels"]:
        sims = {tau: simulate_statistics(p, n, tau, M, seed, WATSON, workers) for tau in taus}
        for key in stat_keys:
            curves = []
            for ci, tau in enumerate(taus):
                stem = f"fig{fig_id}_{key}_p{p}_n{n}_tau{_tag(tau)}"
                pair = _kde_with_reference(man, stem, sims[tau][key],
                                           ref_factory(key, p, tau), seed, ci)
                pair[0]["label"] = f"tau={tau:g}"
                pair[1]["label"] = f"asymptotic tau={tau:g}"
                curves += pair
                if tau == 0:
                    curves.append(_null_histogram(man, f"fig{fig_id}_{key}_p{p}_n{n}_hist.csv",
                                                  sims[tau][key], seed))
            svg = f"fig{fig_id}_{key}_p{p}_n{n}.svg"
            emit_svg(curves, man.path(svg), title=f"{key}: p={p}, n={n}, M={M}",
                     xlabel="statistic", ylabel="density")
            man.add(svg, "svg")


def replicate_figure(fig_id: int, scale: str = "desk", seed: int = 0, out_dir: str = ".",
                     replicates: int | None = None, workers: int = 1) -> dict:
    """Regenerate the data behind one of the four simulation figures.

    Writes CSV files (KDE curves, reference densities, null histograms or
    power curves), one SVG per panel and ``manifest.json`` into ``out_dir``
    and returns the manifest. ``replicates`` overrides the Monte Carlo size.
    """
    if fig_id not in FIGURE_CONFIGS:
        raise ValueError(f"figure id must be one of {sorted(FIGURE_CONFIGS)}")
    if scale not in ("paper", "desk"):
        raise ValueError("scale must be 'paper' or 'desk'")
    os.makedirs(out_dir, exist_ok=True)
    conf = FIGURE_CONFIGS[fig_id]
    cfg, taus = conf[scale], conf["taus"]
    M = replicates or cfg["M"]
    man = _Manifest(out_dir, fig_id, scale, seed)
    man.data.update(replicates=M)

    if fig_id == 1:
        def ref(key, p, tau):
            mu = math.sqrt(gamma_scalar(p)) * tau
            return lambda g: std_normal_pdf(g - mu)
        _figure_kde_panels(man, 1, cfg, taus, seed, M, workers, ("specified",), ref)

    elif fig_id == 2:
        def ref(key, p, tau):
            d = bingham_df(p)
            delta = limlaw.bingham_noncentrality(p, tau)
            return lambda g: noncentral_chisq_pdf(g, d, delta)
        _figure_kde_panels(man, 2, cfg, taus, seed, M, workers, ("bingham",), ref)

    elif fig_id == 3:
        m = cfg["m"]
        exact = {"t_plus": limlaw.pdf_lmax_p3, "t_minus": limlaw.pdf_lmax_p3,
                 "t_pm": limlaw.pdf_labs_p3}

        tables = {}

        def ref(key, p, tau):
            if p == 3 and tau == 0:
                return exact[key]
            if (p, tau) not in tables:
                tables[p, tau] = limlaw.build_table(limlaw.LimitMatrixSpec(p, tau), m, seed + 3)
            table = tables[p, tau]
            draws = {"t_plus": table.lmax, "t_minus": -table.lmin, "t_pm": table.labs}[key]
            k = kde(draws)
            return lambda g: np.interp(g, k.grid, k.density, left=0.0, right=0.0)
        man.data.update(limit_draws=m)
        _figure_kde_panels(man, 3, cfg, taus, seed, M, workers, ("t_plus", "t_minus", "t_pm"), ref)

    else:
        for p, n in cfg["panels"]:
            spec = ExperimentSpec(p, n, taus, ("specified_right", "t_plus", "bingham"),
                                  0.05, M, seed, crit_m=10_000, asym_m=10_000, workers=workers)
            curve = run_power_experiment(spec)
            name = f"fig4_power_p{p}_n{n}.csv"
            curve.to_csv(man.path(name))
            man.add(name, "power_curve", seed=seed)
            curves = []
            for ci, test in enumerate(spec.tests):
                rows = [curve.get(test, t) for t in taus]
                curves.append({"x": taus, "y": [r.freq for r in rows], "label": test,
                               "style": "solid", "color": ci})
                curves.append({"x": taus, "y": [r.asym_power for r in rows],
                               "label": f"{test} (asymptotic)", "style": "dashed", "color": ci})
            svg = f"fig4_power_p{p}_n{n}.svg"
            emit_svg(curves, man.path(svg), title=f"p={p}, n={n}, M={M}",
                     xlabel="tau", ylabel="rejection frequency")
            man.add(svg, "svg")
    return man.write()
