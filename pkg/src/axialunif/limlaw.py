"""Limiting laws of the extreme scatter eigenvalues, critical values and asymptotic powers.

Under uniformity ``sqrt(n) p (S_n - I/p)`` converges to a trace-zero Gaussian
matrix ``Z`` with ``vec Z ~ N(0, V_p)``, ``V_p = p/(p+2) (I + K_p) - 2/(p+2) J_p``.
Under local alternatives ``kappa_n = tau p / sqrt(n)`` the limit is
``Z_tau = Z + 2 tau / (p + 2) W_tau``. The extreme eigenvalues of ``Z_tau``
are the limits of ``T_+`` and ``-T_-``.
"""
from __future__ import annotations

import functools
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .numerics import (
    DistRef,
    RngStream,
    chisq_quantile,
    noncentral_chisq_cdf,
    normal_quantile,
    std_normal_cdf,
    std_normal_cdf_dd,
    std_normal_pdf,
)

__all__ = [
    "DEFAULT_CRIT_M",
    "DEFAULT_POWER_M",
    "LimitMatrixSpec",
    "LimitLawTable",
    "spike_matrix",
    "limit_covariance",
    "sample_limit_matrix",
    "build_table",
    "null_table",
    "cdf_lmax_p2",
    "cdf_lmax_p3",
    "cdf_labs_p3",
    "pdf_lmax_p2",
    "pdf_lmax_p3",
    "pdf_labs_p3",
    "null_ref",
    "null_sf",
    "crit_value",
    "power_specified",
    "power_bingham",
    "power_eigen_mc",
]

DEFAULT_CRIT_M = 200_000
DEFAULT_POWER_M = 20_000
TABLE_VERSION = "1"
_CHUNK = 20_000
_EIGEN_TESTS = ("t_plus", "t_minus", "t_pm")


@dataclass(frozen=True)
class LimitMatrixSpec:
    p: int
    tau: float = 0.0

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 2:
            raise ValueError(f"p must be an integer >= 2, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "tau", float(self.tau))


def spike_matrix(p: int, tau: float) -> np.ndarray:
    """``W_tau``: diag(p-1, -1, ..., -1) for tau >= 0, diag(-1, ..., -1, p-1) otherwise."""
    d = -np.ones(p)
    d[0 if tau >= 0 else -1] = p - 1.0
    return np.diag(d)


def limit_covariance(p: int) -> np.ndarray:
    """``V_p``, the covariance of ``vec Z`` (column-major)."""
    from .teststats import commutation_matrix

    vi = np.eye(p).reshape(-1, order="F")
    return p / (p + 2.0) * (np.eye(p * p) + commutation_matrix(p)) - 2.0 / (p + 2.0) * np.outer(vi, vi)


def sample_limit_matrix(spec: LimitMatrixSpec, stream: RngStream, size=None) -> np.ndarray:
    """Draw ``Z_tau`` (or a stack of ``size`` independent copies).

    A symmetric Gaussian ``G`` with off-diagonal variance p/(p+2) and diagonal
    variance 2p/(p+2) is projected onto trace-zero matrices; projecting
    ``(p/(p+2))(I + K_p)`` this way gives exactly ``V_p``.
    """
    p = spec.p
    shape = (1 if size is None else int(size), p, p)
    E = stream.normal(shape) * math.sqrt(p / (p + 2.0))
    G = (E + E.transpose(0, 2, 1)) / math.sqrt(2.0)
    idx = np.arange(p)
    diag = G[:, idx, idx]
    diag = diag - diag.mean(axis=1, keepdims=True)
    # last entry closes the trace exactly in floating point
    diag[:, -1] = -np.sum(diag[:, :-1], axis=1)
    G[:, idx, idx] = diag
    if spec.tau != 0:
        G += 2.0 * spec.tau / (p + 2.0) * spike_matrix(p, spec.tau)
    return G[0] if size is None else G


@dataclass(frozen=True)
class LimitLawTable:
    """Simulated extreme eigenvalues of ``Z_tau``.

    ``lmax`` and ``lmin`` are kept in draw order so that row ``i`` of both
    comes from the same matrix; ``draws_*`` are the sorted views.
    """

    spec: LimitMatrixSpec
    lmax: np.ndarray
    lmin: np.ndarray
    seed: int

    @property
    def m(self) -> int:
        return self.lmax.size

    @property
    def labs(self) -> np.ndarray:
        return np.maximum(self.lmax, -self.lmin)

    @functools.cached_property
    def draws_lmax(self) -> np.ndarray:
        return np.sort(self.lmax)

    @functools.cached_property
    def draws_lmin(self) -> np.ndarray:
        return np.sort(self.lmin)

    @functools.cached_property
    def draws_labs(self) -> np.ndarray:
        return np.sort(self.labs)

    def to_csv(self, path) -> None:
        """Write ``index,lmax,lmin,labs`` rows after ``#`` header lines."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# limit-law table version={TABLE_VERSION}\n")
            fh.write(f"# p={self.spec.p} tau={self.spec.tau!r} m={self.m} seed={self.seed}\n")
            fh.write("index,lmax,lmin,labs\n")
            labs = self.labs
            for i in range(self.m):
                fh.write(f"{i},{float(self.lmax[i])!r},{float(self.lmin[i])!r},{float(labs[i])!r}\n")

    @classmethod
    def read_csv(cls, path) -> "LimitLawTable":
        meta = {}
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        lines = text.splitlines()
        for line in lines:
            if not line.startswith("#"):
                break
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    meta[k] = v
        if meta.get("version") != TABLE_VERSION:
            raise ValueError(f"unsupported table version {meta.get('version')!r}")
        body = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=_header_rows(lines),
                          usecols=(1, 2), ndmin=2, dtype=float)
        spec = LimitMatrixSpec(int(meta["p"]), float(meta["tau"]))
        table = cls(spec, body[:, 0].copy(), body[:, 1].copy(), int(meta["seed"]))
        if table.m != int(meta["m"]):
            raise ValueError("row count does not match header")
        return table


def _header_rows(lines):
    k = 0
    while k < len(lines) and lines[k].startswith("#"):
        k += 1
    return k + 1


def build_table(spec: LimitMatrixSpec, m: int, seed: int = 0) -> LimitLawTable:
    """Simulate ``m`` independent draws of the extreme eigenvalues of ``Z_tau``.

    Chunk ``k`` of 20 000 draws uses stream ``(seed, k)``, so the result does
    not depend on how the work is scheduled.
    """
    if m < 1000:
        raise ValueError("limit-law tables need m >= 1000")
    lmax = np.empty(m)
    lmin = np.empty(m)
    for k, start in enumerate(range(0, m, _CHUNK)):
        size = min(_CHUNK, m - start)
        Z = sample_limit_matrix(spec, RngStream(seed, k), size)
        w = np.linalg.eigvalsh(Z)
        lmax[start:start + size] = w[:, -1]
        lmin[start:start + size] = w[:, 0]
    return LimitLawTable(spec, lmax, lmin, int(seed))


@functools.lru_cache(maxsize=32)
def null_table(p: int, m: int = DEFAULT_CRIT_M, seed: int = 0) -> LimitLawTable:
    """Cached null (tau = 0) table."""
    return build_table(LimitMatrixSpec(p, 0.0), m, seed)


@functools.lru_cache(maxsize=64)
def _null_draws(test: str, p: int, m: int, seed: int) -> np.ndarray:
    """Sorted null draws of the limit of ``test``.

    ``T_+`` and ``T_-`` share one null limit (``lambda_1(Z)`` and
    ``-lambda_p(Z)`` are equal in law), so both use the pooled draws.
    """
    table = null_table(p, m, seed)
    if test == "t_pm":
        return table.draws_labs
    return np.sort(np.concatenate([table.lmax, -table.lmin]))


def _pos(fn):
    @functools.wraps(fn)
    def wrapper(l):
        l = np.asarray(l, dtype=float)
        out = np.where(l > 0, fn(np.where(l > 0, l, 1.0)), 0.0)
        return float(out) if out.ndim == 0 else out
    return wrapper


_S5 = math.sqrt(5.0)


@_pos
def cdf_lmax_p2(l):
    """CDF ``1 - exp(-l^2)`` of the null limit of ``T_+`` (= ``T_-`` = ``T_pm``) for p = 2."""
    return -np.expm1(-l * l)


@_pos
def cdf_lmax_p3(l):
    """CDF of the null limit of ``T_+`` and ``T_-`` for p = 3."""
    a = _S5 * l / 2.0
    return std_normal_cdf(_S5 * l) + std_normal_cdf(a) + 3.0 * std_normal_cdf_dd(a) - 1.0


@_pos
def cdf_labs_p3(l):
    """CDF of the null limit of ``T_pm`` for p = 3."""
    a = _S5 * l / 2.0
    b = _S5 * l / math.sqrt(3.0)
    return (2.0 * std_normal_cdf(a) + 6.0 * std_normal_cdf_dd(a)
            - 2.0 * math.sqrt(3.0) * std_normal_cdf_dd(b) - 1.0)


def _phi3(x):
    # third derivative of the normal CDF
    return (x * x - 1.0) * std_normal_pdf(x)


@_pos
def pdf_lmax_p2(l):
    return 2.0 * l * np.exp(-l * l)


@_pos
def pdf_lmax_p3(l):
    a = _S5 * l / 2.0
    return (_S5 * std_normal_pdf(_S5 * l) + _S5 / 2.0 * std_normal_pdf(a)
            + 3.0 * _S5 / 2.0 * _phi3(a))


@_pos
def pdf_labs_p3(l):
    a = _S5 * l / 2.0
    b = _S5 * l / math.sqrt(3.0)
    return (_S5 * std_normal_pdf(a) + 3.0 * _S5 * _phi3(a)
            - 2.0 * math.sqrt(3.0) * _S5 / math.sqrt(3.0) * _phi3(b))


def _sf_lmax_p2(l):
    return np.exp(-l * l)


def _sf_lmax_p3(l):
    # complement of cdf_lmax_p3 written without cancellation in the upper tail
    a = _S5 * l / 2.0
    return std_normal_cdf(-_S5 * l) + std_normal_cdf(-a) + 3.0 * a * std_normal_pdf(a)


def _sf_labs_p3(l):
    a = _S5 * l / 2.0
    b = _S5 * l / math.sqrt(3.0)
    return (2.0 * std_normal_cdf(-a) + 6.0 * a * std_normal_pdf(a)
            - 2.0 * math.sqrt(3.0) * b * std_normal_pdf(b))


def _exact_sf(test, p, x):
    if x <= 0:
        return 1.0
    if p == 2:
        return float(_sf_lmax_p2(x))
    return float(_sf_labs_p3(x) if test == "t_pm" else _sf_lmax_p3(x))


def _exact_cdf(test, p):
    if p == 2:
        return cdf_lmax_p2
    if p == 3:
        return cdf_labs_p3 if test == "t_pm" else cdf_lmax_p3
    return None


def _check_test(test):
    if test not in _EIGEN_TESTS:
        raise ValueError(f"test must be one of {_EIGEN_TESTS}, got {test!r}")


def _resolve(test, p, method):
    _check_test(test)
    if method == "auto":
        return "analytic" if p in (2, 3) else "mc"
    if method == "analytic" and p not in (2, 3):
        raise ValueError(f"analytic null laws exist only for p in (2, 3), got p={p}")
    if method not in ("analytic", "mc"):
        raise ValueError(f"method must be 'auto', 'analytic' or 'mc', got {method!r}")
    return method


def null_ref(test: str, p: int, method: str = "auto") -> DistRef:
    """Null reference law used for ``test`` in dimension ``p``."""
    if _resolve(test, p, method) == "analytic":
        if p == 2:
            return DistRef("lmax_p2_exact")
        return DistRef("labs_p3_exact" if test == "t_pm" else "lmax_p3_exact")
    kind = {"t_plus": "lmax_empirical", "t_minus": "lmin_empirical",
            "t_pm": "labs_empirical"}[test]
    return DistRef(kind, (p, 0.0))


def null_sf(test: str, p: int, x: float, m: int = DEFAULT_CRIT_M, seed: int = 0,
            method: str = "auto") -> float:
    """Asymptotic null p-value ``P[L > x]`` of an extreme-eigenvalue statistic."""
    if _resolve(test, p, method) == "analytic":
        return _exact_sf(test, p, x)
    draws = _null_draws(test, p, int(m), int(seed))
    return float(draws.size - np.searchsorted(draws, x, side="left")) / draws.size


def crit_value(test: str, p: int, alpha: float, method: str = "analytic",
               m: int = DEFAULT_CRIT_M, seed: int = 0) -> float:
    """Asymptotic critical value ``c`` with ``P[L > c] = alpha`` under the null.

    ``method="analytic"`` inverts the exact CDF (p in {2, 3} only);
    ``method="mc"`` returns the type-7 empirical upper ``alpha``-quantile of
    simulated draws.
    """
    _check_test(test)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if method == "analytic":
        cdf = _exact_cdf(test, p)
        if cdf is None:
            raise ValueError(f"analytic critical values exist only for p in (2, 3), got p={p}")
        hi = 1.0
        while cdf(hi) < 1.0 - alpha:
            hi *= 2.0
        return float(brentq(lambda l: cdf(l) - (1.0 - alpha), 0.0, hi, xtol=1e-13, rtol=1e-15))
    if method == "mc":
        draws = _null_draws(test, p, int(m), int(seed))
        return float(np.quantile(draws, 1.0 - alpha))
    raise ValueError(f"method must be 'analytic' or 'mc', got {method!r}")


def default_crit(test: str, p: int, alpha: float, m: int = DEFAULT_CRIT_M, seed: int = 0) -> float:
    """Analytic critical value when available, simulated otherwise."""
    method = "analytic" if p in (2, 3) else "mc"
    return crit_value(test, p, alpha, method, m, seed)


def power_specified(p: int, tau: float, alpha: float = 0.05, side: str = "right") -> float:
    """Local asymptotic power of the specified-axis test under ``kappa = tau p / sqrt(n)``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    shift = math.sqrt(2.0 * (p - 1) / (p + 2)) * tau
    if side == "right":
        return 1.0 - std_normal_cdf(normal_quantile(alpha) - shift)
    if side == "left":
        return std_normal_cdf(-normal_quantile(alpha) - shift)
    if side == "two_sided":
        z = normal_quantile(alpha / 2.0)
        return 2.0 - std_normal_cdf(z - shift) - std_normal_cdf(z + shift)
    raise ValueError(f"side must be 'right', 'left' or 'two_sided', got {side!r}")


def bingham_noncentrality(p: int, tau: float) -> float:
    return 2.0 * (p - 1) * tau * tau / (p + 2.0)


def power_bingham(p: int, tau: float, alpha: float = 0.05) -> float:
    """Local asymptotic power of the Bingham test (noncentral chi-square limit)."""
    d = p * (p + 1) // 2 - 1
    return 1.0 - noncentral_chisq_cdf(chisq_quantile(alpha, d), d, bingham_noncentrality(p, tau))


def power_eigen_mc(test: str, p: int, tau: float, alpha: float = 0.05,
                   m: int = DEFAULT_POWER_M, seed: int = 0, crit: float | None = None,
                   crit_m: int = DEFAULT_CRIT_M) -> float:
    """Simulated local asymptotic power of ``T_+``, ``T_-`` or ``T_pm``.

    The critical value defaults to the analytic one for p in {2, 3} and to a
    simulated one (independent stream, ``seed + 1``) otherwise.
    """
    _check_test(test)
    if crit is None:
        if p in (2, 3):
            crit = crit_value(test, p, alpha, "analytic")
        else:
            crit = crit_value(test, p, alpha, "mc", crit_m, seed + 1)
    table = build_table(LimitMatrixSpec(p, tau), m, seed)
    stat = {"t_plus": table.lmax, "t_minus": -table.lmin, "t_pm": table.labs}[test]
    return float(np.mean(stat > crit))
