"""Hypergeometric kernels: Pochhammer symbol, Kummer 1F1, the confluent
multivariate series Phi2 and the Lauricella function F_D.

The multivariate series are summed by total-degree shells.  The shell sum of
degree ``n`` is the coefficient of ``t**n`` in ``prod_i (1 - x_i t)**(-b_i)``,
so a whole shell is obtained from a discrete convolution of one-variable
binomial series instead of an enumeration of multi-indices.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.special import gammaln, gammasgn

from .errors import ConvergenceError, DomainError

__all__ = [
    "SeriesControls",
    "SeriesResult",
    "pochhammer",
    "kummer_1f1",
    "log_kummer_1f1",
    "humbert_phi2",
    "log_humbert_phi2",
    "lauricella_fd",
]


@dataclass(frozen=True)
class SeriesControls:
    abs_tol: float = 1e-300
    rel_tol: float = 1e-15
    max_total_degree: int = 20000
    max_terms: int = 2_000_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("series tolerances must be > 0")
        if self.max_total_degree < 1 or self.max_terms < 1:
            raise DomainError("max_total_degree and max_terms must be >= 1")


DEFAULT_CONTROLS = SeriesControls()


@dataclass(frozen=True)
class SeriesResult:
    """Value of a shell-summed series with its convergence diagnostics."""

    value: float
    converged: bool
    shells: int
    tail_estimate: float


def _is_nonpositive_integer(x):
    return x <= 0 and float(x).is_integer()


def pochhammer(a: float, n: int) -> float:
    """Rising factorial ``a (a+1) ... (a+n-1)``."""
    if n < 0 or int(n) != n:
        raise DomainError(f"n must be a nonnegative integer, got {n!r}")
    n = int(n)
    if n == 0:
        return 1.0
    if n <= 30 or (_is_nonpositive_integer(a) and n > -a):
        out = 1.0
        for k in range(n):
            out *= a + k
        return out
    if _is_nonpositive_integer(a + n - 1) or _is_nonpositive_integer(a):
        out = 1.0
        for k in range(n):
            out *= a + k
        return out
    sign = gammasgn(a + n) * gammasgn(a)
    return float(sign * math.exp(gammaln(a + n) - gammaln(a)))


def _log_pochhammer(a, n):
    """log|(a)_n| for an array of nonnegative integers ``n`` and ``a > 0``."""
    return gammaln(a + n) - gammaln(a)


# --------------------------------------------------------------------------
# Kummer 1F1
# --------------------------------------------------------------------------

def _log_series_terms(a, b, x, nmax):
    """log|term_n| and sign of the 1F1 Taylor terms for n = 0..nmax."""
    k = np.arange(nmax, dtype=float)
    ratio = (a + k) * x / ((b + k) * (k + 1.0))
    with np.errstate(divide="ignore"):
        logs = np.concatenate(([0.0], np.cumsum(np.log(np.abs(ratio)))))
    signs = np.concatenate(([1.0], np.cumprod(np.sign(ratio))))
    return logs, signs


def _log_kummer_series(a, b, x):
    # terms peak near n ~ |x| and then decay like |x|^n / n!
    nmax = int(abs(x) + abs(a) + 12.0 * math.sqrt(abs(x) + 1.0) + 60)
    for _ in range(8):
        logs, signs = _log_series_terms(a, b, x, nmax)
        m = float(np.max(logs))
        tail = logs[-1] - m
        if tail < -40.0 and (signs[-1] == 0 or abs((a + nmax) * x / ((b + nmax) * (nmax + 1.0))) < 0.5):
            break
        nmax *= 2
    else:
        raise ConvergenceError(f"1F1({a}, {b}, {x}) series did not converge")
    scaled = signs * np.exp(logs - m)
    total = math.fsum(scaled.tolist())
    cancel = float(np.sum(np.abs(scaled))) / abs(total) if total != 0 else math.inf
    if total == 0:
        return -math.inf, 0.0, cancel
    return m + math.log(abs(total)), math.copysign(1.0, total), cancel


def log_kummer_1f1(a: float, b: float, x: float):
    """Return ``(log|1F1(a; b; x)|, sign)``.

    A Kummer transformation is applied whenever it turns an alternating
    series into one with positive terms, so moderate and large arguments of
    either sign are summed without cancellation.
    """
    if _is_nonpositive_integer(b):
        raise DomainError(f"1F1 undefined for nonpositive integer b={b!r}")
    if x == 0.0 or a == 0.0:
        return 0.0, 1.0
    if a == b:
        return float(x), 1.0
    direct_positive = x > 0 and a > 0 and b > 0
    kummer_positive = x < 0 and (b - a) > 0 and b > 0
    if kummer_positive or (x < 0 and not direct_positive and (b - a) > a):
        log_v, sign, cancel = _log_kummer_series(b - a, b, -x)
        log_v += x
    else:
        log_v, sign, cancel = _log_kummer_series(a, b, x)
    if cancel > 1e3:
        # heavy cancellation left: fall back to extended precision
        import mpmath

        with mpmath.workdps(30 + int(math.log10(cancel))):
            v = mpmath.hyp1f1(a, b, x)
            if v == 0:
                return -math.inf, 0.0
            return float(mpmath.log(abs(v))), float(mpmath.sign(v))
    return log_v, sign


def kummer_1f1(a: float, b: float, x: float) -> float:
    """Confluent hypergeometric function ``1F1(a; b; x)``."""
    log_v, sign = log_kummer_1f1(a, b, x)
    if sign == 0:
        return 0.0
    if log_v > 709.78:
        raise OverflowError(f"1F1({a}, {b}, {x}) overflows a float")
    return sign * math.exp(log_v)


# --------------------------------------------------------------------------
# shell sums shared by Phi2 and F_D
# --------------------------------------------------------------------------

def _scaled_shell_sums(b, y, scale, kmax):
    """Coefficients of t**n, n <= kmax, in prod_i (1 - y_i t / scale)**(-b_i).

    The returned array ``h`` satisfies shell_n = h[n] * scale**n.
    """
    n = np.arange(kmax, dtype=float)
    h = np.zeros(kmax + 1)
    h[0] = 1.0
    for bi, yi in zip(b, y):
        if yi == 0.0 or bi == 0.0:
            continue
        ratio = (bi + n) / (n + 1.0) * (yi / scale)
        coef = np.concatenate(([1.0], np.cumprod(ratio)))
        h = np.convolve(h, coef)[: kmax + 1]
    return h


def _sum_weighted_shells(b, y, log_weight, ctl, start_degree):
    """Sum ``shell_n * exp(log_weight(n))`` over shells until three
    consecutive shells fall below tolerance.

    Returns ``(log|S|, sign, converged, shells, tail)`` with ``tail`` the
    size of the last shells relative to ``|S|``.
    """
    b = np.asarray(b, dtype=float)
    y = np.asarray(y, dtype=float)
    scale = float(np.max(np.abs(y))) if y.size else 0.0
    if scale == 0.0:
        return 0.0, 1.0, True, 1, 0.0
    kmax = max(start_degree, 16)
    limit = min(ctl.max_total_degree, max(ctl.max_terms // max(len(b), 1), 1))
    if start_degree > limit:
        # the terms are still growing at the degree budget: no partial sum is meaningful
        return math.nan, 0.0, False, 0, math.inf
    while True:
        kmax = min(kmax, limit)
        h = _scaled_shell_sums(b, y, scale, kmax)
        n = np.arange(kmax + 1, dtype=float)
        with np.errstate(divide="ignore"):
            logt = np.log(np.abs(h)) + n * math.log(scale) + log_weight(n)
        signs = np.sign(h)
        finite = np.isfinite(logt)
        m = float(np.max(logt[finite])) if finite.any() else 0.0
        scaled = np.where(finite, signs * np.exp(np.where(finite, logt - m, 0.0)), 0.0)
        cums = np.cumsum(scaled)
        # stopping rule: three consecutive shells below tolerance, past the peak
        peak = int(np.argmax(np.where(finite, logt, -np.inf)))
        with np.errstate(over="ignore"):
            abs_floor = ctl.abs_tol * np.exp(-m)
        small = np.abs(scaled) <= np.maximum(ctl.rel_tol * np.abs(cums), abs_floor)
        stop = None
        run = 0
        for i in range(peak + 1, kmax + 1):
            run = run + 1 if small[i] else 0
            if run == 3:
                stop = i
                break
        if stop is not None:
            total = math.fsum(scaled[: stop + 1].tolist())
            tail = float(np.sum(np.abs(scaled[stop - 2 : stop + 1])))
            if total == 0.0:
                return -math.inf, 0.0, True, stop + 1, math.inf
            return m + math.log(abs(total)), math.copysign(1.0, total), True, stop + 1, tail / abs(total)
        if kmax >= limit:
            total = math.fsum(scaled.tolist())
            tail = float(abs(scaled[-1]))
            log_v = m + math.log(abs(total)) if total != 0 else -math.inf
            rel = tail / abs(total) if total != 0 else math.inf
            return log_v, math.copysign(1.0, total), False, kmax + 1, rel
        kmax *= 2


# --------------------------------------------------------------------------
# Phi2
# --------------------------------------------------------------------------

def log_humbert_phi2(b: Sequence[float], c: float, x: Sequence[float], ctl: SeriesControls = DEFAULT_CONTROLS):
    """Return ``(log|Phi2|, sign, converged, shells)`` for the N-variate
    confluent series.

    When some argument is negative, the series is rewritten through

        Phi2(b; c; x) = exp(x_k) * Phi2(b, c - sum(b); c; x - x_k, -x_k)

    with ``x_k`` the most negative argument (the appended variable carries the
    parameter that makes the lower parameter equal the sum of the upper
    ones).  All shifted arguments are nonnegative, so for positive
    parameters every term is positive and no cancellation occurs.
    """
    b = [float(v) for v in b]
    x = [float(v) for v in x]
    if len(b) != len(x) or not b:
        raise DomainError("Phi2 needs N >= 1 parameters and N arguments of equal length")
    if c <= 0:
        raise DomainError(f"Phi2 requires c > 0, got {c!r}")
    shift = 0.0
    bb, yy = list(b), list(x)
    xmin = min(x)
    if xmin < 0:
        extra = c - sum(b)
        yy = [xi - xmin for xi in x]
        if abs(extra) > 1e-14 * max(1.0, abs(c)):
            bb.append(extra)
            yy.append(-xmin)
        shift = xmin
    scale = max(abs(v) for v in yy)
    start = int(scale + 12.0 * math.sqrt(scale + 1.0) + 40)
    log_c = gammaln(c)

    def log_weight(n):
        return -(gammaln(c + n) - log_c)

    log_v, sign, converged, shells, _ = _sum_weighted_shells(bb, yy, log_weight, ctl, start)
    return log_v + shift, sign, converged, shells


def humbert_phi2(b: Sequence[float], c: float, x: Sequence[float], ctl: SeriesControls = DEFAULT_CONTROLS,
                 strict: bool = True) -> SeriesResult:
    """Confluent hypergeometric series of N variables.

    ``Phi2(b_1..b_N; c; x_1..x_N) = sum over m of prod_i (b_i)_{m_i} x_i^{m_i} / m_i! / (c)_{|m|}``

    Parameters
    ----------
    b, x : sequences of length N
    c : float
        Lower parameter, must be positive.
    ctl : SeriesControls
    strict : bool
        If True (default) a series that does not converge within
        ``ctl.max_total_degree`` shells raises :class:`ConvergenceError`;
        otherwise the flagged partial result is returned.
    """
    log_v, sign, converged, shells = log_humbert_phi2(b, c, x, ctl)
    value = math.nan if math.isnan(log_v) else (sign * math.exp(log_v) if sign != 0 else 0.0)
    if not converged and strict:
        raise ConvergenceError(f"Phi2 series did not converge within {shells} shells", partial=value)
    return SeriesResult(value, converged, shells, 0.0 if converged else math.nan)


# --------------------------------------------------------------------------
# Lauricella F_D
# --------------------------------------------------------------------------

def _fd_series(a, b, c, x, ctl):
    log_pa, log_pc = gammaln(a), gammaln(c)

    def log_weight(n):
        return (gammaln(a + n) - log_pa) - (gammaln(c + n) - log_pc)

    log_v, sign, converged, shells, _ = _sum_weighted_shells(b, x, log_weight, ctl, 64)
    if not converged:
        raise ConvergenceError("F_D series did not converge", partial=sign * math.exp(log_v))
    return sign * math.exp(log_v)


def _fd_euler(a, b, c, x, rel_tol):
    # t^(a-1) and (1-t)^(c-a-1) go into quad's algebraic weights at the two ends;
    # large |x| puts structure at t ~ 1/|x|, so the middle is split geometrically
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)

    def prod(t):
        return math.exp(-float(np.dot(b, np.log1p(-x * t))))

    opts = dict(epsabs=0.0, epsrel=rel_tol, limit=200)
    t0 = 1.0 / float(np.max(np.abs(x)))
    pieces = []
    if t0 >= 0.25:
        pieces.append((prod, 0.0, 1.0, (a - 1.0, c - a - 1.0)))
    else:
        inner = np.geomspace(t0, 0.5, int(math.log10(0.5 / t0)) + 2)
        edges = [0.0, *inner, 1.0]
        pieces.append((lambda t: (1.0 - t) ** (c - a - 1.0) * prod(t), 0.0, edges[1], (a - 1.0, 0.0)))
        for lo, hi in zip(edges[1:-2], edges[2:-1]):
            pieces.append((lambda t: t ** (a - 1.0) * (1.0 - t) ** (c - a - 1.0) * prod(t), lo, hi, None))
        pieces.append((lambda t: t ** (a - 1.0) * prod(t), edges[-2], 1.0, (0.0, c - a - 1.0)))
    val, err = 0.0, 0.0
    # roundoff notices are judged by the summed error estimate below
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for fn, lo, hi, wvar in pieces:
            if wvar is None:
                v, e = integrate.quad(fn, lo, hi, **opts)
            else:
                v, e = integrate.quad(fn, lo, hi, weight="alg", wvar=wvar, **opts)
            val += v
            err += e
    log_norm = gammaln(c) - gammaln(a) - gammaln(c - a)
    value = math.exp(log_norm) * val
    if not (math.isfinite(val) and err <= 100 * rel_tol * abs(val)):
        raise ConvergenceError("F_D Euler integral did not converge", partial=value, error=err)
    return value


def lauricella_fd(a: float, b: Sequence[float], c: float, x: Sequence[float],
                  route: str = "auto", ctl: SeriesControls = DEFAULT_CONTROLS, rel_tol: float = 1e-13) -> float:
    """Lauricella hypergeometric function ``F_D^{(N)}(a, b; c; x)``.

    Uses the Euler integral for ``c > a > 0``.  For ``max|x_i| < 0.5`` the
    shell-summed series is used instead (``route="auto"``); both can be
    forced with ``route="series"`` or ``route="euler"``.  When ``c == a``
    the function collapses to ``prod_i (1 - x_i)**(-b_i)``.
    """
    b = [float(v) for v in b]
    x = [float(v) for v in x]
    if len(b) != len(x) or not b:
        raise DomainError("F_D needs N >= 1 parameters and N arguments of equal length")
    if any(xi >= 1.0 for xi in x):
        raise DomainError("F_D requires every x_i < 1")
    if a == c:
        return math.exp(-sum(bi * math.log1p(-xi) for bi, xi in zip(b, x)))
    if not (c > a > 0):
        raise DomainError(f"F_D Euler representation needs c > a > 0, got a={a!r}, c={c!r}")
    if all(xi == 0.0 for xi in x):
        return 1.0
    small = max(abs(xi) for xi in x) < 0.5
    if route == "series" or (route == "auto" and small):
        if not max(abs(xi) for xi in x) < 1.0:
            raise DomainError("F_D series route needs max|x_i| < 1")
        return _fd_series(a, b, c, x, ctl)
    if route not in ("auto", "euler"):
        raise ValueError(f"unknown F_D route {route!r}")
    return _fd_euler(a, b, c, x, rel_tol)
