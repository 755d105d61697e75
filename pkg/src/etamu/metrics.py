"""MRC performance metrics: outage, average SER and approximate ergodic capacity."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .contour import ContourSpec, GammaFactorProduct, foxh_hat
from .errors import ConvergenceError, DomainError
from .hypergeo import lauricella_fd
from .sumstats import MrcChannel, sum_cdf, sum_mgf, sum_pdf

__all__ = [
    "ModulationScheme",
    "CapacityFit",
    "DEFAULT_FIT",
    "modulation_preset",
    "outage",
    "ser_fd",
    "ser_foxh",
    "ser_numint",
    "asymptotic_ser",
    "fit_error_bound",
    "capacity_fd",
    "capacity_foxh",
    "capacity_numint",
]


@dataclass(frozen=True)
class ModulationScheme:
    """Parameters ``(beta, delta, zeta)`` of the SER kernel for a modulation family."""

    beta: float
    delta: float
    zeta: float
    name: str = ""

    def __post_init__(self):
        for attr in ("beta", "delta", "zeta"):
            v = getattr(self, attr)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{attr} must be > 0, got {v!r}")

    def scaled(self, factor: float) -> "ModulationScheme":
        return ModulationScheme(self.beta * factor, self.delta, self.zeta, self.name)


def _fixed(beta, delta, zeta):
    return lambda M: (beta, delta, zeta)


_PRESETS = {
    "BFSK": (False, _fixed(0.5, 0.5, 0.5)),
    "BPSK": (False, _fixed(0.5, 1.0, 0.5)),
    "QPSK": (False, _fixed(1.0, 0.5, 0.5)),
    "4QAM": (False, _fixed(1.0, 0.5, 0.5)),
    "4PSK": (False, _fixed(1.0, 0.5, 0.5)),
    "RECT-MQAM": (True, lambda M: (2.0 * (math.sqrt(M) - 1.0) / math.sqrt(M), 3.0 / (2.0 * (M - 1.0)), 0.5)),
    "NONRECT-MQAM": (True, lambda M: (2.0, 3.0 / (2.0 * (M - 1.0)), 0.5)),
    "MPSK": (True, lambda M: (1.0, math.sin(math.pi / M) ** 2, 0.5)),
    "MPAM": (True, lambda M: ((M - 1.0) / M, 3.0 / (M * M - 1.0), 0.5)),
}

_ALIASES = {"QPSK/4QAM": "QPSK", "4-QAM": "4QAM", "4-PSK": "4PSK"}


def modulation_preset(name: str, M: Optional[int] = None) -> ModulationScheme:
    """Look up a modulation family.

    ``name`` is one of BFSK, BPSK, QPSK/4QAM, rect-MQAM, nonrect-MQAM, MPSK,
    MPAM.  The order may be passed as ``M`` or embedded in the name, e.g.
    ``"rect-MQAM(16)"``, ``"16-QAM"`` or ``"8-PSK"``.
    """
    raw = name.strip()
    key = raw.upper()
    m = re.fullmatch(r"([A-Z\-]+)\((\d+)\)", key)
    if m:
        key, M = m.group(1), int(m.group(2))
    m = re.fullmatch(r"(\d+)-?(QAM|PSK|PAM)", key)
    if m and key not in ("4QAM", "4PSK", "4-QAM", "4-PSK"):
        M = int(m.group(1))
        key = {"QAM": "RECT-MQAM", "PSK": "MPSK", "PAM": "MPAM"}[m.group(2)]
    key = _ALIASES.get(key, key)
    if key not in _PRESETS:
        raise DomainError(f"unknown modulation {name!r}")
    needs_order, fn = _PRESETS[key]
    if needs_order:
        if M is None or M < 2:
            raise DomainError(f"modulation {name!r} needs an order M >= 2")
    beta, delta, zeta = fn(M)
    label = raw if M is None or str(M) in raw else f"{raw}({M})"
    return ModulationScheme(beta, delta, zeta, label)


@dataclass(frozen=True)
class CapacityFit:
    """``log2(1 + x) ~ sum_k deltas[k] * exp(-sigmas[k] * x)``."""

    deltas: Tuple[float, ...] = (9.331, -2.635, -4.032, -2.388)
    sigmas: Tuple[float, ...] = (0.000, 0.037, 0.004, 0.274)

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(float(v) for v in self.deltas))
        object.__setattr__(self, "sigmas", tuple(float(v) for v in self.sigmas))
        if len(self.deltas) != len(self.sigmas) or not self.deltas:
            raise DomainError("capacity fit needs equally many deltas and sigmas")
        if any(s < 0 or not math.isfinite(s) for s in self.sigmas):
            raise DomainError("capacity fit sigmas must be finite and >= 0")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return sum(d * np.exp(-s * x) for d, s in zip(self.deltas, self.sigmas))


DEFAULT_FIT = CapacityFit()


def outage(ch: MrcChannel, threshold: float, route="auto", **kw) -> float:
    if not threshold > 0:
        raise DomainError(f"threshold must be > 0, got {threshold!r}")
    return sum_cdf(ch, threshold, route, **kw)


def _log_ser_scale(ch: MrcChannel, mod: ModulationScheme) -> float:
    total = ch.total_mu
    return (math.log(mod.beta) + gammaln(total + mod.zeta) - total * math.log(mod.delta)
            - gammaln(mod.zeta) - gammaln(1.0 + total) + ch.log_prefactor)


def ser_fd(ch: MrcChannel, mod: ModulationScheme) -> float:
    """Average SER in closed form through the 2L-variate Lauricella function."""
    total = ch.total_mu
    a, c = total + mod.zeta, 1.0 + total
    if not c > a:
        raise DomainError("closed-form SER needs zeta < 1")
    fd = lauricella_fd(a, ch.shapes, c, -ch.rates / mod.delta)
    return math.exp(_log_ser_scale(ch, mod)) * fd


def asymptotic_ser(ch: MrcChannel, mod: ModulationScheme) -> float:
    """High-SNR SER: the closed form with the Lauricella factor set to 1."""
    return math.exp(_log_ser_scale(ch, mod))


def _branch_factors(ch: MrcChannel):
    """Gamma-ratio factors of the branch MGFs, ``prod (rate + s)^(-shape)``."""
    num, den = [], []
    for shape, rate in zip(ch.shapes, ch.rates):
        num.append((rate, 1.0, shape))
        den.append((1.0 + rate, 1.0, shape))
    return num, den


def ser_factors(ch: MrcChannel, mod: ModulationScheme) -> GammaFactorProduct:
    """Mellin-Barnes integrand of the Fox-H SER form.

    Built from the upper triples (Theta1, Theta2, (1,1,1), (2,1/delta,zeta))
    and lower triples ((1,1/delta,zeta), Theta3, Theta4, (0,1,1)) of
    ``H^{1,2L+1}_{2L+2,2L+2}``.
    """
    k = ch.coeffs
    upper = ([(1 - c.a_coef, 1, c.b_coef) for c in k] + [(1 - c.c_coef, 1, c.d_coef) for c in k]
             + [(1, 1, 1), (2, 1.0 / mod.delta, mod.zeta)])
    lower = ([(1, 1.0 / mod.delta, mod.zeta)] + [(-c.a_coef, 1, c.b_coef) for c in k]
             + [(-c.c_coef, 1, c.d_coef) for c in k] + [(0, 1, 1)])
    n = 2 * ch.L + 1
    return GammaFactorProduct.from_fox(1, n, upper, lower)


def ser_contour(ch: MrcChannel, mod: ModulationScheme, tolerance: float = 1e-12) -> ContourSpec:
    """Vertical line between the rightmost MGF singularity and the pole at 0.

    With this placement the pole of Gamma(s)/Gamma(1+s) at the origin lies
    right of the path, which is what produces the leading ``beta`` term.
    """
    return ContourSpec("vertical-line", abscissa=-0.5 * float(np.min(ch.rates)), tolerance=tolerance)


FOXH_REL_LIMIT = 1e-7


def _ser_foxh_on(ch, mod, contour):
    res = foxh_hat(ser_factors(ch, mod), 0.0, contour)
    pref = math.exp(ch.log_prefactor)
    err = mod.beta * pref * res.error
    if contour.abscissa < 0:
        value = mod.beta * (1.0 + pref * res.value)
    else:
        # right of the origin the residue at 0 is not picked up
        value = mod.beta * pref * res.value
    return value, err


def ser_foxh(ch: MrcChannel, mod: ModulationScheme, contour: Optional[ContourSpec] = None) -> float:
    """Average SER as ``beta + beta * prefactor * H``, H on a vertical line.

    The ``1 +`` form cancels at high SNR.  When its error estimate cannot
    back the result and no contour was given, other abscissas are tried,
    ending with ``0 < c < delta`` where the SER is ``beta * prefactor * H``
    directly.
    """
    left = -float(np.min(ch.rates))
    # error estimates vary with the abscissa; the value does not
    specs = [contour] if contour is not None else [
        ser_contour(ch, mod),
        ContourSpec("vertical-line", abscissa=0.25 * left, tolerance=1e-12),
        ContourSpec("vertical-line", abscissa=0.5 * mod.delta, tolerance=1e-12),
        ContourSpec("vertical-line", abscissa=0.25 * mod.delta, tolerance=1e-12),
    ]
    for spec in specs:
        if 0.0 <= spec.abscissa:
            if spec.abscissa == 0.0 or spec.abscissa >= mod.delta:
                raise DomainError("SER contour abscissa must lie in (-min rate, 0) or (0, delta)")
        value, err = _ser_foxh_on(ch, mod, spec)
        if math.isfinite(value) and err <= FOXH_REL_LIMIT * abs(value):
            return value
    raise ConvergenceError("Fox-H SER contour integral did not converge", partial=value, error=err)


QUAD_REL_LIMIT = 1e-6


def _check_quad(total, err, what):
    if not (math.isfinite(total) and err <= QUAD_REL_LIMIT * max(abs(total), 1e-300)):
        raise ConvergenceError(f"{what} quadrature did not converge", partial=total, error=err)


def ser_numint(ch: MrcChannel, mod: ModulationScheme, cdf: Optional[Callable[[float], float]] = None,
               rel_tol: float = 1e-10) -> float:
    """Average SER by quadrature of the CDF against the modulation kernel.

    ``cdf`` overrides the channel CDF (a test hook); the substitution
    ``u = gamma**zeta`` removes the endpoint singularity at the origin.
    """
    if cdf is None:
        def cdf(x):
            return sum_cdf(ch, x)
    delta, zeta = mod.delta, mod.zeta

    def integrand(u):
        g = u ** (1.0 / zeta)
        return math.exp(-delta * g) * cdf(g) if g > 0 else 0.0

    # the kernel has scale delta**-zeta in u; CDF structure sits near mean SNR
    scale_u = delta ** (-zeta)
    mean = sum(b.gbar for b in ch.branches)
    pts = sorted({scale_u, min(mean, 1e300) ** zeta})
    edges = [0.0] + [p * f for p in pts for f in (0.1, 1.0, 4.0)] + [np.inf]
    edges = sorted(set(edges))
    total, err = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=rel_tol, limit=200)
        total += v
        err += e
    _check_quad(total, err, "SER")
    scale = mod.beta * delta ** zeta / (zeta * math.exp(gammaln(zeta)))
    return scale * total


def fit_error_bound(fit: CapacityFit = DEFAULT_FIT, upper: float = 1e4) -> float:
    """``max over [0, upper]`` of ``|fit(x) - log2(1 + x)|``."""
    from scipy.optimize import minimize_scalar

    def err(x):
        return abs(float(fit(x)) - math.log2(1.0 + x))

    grid = np.concatenate(([0.0], np.geomspace(1e-4, upper, 4001)))
    vals = np.abs(fit(grid) - np.log2(1.0 + grid))
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda x: -err(x), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        best = max(best, -float(res.fun))
    return best


def capacity_fd(ch: MrcChannel, fit: CapacityFit = DEFAULT_FIT) -> float:
    """Fitted ergodic capacity in the Lauricella form.

    Each term is ``prefactor * sigma**-M * F_D(M, b; M; -rates/sigma)`` with
    ``M = sum(mu)``; a zero ``sigma`` contributes its ``delta`` unchanged.
    """
    total = ch.total_mu
    out = []
    for d, s in zip(fit.deltas, fit.sigmas):
        if s == 0.0:
            out.append(d)
            continue
        fd = lauricella_fd(total, ch.shapes, total, -ch.rates / s)
        out.append(d * math.exp(ch.log_prefactor - total * math.log(s)) * fd)
    return math.fsum(out)


def capacity_factors(ch: MrcChannel, sigma: float) -> GammaFactorProduct:
    """Integrand ``prod Gamma-ratio(rate + s) * Gamma(sigma - s)/Gamma(1 + sigma - s)``."""
    num, den = _branch_factors(ch)
    num.append((sigma, -1.0, 1.0))
    den.append((1.0 + sigma, -1.0, 1.0))
    return GammaFactorProduct(tuple(num), tuple(den))


def capacity_foxh(ch: MrcChannel, fit: CapacityFit = DEFAULT_FIT, tolerance: float = 1e-12) -> float:
    """Fitted ergodic capacity with each term as a Mellin-Barnes integral.

    The path runs between the MGF singularities and the pole at ``sigma``.
    """
    pref = math.exp(ch.log_prefactor)
    c = -0.5 * float(np.min(ch.rates))
    contour = ContourSpec("vertical-line", abscissa=c, tolerance=tolerance)
    out = []
    for d, s in zip(fit.deltas, fit.sigmas):
        if s == 0.0:
            out.append(d)
            continue
        res = foxh_hat(capacity_factors(ch, s), 0.0, contour)
        out.append(d * pref * res.value)
    return math.fsum(out)


def capacity_numint(ch: MrcChannel, exact_log: bool = True, fit: CapacityFit = DEFAULT_FIT,
                    pdf: Optional[Callable[[float], float]] = None, rel_tol: float = 1e-10) -> float:
    """Ergodic capacity by quadrature against the combined density.

    ``exact_log`` selects ``log2(1+x)``; otherwise the exponential fit.
    ``pdf`` overrides the channel density (a test hook).
    """
    if pdf is None:
        def pdf(x):
            return sum_pdf(ch, x)
    if exact_log:
        def weight(x):
            return math.log2(1.0 + x)
    else:
        def weight(x):
            return float(fit(x))
    mean = sum(b.gbar for b in ch.branches)
    edges = [0.0, 0.01 * mean, 0.1 * mean, mean, 4 * mean, 16 * mean, np.inf]
    total, err = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(lambda x: weight(x) * pdf(x) if x > 0 else 0.0, lo, hi,
                              epsabs=0.0, epsrel=rel_tol, limit=200)
        total += v
        err += e
    _check_quad(total, err, "capacity")
    return total
