"""Extended eta-mu branch model: parameter formats, coefficients, PDF and MGF.

All computations use Format I internally (``eta`` and ``p`` are positive
ratios).  Format II inputs are converted at the boundary with
:func:`format2_to_format1`.

A branch SNR is the sum of two independent Gamma variates, with shapes
``B = mu/(1+p)`` and ``D = mu*p/(1+p)`` and rates ``A = xi*mu/gbar`` and
``C = p*xi*mu/(eta*gbar)``.  Every quantity below is expressed in terms of
these four constants.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import loggamma

from .errors import DomainError, PoleProximityError
from .hypergeo import log_kummer_1f1

__all__ = [
    "BranchParams",
    "FormatIIParams",
    "ComponentDecomposition",
    "DerivedCoeffs",
    "format2_to_format1",
    "format1_to_format2",
    "decompose",
    "derived_coeffs",
    "branch_pdf",
    "branch_log_pdf",
    "branch_mgf",
    "mgf_gamma_ratio",
]

POLE_TOL = 1e-9


def _check_positive(name, value):
    if not (isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value)):
        raise DomainError(f"{name} must be a finite real number, got {value!r}")
    if value <= 0:
        raise DomainError(f"{name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class BranchParams:
    """Fading parameters of one diversity branch (Format I).

    Attributes
    ----------
    mu : float
        Total number of multipath clusters.
    eta : float
        In-phase to quadrature power ratio.
    p : float
        In-phase to quadrature cluster-count ratio.
    gbar : float
        Mean SNR, linear scale.
    """

    mu: float
    eta: float
    p: float
    gbar: float

    def __post_init__(self):
        for name in ("mu", "eta", "p", "gbar"):
            _check_positive(name, getattr(self, name))
            object.__setattr__(self, name, float(getattr(self, name)))

    def with_gbar(self, gbar: float) -> "BranchParams":
        return BranchParams(self.mu, self.eta, self.p, gbar)


@dataclass(frozen=True)
class FormatIIParams:
    """Format II parameters: ``eta2`` and ``p2`` are normalized differences in (-1, 1)."""

    mu: float
    eta2: float
    p2: float
    gbar: float

    def __post_init__(self):
        _check_positive("mu", self.mu)
        _check_positive("gbar", self.gbar)
        for name in ("eta2", "p2"):
            v = getattr(self, name)
            if not math.isfinite(v) or abs(v) >= 1.0:
                raise DomainError(f"Format II {name} must lie in (-1, 1), got {v!r}")


@dataclass(frozen=True)
class ComponentDecomposition:
    """Per-component cluster counts and powers of a branch."""

    mu_x: float
    mu_y: float
    omega_x: float
    omega_y: float
    rhat2: float


@dataclass(frozen=True)
class DerivedCoeffs:
    """Constants shared by the single-branch and sum distributions.

    ``a_coef``/``c_coef`` are the two Gamma rates, ``b_coef``/``d_coef`` the
    matching shapes, and ``prefactor`` equals ``a_coef**b_coef * c_coef**d_coef``.
    """

    xi: float
    a_coef: float
    b_coef: float
    c_coef: float
    d_coef: float
    prefactor: float
    log_prefactor: float


def format2_to_format1(f2: FormatIIParams) -> BranchParams:
    if not isinstance(f2, FormatIIParams):
        raise TypeError("expected FormatIIParams")
    return BranchParams(
        f2.mu, (1.0 + f2.eta2) / (1.0 - f2.eta2), (1.0 + f2.p2) / (1.0 - f2.p2), f2.gbar
    )


def format1_to_format2(f1: BranchParams) -> FormatIIParams:
    return FormatIIParams(f1.mu, (f1.eta - 1.0) / (f1.eta + 1.0), (f1.p - 1.0) / (f1.p + 1.0), f1.gbar)


def _as_format1(params: Union[BranchParams, FormatIIParams]) -> BranchParams:
    if isinstance(params, FormatIIParams):
        return format2_to_format1(params)
    if not isinstance(params, BranchParams):
        raise TypeError(f"expected BranchParams or FormatIIParams, got {type(params).__name__}")
    return params


def decompose(f1: BranchParams, rhat2: float) -> ComponentDecomposition:
    """Split a branch into in-phase and quadrature cluster counts and powers."""
    f1 = _as_format1(f1)
    _check_positive("rhat2", rhat2)
    mu, eta, p = f1.mu, f1.eta, f1.p
    return ComponentDecomposition(
        mu_x=2.0 * mu * p / (1.0 + p),
        mu_y=2.0 * mu / (1.0 + p),
        omega_x=2.0 * eta * rhat2 / (1.0 + eta),
        omega_y=2.0 * rhat2 / (1.0 + eta),
        rhat2=float(rhat2),
    )


def derived_coeffs(f1: BranchParams) -> DerivedCoeffs:
    f1 = _as_format1(f1)
    mu, eta, p, gbar = f1.mu, f1.eta, f1.p, f1.gbar
    xi = (1.0 + eta) / (1.0 + p)
    a = xi * mu / gbar
    c = p * xi * mu / (eta * gbar)
    b = mu / (1.0 + p)
    d = mu * p / (1.0 + p)
    log_pref = mu * (math.log(mu * xi / gbar) + (p / (1.0 + p)) * math.log(p / eta))
    return DerivedCoeffs(xi, a, b, c, d, math.exp(log_pref), log_pref)


def branch_log_pdf(f1: BranchParams, snr: float) -> float:
    """Natural log of the branch density; ``-inf`` where the density vanishes."""
    f1 = _as_format1(f1)
    if snr < 0 or not math.isfinite(snr):
        raise DomainError(f"snr must be finite and >= 0, got {snr!r}")
    k = derived_coeffs(f1)
    mu = f1.mu
    if snr == 0.0:
        if mu > 1.0:
            return -math.inf
        if mu == 1.0:
            return k.log_prefactor
        return math.inf
    # Keep the 1F1 argument nonpositive-free: factor out the larger rate.
    if k.a_coef >= k.c_coef:
        log_h, sign = log_kummer_1f1(k.d_coef, mu, (k.a_coef - k.c_coef) * snr)
        rate = k.a_coef
    else:
        log_h, sign = log_kummer_1f1(k.b_coef, mu, (k.c_coef - k.a_coef) * snr)
        rate = k.c_coef
    if sign <= 0:
        raise ArithmeticError("confluent series returned a nonpositive value")
    return k.log_prefactor - math.lgamma(mu) + (mu - 1.0) * math.log(snr) - rate * snr + log_h


def branch_pdf(f1: BranchParams, snr: float) -> float:
    """Density of the branch SNR at ``snr`` (per linear SNR unit).

    Raises
    ------
    OverflowError
        If the density is not representable as a float.
    """
    value = branch_log_pdf(f1, snr)
    if value > 709.78:
        raise OverflowError(f"branch density overflows at snr={snr!r}")
    return math.exp(value)


def _check_cut(s, rate):
    # principal-branch cut of (1 + s/rate)^w is s <= -rate on the real axis
    if s.imag == 0.0 and s.real <= -rate:
        raise DomainError(f"s={s!r} lies on the branch cut (-inf, {-rate}]")


def branch_mgf(f1: Union[BranchParams, FormatIIParams], s: complex) -> complex:
    """Laplace-convention MGF ``E[exp(-s*gamma)]`` of one branch."""
    f1 = _as_format1(f1)
    k = derived_coeffs(f1)
    s = complex(s)
    _check_cut(s, k.a_coef)
    _check_cut(s, k.c_coef)
    return cmath.exp(-k.b_coef * cmath.log(1.0 + s / k.a_coef) - k.d_coef * cmath.log(1.0 + s / k.c_coef))


def mgf_gamma_ratio(f1: Union[BranchParams, FormatIIParams], s: complex) -> complex:
    """The branch MGF written as a ratio of fractional powers of Gamma functions.

    Evaluated through the continuous complex log-Gamma so that the
    fractional exponents stay on one branch.
    """
    f1 = _as_format1(f1)
    k = derived_coeffs(f1)
    s = complex(s)
    _check_cut(s, k.a_coef)
    _check_cut(s, k.c_coef)
    for rate in (k.a_coef, k.c_coef):
        z = rate + s
        if z.real <= 0 and abs(z.imag) < POLE_TOL and abs(z.real - round(z.real)) < POLE_TOL:
            raise PoleProximityError(f"s={s!r} is within {POLE_TOL} of a Gamma pole")
    mu, eta, p, gbar = f1.mu, f1.eta, f1.p, f1.gbar
    log_scale = -(mu / (1.0 + p)) * (p * math.log(eta / p) + (p + 1.0) * math.log(gbar / (k.xi * mu)))
    za, zc = k.a_coef + s, k.c_coef + s
    log_ratio = k.b_coef * (loggamma(za) - loggamma(za + 1.0)) + k.d_coef * (loggamma(zc) - loggamma(zc + 1.0))
    return complex(np.exp(log_scale + log_ratio))
