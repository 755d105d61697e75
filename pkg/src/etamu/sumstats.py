"""Distribution of the MRC output SNR, the sum of L independent extended
eta-mu branch SNRs.

Two independent evaluation routes are provided:

* ``phi2-series``: the closed form in the confluent 2L-variate series.
* ``bromwich``: numerical inversion of the product of branch MGFs.

``auto`` uses the series for moderate arguments and the contour otherwise.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .channel import BranchParams, DerivedCoeffs, FormatIIParams, _as_format1, derived_coeffs
from .contour import DEFAULT_CONTOUR, ContourSpec, bromwich_invert
from .errors import AccuracyError, ConvergenceError, DomainError
from .hypergeo import DEFAULT_CONTROLS, SeriesControls, log_humbert_phi2

log = logging.getLogger(__name__)

__all__ = [
    "MrcChannel",
    "EvalRoute",
    "sum_mgf",
    "sum_pdf",
    "sum_cdf",
    "sum_cdf_array",
    "sum_pdf_array",
    "iid_sum_pdf",
    "iid_sum_cdf",
    "asymptotic_cdf",
]

#: largest series argument max(A, C)*gamma that ``auto`` hands to the series route
SERIES_ARGUMENT_LIMIT = 30.0
CLAMP_BAND = 1e-7


class EvalRoute(str, enum.Enum):
    PHI2_SERIES = "phi2-series"
    BROMWICH = "bromwich"
    AUTO = "auto"


@dataclass(frozen=True)
class MrcChannel:
    """Ordered collection of independent branches combined by MRC."""

    branches: Tuple[BranchParams, ...]

    def __post_init__(self):
        branches = tuple(_as_format1(b) for b in self.branches)
        if not branches:
            raise DomainError("an MRC channel needs at least one branch")
        object.__setattr__(self, "branches", branches)
        coeffs = tuple(derived_coeffs(b) for b in branches)
        object.__setattr__(self, "_coeffs", coeffs)

    @classmethod
    def iid(cls, branch: BranchParams, L: int) -> "MrcChannel":
        if L < 1 or int(L) != L:
            raise DomainError(f"L must be a positive integer, got {L!r}")
        return cls(tuple([branch] * int(L)))

    @classmethod
    def from_lists(cls, mu, eta, p, gbar) -> "MrcChannel":
        """Build a channel from per-branch lists; scalars are broadcast."""
        cols = [np.atleast_1d(np.asarray(v, dtype=float)) for v in (mu, eta, p, gbar)]
        L = max(len(c) for c in cols)
        cols = [np.broadcast_to(c, (L,)) for c in cols]
        return cls(tuple(BranchParams(*map(float, row)) for row in zip(*cols)))

    def with_gbar(self, gbar: float) -> "MrcChannel":
        return MrcChannel(tuple(b.with_gbar(gbar) for b in self.branches))

    def scaled(self, factor: float) -> "MrcChannel":
        return MrcChannel(tuple(b.with_gbar(b.gbar * factor) for b in self.branches))

    @property
    def L(self) -> int:
        return len(self.branches)

    @property
    def coeffs(self) -> Tuple[DerivedCoeffs, ...]:
        return self._coeffs

    @property
    def total_mu(self) -> float:
        return math.fsum(b.mu for b in self.branches)

    @property
    def log_prefactor(self) -> float:
        return math.fsum(k.log_prefactor for k in self._coeffs)

    @property
    def rates(self) -> np.ndarray:
        """Gamma rates, ordered (C_1..C_L, A_1..A_L)."""
        return np.array([k.c_coef for k in self._coeffs] + [k.a_coef for k in self._coeffs])

    @property
    def shapes(self) -> np.ndarray:
        """Gamma shapes, ordered (D_1..D_L, B_1..B_L)."""
        return np.array([k.d_coef for k in self._coeffs] + [k.b_coef for k in self._coeffs])

    def log_mgf(self, s):
        """Vectorized log of the product MGF for complex arrays ``s``."""
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape, dtype=complex)
        for shape, rate in zip(self.shapes, self.rates):
            out = out - shape * np.log1p(s / rate)
        return out

    def mgf(self, s):
        return np.exp(self.log_mgf(s))


def _route(route) -> EvalRoute:
    try:
        return EvalRoute(route)
    except ValueError:
        raise DomainError(f"unknown evaluation route {route!r}") from None


def sum_mgf(ch: MrcChannel, s: complex) -> complex:
    """Product of the branch MGFs at a single point ``s``."""
    s = complex(s)
    for rate in ch.rates:
        if s.imag == 0.0 and s.real <= -rate:
            raise DomainError(f"s={s!r} lies on a branch cut")
    return complex(ch.mgf(np.array([s]))[0])


def _series_log(ch: MrcChannel, snr: float, cdf: bool, ctl: SeriesControls):
    total = ch.total_mu
    c = total + 1.0 if cdf else total
    x = -ch.rates * snr
    log_phi, sign, converged, _ = log_humbert_phi2(ch.shapes, c, x, ctl)
    if not converged:
        return math.nan, False
    if sign <= 0:
        raise AccuracyError("series returned a nonpositive value")
    log_val = ch.log_prefactor + (c - 1.0) * math.log(snr) - math.lgamma(c) + log_phi
    return log_val, converged


def _at_origin_pdf(ch: MrcChannel) -> float:
    total = ch.total_mu
    if total > 1.0:
        return 0.0
    if total == 1.0:
        return math.exp(ch.log_prefactor)
    raise DomainError("the sum density diverges at 0 when the total mu is below 1")


def _use_series(ch: MrcChannel, snr: float) -> bool:
    return float(np.max(ch.rates)) * snr <= SERIES_ARGUMENT_LIMIT


def sum_pdf(ch: MrcChannel, snr: float, route="auto", contour: Optional[ContourSpec] = None,
            ctl: SeriesControls = DEFAULT_CONTROLS) -> float:
    """Density of the combined SNR at ``snr``."""
    route = _route(route)
    if not math.isfinite(snr) or snr < 0:
        raise DomainError(f"snr must be finite and >= 0, got {snr!r}")
    if snr == 0.0:
        return _at_origin_pdf(ch)
    contour = contour or DEFAULT_CONTOUR
    if route is EvalRoute.PHI2_SERIES or (route is EvalRoute.AUTO and _use_series(ch, snr)):
        log_val, converged = _series_log(ch, snr, False, ctl)
        if not converged:
            if route is EvalRoute.PHI2_SERIES:
                raise ConvergenceError("Phi2 series did not converge", partial=math.exp(log_val))
            return _bromwich_pdf(ch, snr, contour)
        return math.exp(log_val)
    return _bromwich_pdf(ch, snr, contour)


def _bromwich_pdf(ch, snr, contour):
    shift = float(np.min(ch.rates))
    res = bromwich_invert(ch.mgf, snr, False, contour, shift=shift)
    if not res.error <= contour.tolerance * max(abs(res.value), 1.0):
        raise AccuracyError(f"contour inversion error {res.error:.3g} at snr={snr} exceeds tolerance")
    return max(res.value, 0.0)


def _clamp_cdf(value: float, snr: float) -> float:
    if 0.0 <= value <= 1.0:
        return value
    if -CLAMP_BAND <= value < 0.0 or 1.0 < value <= 1.0 + CLAMP_BAND:
        log.debug("clamping CDF value %.3g at snr=%g", value, snr)
        return min(max(value, 0.0), 1.0)
    raise AccuracyError(f"CDF value {value!r} at snr={snr} is outside [0, 1]")


def sum_cdf(ch: MrcChannel, snr: float, route="auto", contour: Optional[ContourSpec] = None,
            ctl: SeriesControls = DEFAULT_CONTROLS) -> float:
    """``P(sum <= snr)`` for the combined SNR."""
    route = _route(route)
    if not math.isfinite(snr) or snr < 0:
        raise DomainError(f"snr must be finite and >= 0, got {snr!r}")
    if snr == 0.0:
        return 0.0
    contour = contour or DEFAULT_CONTOUR
    if route is EvalRoute.PHI2_SERIES or (route is EvalRoute.AUTO and _use_series(ch, snr)):
        log_val, converged = _series_log(ch, snr, True, ctl)
        if converged:
            return _clamp_cdf(math.exp(log_val), snr)
        if route is EvalRoute.PHI2_SERIES:
            raise ConvergenceError("Phi2 series did not converge", partial=math.exp(log_val))
    res = bromwich_invert(ch.mgf, snr, True, contour)
    if not res.error <= contour.tolerance * max(abs(res.value), 1.0):
        if route is EvalRoute.AUTO:
            log_val, converged = _series_log(ch, snr, True, ctl)
            if converged:
                return _clamp_cdf(math.exp(log_val), snr)
        raise AccuracyError(f"contour inversion error {res.error:.3g} at snr={snr} exceeds tolerance")
    return _clamp_cdf(res.value, snr)


def sum_cdf_array(ch: MrcChannel, snrs, contour: Optional[ContourSpec] = None) -> np.ndarray:
    """Vectorized contour CDF on a grid (used by the Monte-Carlo checks and quadratures)."""
    snrs = np.asarray(snrs, dtype=float)
    out = np.zeros(snrs.shape)
    pos = snrs > 0
    if np.any(pos):
        res = bromwich_invert(ch.mgf, snrs[pos], True, contour or DEFAULT_CONTOUR)
        out[pos] = np.clip(res.value, 0.0, 1.0)
    return out


def sum_pdf_array(ch: MrcChannel, snrs, contour: Optional[ContourSpec] = None) -> np.ndarray:
    snrs = np.asarray(snrs, dtype=float)
    out = np.zeros(snrs.shape)
    pos = snrs > 0
    if np.any(pos):
        res = bromwich_invert(ch.mgf, snrs[pos], False, contour or DEFAULT_CONTOUR, shift=float(np.min(ch.rates)))
        out[pos] = np.maximum(res.value, 0.0)
    if np.any(~pos):
        out[~pos] = _at_origin_pdf(ch)
    return out


def _iid_log(branch: BranchParams, L: int, snr: float, cdf: bool, ctl: SeriesControls):
    if L < 1 or int(L) != L:
        raise DomainError(f"L must be a positive integer, got {L!r}")
    k = derived_coeffs(branch)
    total = branch.mu * L
    c = total + 1.0 if cdf else total
    log_phi, sign, converged, _ = log_humbert_phi2(
        [k.d_coef * L, k.b_coef * L], c, [-k.c_coef * snr, -k.a_coef * snr], ctl
    )
    if not converged or sign <= 0:
        raise ConvergenceError("bivariate Phi2 series did not converge")
    return L * k.log_prefactor + (c - 1.0) * math.log(snr) - math.lgamma(c) + log_phi


def iid_sum_pdf(branch: BranchParams, L: int, snr: float, ctl: SeriesControls = DEFAULT_CONTROLS) -> float:
    """Density of the sum of ``L`` identically distributed branches (bivariate series)."""
    branch = _as_format1(branch)
    if not math.isfinite(snr) or snr < 0:
        raise DomainError(f"snr must be finite and >= 0, got {snr!r}")
    if snr == 0.0:
        return _at_origin_pdf(MrcChannel.iid(branch, L))
    return math.exp(_iid_log(branch, L, snr, False, ctl))


def iid_sum_cdf(branch: BranchParams, L: int, snr: float, ctl: SeriesControls = DEFAULT_CONTROLS) -> float:
    branch = _as_format1(branch)
    if not math.isfinite(snr) or snr < 0:
        raise DomainError(f"snr must be finite and >= 0, got {snr!r}")
    if snr == 0.0:
        return 0.0
    return _clamp_cdf(math.exp(_iid_log(branch, L, snr, True, ctl)), snr)


def asymptotic_cdf(ch: MrcChannel, snr: float) -> float:
    """High-SNR approximation of the CDF (leading term of the series; not clamped)."""
    if not snr > 0:
        raise DomainError(f"snr must be > 0, got {snr!r}")
    total = ch.total_mu
    return math.exp(ch.log_prefactor + total * math.log(snr) - math.lgamma(1.0 + total))
