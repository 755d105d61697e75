"""Performance of maximal-ratio combining over extended eta-mu fading.

Branch statistics, the distribution of the combined SNR, outage,
average symbol error rate and approximate ergodic capacity, with a
Monte-Carlo oracle and a batch command-line front end.
"""

from .channel import (BranchParams, ComponentDecomposition, DerivedCoeffs, FormatIIParams, branch_log_pdf,
                      branch_mgf, branch_pdf, decompose, derived_coeffs, format1_to_format2,
                      format2_to_format1, mgf_gamma_ratio)
from .contour import ContourSpec, GammaFactor, GammaFactorProduct, InversionResult, bromwich_invert, foxh_hat
from .errors import AccuracyError, ConvergenceError, DomainError, PoleProximityError
from .hypergeo import SeriesControls, humbert_phi2, kummer_1f1, lauricella_fd, pochhammer
from .metrics import (DEFAULT_FIT, CapacityFit, ModulationScheme, asymptotic_ser, capacity_fd, capacity_foxh,
                      capacity_numint, fit_error_bound, modulation_preset, outage, ser_fd, ser_foxh, ser_numint)
from .montecarlo import (SimConfig, estimate_capacity, estimate_outage, estimate_ser, sample_branch, sample_sum,
                         simulate_sum)
from .sumstats import (EvalRoute, MrcChannel, asymptotic_cdf, iid_sum_cdf, iid_sum_pdf, sum_cdf, sum_cdf_array,
                       sum_mgf, sum_pdf, sum_pdf_array)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
