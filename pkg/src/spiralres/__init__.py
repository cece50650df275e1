"""Design and loss-analysis toolkit for superconducting spiral resonators.

Forward design (inductance, fundamental frequency, impedance), complex
reflection fitting, and loss decomposition into two-level-system,
quasiparticle and residual channels across temperature, power and
magnetic-field sweeps.
"""

from .bcs import (gap_at_temperature, mattis_bardeen, qp_frequency_shift,
                  qp_quality_shift)
from .constants import CONST, PhysicalConstants
from .core import (ComplexSpectrum, FitResult, MaterialModel, SpiralGeometry,
                   validate_geometry)
from .design import (DesignResult, characteristic_impedance, design_summary,
                     estimate_design_frequency, fundamental_frequency,
                     geometric_inductance, kinetic_from_alpha,
                     predict_loaded_frequency, solve_geometry,
                     solve_geometry_joint)
from .kernels import BACKEND as KERNEL_BACKEND
from .leastsq import lm_minimize
from .resfit import S11Model, fit_s11, loaded_quality, model_from_fit, \
    s11_forward
from .sweeps import (DualChannelResult, EsrFeature, SweepRecord, detect_esr,
                     fit_combined, fit_field_quadratic, fit_power_sweep_tls,
                     fit_temperature_sweep_qp, fit_zeeman, photon_number)
from .synth import (FieldTruth, GroundTruth, NoiseSpec,
                    Xoshiro256StarStar, default_frequency_grid, synth_sweep,
                    synth_trace)
from .tls import (TlsParams, combined_loss_model, power_law_loss,
                  tls_frequency_shift, tls_quality)

__version__ = "0.1.0"

__all__ = [
    "CONST",
    "PhysicalConstants",
    "ComplexSpectrum",
    "FitResult",
    "MaterialModel",
    "SpiralGeometry",
    "validate_geometry",
    "KERNEL_BACKEND",
    "DesignResult",
    "characteristic_impedance",
    "design_summary",
    "estimate_design_frequency",
    "fundamental_frequency",
    "geometric_inductance",
    "kinetic_from_alpha",
    "predict_loaded_frequency",
    "solve_geometry",
    "solve_geometry_joint",
    "gap_at_temperature",
    "mattis_bardeen",
    "qp_frequency_shift",
    "qp_quality_shift",
    "TlsParams",
    "combined_loss_model",
    "power_law_loss",
    "tls_frequency_shift",
    "tls_quality",
    "lm_minimize",
    "S11Model",
    "fit_s11",
    "loaded_quality",
    "model_from_fit",
    "s11_forward",
    "DualChannelResult",
    "EsrFeature",
    "SweepRecord",
    "detect_esr",
    "fit_combined",
    "fit_field_quadratic",
    "fit_power_sweep_tls",
    "fit_temperature_sweep_qp",
    "fit_zeeman",
    "photon_number",
    "FieldTruth",
    "GroundTruth",
    "NoiseSpec",
    "Xoshiro256StarStar",
    "default_frequency_grid",
    "synth_sweep",
    "synth_trace",
    "__version__",
]
