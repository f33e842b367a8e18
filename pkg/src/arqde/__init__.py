"""Distortion exponents of layered source transmission over block-fading
MIMO channels with per-layer ARQ feedback.

The package has three analytic layers and a simulation layer:

* ``dmt``: exact diversity-multiplexing tradeoff curves;
* ``exponent``: optimal distortion exponents via supporting lines;
* ``layering``: finite layer-rate allocations from the forward/backward
  recursion, with equal-exponent verification;
* ``channel`` / ``simulator``: Rayleigh MIMO outage sampling and the
  finite-SNR distortion simulator, with exact 1x1 oracles;
* ``cli``: command-line frontend emitting CSV/JSON plus run manifests.
"""

__version__ = "0.1.0"

from .channel import (
    BLOCK,
    ChannelMatrix,
    DiversityFit,
    OutageEstimate,
    capacity,
    capacity_from_eigenvalues,
    estimate_diversity,
    gram_eigenvalues,
    outage_prob_mc,
    outage_prob_siso_exact,
    sample_channel,
    sample_channel_batch,
    substream,
)
from .dmt import (
    AntennaConfig,
    DmtCurve,
    build_dmt,
    eval_dmt,
    invert_dmt,
    segment_slopes,
)
from .exponent import (
    DeltaLine,
    delta_line,
    exponent_breakpoints,
    segment_slope_magnitudes,
    upper_bound_exponent,
)
from .layering import (
    ExponentResidual,
    LayerAllocation,
    assign_layers,
    convergence_sweep,
    equalizing_gain,
    exponent_terms,
    finite_layer_exponent,
    verify_equal_exponents,
)
from .simulator import (
    DistortionPoint,
    DistortionReport,
    SimConfig,
    decoded_layers,
    distortion_of,
    fit_exponent,
    run_sim,
)

__all__ = [
    "AntennaConfig",
    "BLOCK",
    "ChannelMatrix",
    "DeltaLine",
    "DistortionPoint",
    "DistortionReport",
    "DiversityFit",
    "DmtCurve",
    "ExponentResidual",
    "LayerAllocation",
    "OutageEstimate",
    "SimConfig",
    "__version__",
    "assign_layers",
    "build_dmt",
    "capacity",
    "capacity_from_eigenvalues",
    "convergence_sweep",
    "decoded_layers",
    "delta_line",
    "distortion_of",
    "equalizing_gain",
    "estimate_diversity",
    "eval_dmt",
    "exponent_breakpoints",
    "exponent_terms",
    "fit_exponent",
    "finite_layer_exponent",
    "gram_eigenvalues",
    "invert_dmt",
    "outage_prob_mc",
    "outage_prob_siso_exact",
    "run_sim",
    "sample_channel",
    "sample_channel_batch",
    "segment_slope_magnitudes",
    "segment_slopes",
    "substream",
    "upper_bound_exponent",
    "verify_equal_exponents",
]
