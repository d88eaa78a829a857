"""Secure multiplex coding for discrete memoryless wiretap channels.

Library layout:

- channels: alphabets, distributions, channels, and scalar information measures
- spectrum: exact finite-blocklength information-density spectra and tails
- capacity: channel/secrecy capacity and multiplex rate-region membership
- multiplex: random multiplex codebooks and threshold / ML decoding
- security: exact per-message error, leakage, and distance evaluation
- ensemble: random-coding bounds, seeded ensembles, code-existence selection
- resolvability: output-distribution synthesis experiments
- cli: `secmux run/describe` config-driven experiment runner
"""

from .channels import (
    Dist,
    Dmc,
    JointWord,
    WiretapPair,
    cascade,
    entropy,
    is_full_rank,
    kl_divergence,
    l1_distance,
    load_channel,
    load_pair,
    mutual_information,
    output_dist,
    product_extend,
    save_channel,
    save_pair,
)
from .spectrum import (
    Spectrum,
    convolve_spectrum,
    iid_spectrum,
    single_letter_spectrum,
    spectrum_mean,
    tail_above,
    tail_below,
)
from .capacity import (
    RateTuple,
    RegionSpec,
    SecrecySolution,
    channel_capacity,
    equal_rate_capacity_tuple,
    is_degraded,
    minimal_t,
    region_membership,
    secrecy_capacity,
    secrecy_gap,
)
from .multiplex import (
    DecodeOutcome,
    MultiplexCode,
    encode,
    generate_codebook,
    load_codebook,
    ml_decode,
    save_codebook,
    stochastic_encode,
    threshold_decode,
)
from .security import (
    ConditionalOutput,
    SecurityReport,
    conditional_outputs,
    exact_error,
    exact_leakage,
    exact_vd,
    mixture_distance_bound,
    pinsker_check,
    security_report,
    verdu_han_lower_bound,
)
from .ensemble import (
    BoundInputs,
    EnsembleResult,
    achievability_params,
    ensemble_bounds,
    ensemble_experiment,
    existence_check,
    mc_tail_estimate,
)
from .resolvability import rate_sweep, resolvability_distance

__version__ = "0.1.0"
