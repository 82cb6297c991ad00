"""Error correction of real-valued signals with Bayesian AMP and seeded matrices."""

from secc.errors import (
    BracketError,
    ConfigurationError,
    DivergenceError,
    DomainError,
    RankError,
    SeccError,
)
from secc.prior import TwoGaussPrior, f_a, f_b, f_c, denoise
from secc.coding import (
    CodePair,
    SeedSpec,
    VarianceProfile,
    encode,
    homogeneous_profile,
    make_code,
    null_space_code,
    pinv_decode,
    sample_operator,
    seeded_profile,
)
from secc.channel import ChannelDraw, corrupt, gaussian_signal, robustness_ratio
from secc.amp import AmpOptions, AmpState, DecodeReport, amp_decode, amp_init, amp_step, decode_signal
from secc.l1 import L1Options, L1Report, l1_decode, l1_decode_signal

__version__ = "0.1.0"
