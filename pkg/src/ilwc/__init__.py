"""Perfect n/2 inverted limited-weight coding for NAND flash, with an analytical cell model."""
from .codec import (
    Codeword,
    DecodeErrorRecord,
    ILWCError,
    InvalidConfigError,
    InvalidWeightError,
    SegmentConfig,
    codeword_weight,
    decode_segment,
    encode_segment,
    lwc_feasible,
    verify_perfect_parameters,
)
from .container import (
    ContainerFormatError,
    EncodedContainer,
    IntegrityError,
    decode_stream,
    encode_stream,
)
from .flash import DEVICE_PRESETS, CellStateDistribution, DeviceGeometry, FlashParams, MLCState, SLCState, load_params
from .metrics import BitStats, GainInputs, coding_gain, energy_gain, expected_ones_uniform, ones_probability

__version__ = "0.1.0"
