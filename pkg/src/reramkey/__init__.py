"""Key generation from ternary ReRAM PUF responses with a BCH + polar fuzzy extractor."""
from .bch import BchCodeSpec, DecodeFailure, bch_decode, bch_encode, build_bch_spec
from .extractor import (
    EnrollmentRecord,
    IntegrityError,
    RegenResult,
    SecretKey,
    deserialize_record,
    full_size_params,
    register,
    regenerate,
    serialize_record,
    verify,
)
from .polar import BACKEND, DecoderConfig, PolarCodeSpec, construct_frozen_set, polar_transform

__version__ = "0.1.0"
