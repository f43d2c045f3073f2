"""Security building blocks: decoy checks, pairwise keys and QDS authentication."""

from .decoys import (
    BB84_LABELS,
    SUBROUTINES,
    ChannelSegment,
    DecoyConfig,
    DecoyRecord,
    DecoyVerdict,
    decoy_protect,
    decoy_verify,
    extract_payload,
)
from .qds import EliminationSignature, QDSVerdict, eliminated_state, qds_enroll, qds_verify
from .keys import KEY_METHODS, KeyString, distribute_bell_pairs, establish_key, xor_bits

__all__ = [
    "BB84_LABELS",
    "KEY_METHODS",
    "SUBROUTINES",
    "ChannelSegment",
    "DecoyConfig",
    "DecoyRecord",
    "DecoyVerdict",
    "EliminationSignature",
    "KeyString",
    "QDSVerdict",
    "decoy_protect",
    "decoy_verify",
    "distribute_bell_pairs",
    "eliminated_state",
    "establish_key",
    "extract_payload",
    "qds_enroll",
    "qds_verify",
    "xor_bits",
]
