"""Eavesdropping models and detection experiments."""

from .attacks import ATTACK_KINDS, Attack, EveRecord, tap_entangle_measure, tap_intercept_resend
from .experiments import (
    ENGINES,
    TARGETS,
    AttackReport,
    detection_experiment,
    expected_detection,
    vote_leak_before_abort,
)

__all__ = [
    "ATTACK_KINDS",
    "ENGINES",
    "TARGETS",
    "Attack",
    "AttackReport",
    "EveRecord",
    "detection_experiment",
    "expected_detection",
    "tap_entangle_measure",
    "tap_intercept_resend",
    "vote_leak_before_abort",
]
