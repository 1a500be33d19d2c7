"""Concrete model instances wiring geometry and operators together."""

from .darboux import darboux_model
from .r3 import r3_model
from .hamsys import hamsys_model
from .s3 import s3_strict_model, s3_truncation_scan, s3_ambient_model, s3_reduce_to_strict
from .contactization import contactization_model

__all__ = [
    "darboux_model",
    "r3_model",
    "hamsys_model",
    "s3_strict_model",
    "s3_truncation_scan",
    "s3_ambient_model",
    "s3_reduce_to_strict",
    "contactization_model",
]
