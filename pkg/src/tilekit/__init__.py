"""Tools for translational tilings A + B = Z_M of finite cyclic groups."""
from .zmod import Modulus, as_modulus, euler_phi, factor, mobius
from .multiset import Multiset, from_set
from .cyclotomic import divides, profile, t1_check, t2_check
from .tiling import (
    TilingPair,
    VerificationError,
    divisor_set,
    make_pair,
    replacement_check,
    standard_complement,
    standard_set,
    verify,
)

__all__ = [
    "Modulus",
    "Multiset",
    "TilingPair",
    "VerificationError",
    "as_modulus",
    "divides",
    "divisor_set",
    "euler_phi",
    "factor",
    "from_set",
    "make_pair",
    "mobius",
    "profile",
    "replacement_check",
    "standard_complement",
    "standard_set",
    "t1_check",
    "t2_check",
    "verify",
]
__version__ = "0.1.0"
