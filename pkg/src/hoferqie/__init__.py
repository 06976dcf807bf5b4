"""Quasi-isometric embeddings of Z^N into Hamiltonian diffeomorphisms of the
cotangent bundle of a flat torus, with certified Hofer-norm bounds."""

from .certify import BoundCertificate, certify, epsilon, growth_scan
from .dynamics import LatticeElement
from .geometry import CotangentPoint, DeckTransformation, ModelConfig

__all__ = [
    "BoundCertificate",
    "CotangentPoint",
    "DeckTransformation",
    "LatticeElement",
    "ModelConfig",
    "certify",
    "epsilon",
    "growth_scan",
]
__version__ = "0.1.0"
