"""rmtlab: numerical laboratory for Wigner-type and band random matrices."""

__version__ = "0.1.0"
