"""Exact verification of half-flatness, Monge-Ampere type and dispersionless
Lax pairs for second-order PDEs."""

__version__ = "0.1.0"
