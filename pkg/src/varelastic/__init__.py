"""Elastic energies, varifold checks, parity reconstruction and junction analysis
for finite systems of closed planar curves."""

__version__ = "0.1.0"
FORMAT_VERSION = 1
