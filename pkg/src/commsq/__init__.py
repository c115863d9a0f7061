"""Commuting squares of multi-matrix algebras: graphs, spectra, bi-unitary constructions."""

__version__ = "0.1.0"
