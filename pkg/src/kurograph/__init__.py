"""Kuramoto oscillators on graphon-generated graphs: spectra, onset of
synchronization, bifurcating branches and their numerical verification."""

__version__ = "0.1.0"
