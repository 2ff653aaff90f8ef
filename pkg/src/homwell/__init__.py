"""Spectral checks of adapted 1-forms on T^2, homogeneous potential wells,
explicit well embeddings and Turing-machine suspension flows."""

__version__ = "0.1.0"
