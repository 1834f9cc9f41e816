"""Beam-switched DOA estimation: simulation, correlation baseline and SwiGLU regressor."""

__version__ = "0.1.0"
