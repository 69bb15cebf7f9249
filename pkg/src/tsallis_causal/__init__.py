"""Tsallis entropy vectors for causal structures."""
__version__ = "0.1.0"
