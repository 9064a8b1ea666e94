"""Transfer matrices for one-dimensional scattering by long-range potentials."""
__version__ = "0.1.0"
