"""Numerical kernels for the integrated geometric-Brownian diffusion.

Exact and series-expanded optimal cost functions, correction-factor kernels,
reference transition densities, convolution-inequality experiments and Asian
option pricing, exposed both as a library and through the ``hypoparam`` CLI.
"""

__version__ = "0.1.0"
