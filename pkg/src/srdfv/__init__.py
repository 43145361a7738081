"""srdfv: cut-cell finite-volume solver for 2D hyperbolic conservation laws
with state-redistribution small-cell stabilization."""

__version__ = "0.1.0"
