"""Non-Hermitian absorption spectroscopy: simulation, fitting and band topology."""

__version__ = "0.1.0"
