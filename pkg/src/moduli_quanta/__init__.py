"""Complex structures on phase space, Bogoliubov sectors, q-series and
matrix-model dynamics at finite dimension."""

__version__ = "0.1.0"
