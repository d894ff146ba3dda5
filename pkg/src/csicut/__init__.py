"""Cluster-based derivation of screening-questionnaire cut-off values."""

__version__ = "0.1.0"
