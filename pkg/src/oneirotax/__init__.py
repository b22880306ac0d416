"""oneirotax: unsupervised topic discovery and trend analysis for report corpora."""

__version__ = "0.1.0"
