"""Structure-guided person-name entity resolution."""

__version__ = "0.1.0"
