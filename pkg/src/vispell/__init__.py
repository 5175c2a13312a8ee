"""Vietnamese spelling detection and correction toolkit."""

__version__ = "0.1.0"
