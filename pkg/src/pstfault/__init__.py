"""Internal fault identification for phase shift transformers."""

__version__ = "0.1.0"
