"""Content indirection toolkit: off-site hosting behind pseudo-content."""

__version__ = "0.1.0"
