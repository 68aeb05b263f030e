"""modtrace: numerical verification of modular theory and Haagerup trace identities."""

__version__ = "0.1.0"
