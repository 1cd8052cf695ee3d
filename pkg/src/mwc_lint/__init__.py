"""mwc-lint: static analysis for MoveEVM-lite contracts against the MWC taxonomy."""

__version__ = "0.1.0"
