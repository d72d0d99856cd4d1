"""Random words, RSK shapes and their GUE limit."""

__version__ = "0.1.0"
