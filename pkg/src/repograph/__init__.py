"""repograph: typed knowledge graphs over Git repositories with hybrid QA."""

__version__ = "0.1.0"
