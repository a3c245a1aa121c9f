"""Goal recognition and question-asking assistance over task networks."""

__version__ = "0.1.0"
