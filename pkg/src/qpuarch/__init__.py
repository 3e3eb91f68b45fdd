"""Architecture toolkit for a degree-15 quantum annealing processor."""

__version__ = "0.1.0"
