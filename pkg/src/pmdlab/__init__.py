"""Mirror-descent policy optimization on small tasks, with a sweep harness."""

__version__ = "0.1.0"
