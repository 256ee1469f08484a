"""Branch-solve-merge LLM program engine."""

__version__ = "0.1.0"
