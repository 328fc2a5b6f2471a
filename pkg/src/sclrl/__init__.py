"""Self-supervised link representation learning via subgraph contrast."""

__version__ = "0.1.0"
