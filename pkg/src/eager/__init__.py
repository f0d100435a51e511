"""Entity resolution across knowledge graphs from attribute similarities and
graph embeddings."""

__version__ = "0.1.0"
