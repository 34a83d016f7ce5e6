"""GCN sentence classification on dependency graphs with layerwise relevance tracing."""

__version__ = "0.1.0"
