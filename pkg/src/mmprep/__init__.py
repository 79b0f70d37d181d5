"""mmprep: deterministic planning and curation toolkit for long-context multimodal training data."""

__version__ = "0.1.0"
