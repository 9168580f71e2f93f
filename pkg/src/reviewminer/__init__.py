"""Review analytics: cleaning, term statistics, LDA topic sweeps and sentiment labeling."""

__version__ = "0.1.0"
