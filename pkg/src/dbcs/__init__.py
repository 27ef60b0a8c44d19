"""Design-based confidence intervals and confidence sequences for multi-arm bandits."""

__version__ = "0.1.0"
