"""stfsim - Monte-Carlo link-level simulator for spread dense IoT uplinks."""

__version__ = "1.0.0"
