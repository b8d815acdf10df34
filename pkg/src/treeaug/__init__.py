"""Dependency-tree crop and rotate augmentation with a character-level
bi-LSTM POS tagger for measuring its effect."""

__version__ = "0.1.0"
