"""Toolkit for predicting fine-tuning data requirements from small-sample
gradient and confidence statistics."""

__version__ = "0.1.0"
