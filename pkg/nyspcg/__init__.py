"""Randomized Nystrom preconditioning for regularized linear systems."""

__version__ = '0.0.0'
