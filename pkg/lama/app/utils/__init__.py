"""Utilities for LAMA."""
