"""Core package for LAMA."""
