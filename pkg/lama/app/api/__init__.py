"""Command surface for LAMA."""
