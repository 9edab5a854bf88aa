"""File storage for LAMA."""
