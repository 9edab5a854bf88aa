"""LAMA - Lane-graph Maneuver Analysis."""
__version__ = "1.0.0"
