"""Exact ground states, critical droplets, disorder chaos and variance bounds for the
Edwards-Anderson spin glass on small boxes."""

__version__ = "0.1.0"
