"""Simulator for storage and retrieval of orbital-angular-momentum light in a
cold atomic ensemble, including Larmor-driven collapses and revivals."""

__version__ = "0.1.0"
