"""Conjecture-driven multi-leader Stackelberg game engine and experiment harness."""

__version__ = "0.1.0"
