"""Downlink cell-free massive MIMO simulator with user-centric, multi-CPU serving."""

__version__ = "0.1.0"
