"""Exact branch-and-cut for multi-agent rural postman routing with arc unavailability windows."""

__version__ = "0.1.0"
