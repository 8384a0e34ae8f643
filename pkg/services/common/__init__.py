"""Shared value types, errors and serialization helpers."""
