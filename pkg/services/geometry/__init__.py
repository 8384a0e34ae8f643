"""Inversive geometry in abbc coordinates."""
