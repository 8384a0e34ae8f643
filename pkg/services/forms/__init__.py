"""Quaternary form f_{a0}: representation counts, local densities and the main term."""
