"""Orbit enumeration: curvature tables built from the octuple tree."""
