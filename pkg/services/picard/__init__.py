"""Exact checks of the Picard-group bridge behind the explicit curvature subset."""
