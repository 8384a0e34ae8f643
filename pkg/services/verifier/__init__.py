"""Local-global verification of the curvature set against the admissible residues."""
