"""Octuple algebra: generators, root reduction and seed normalization."""
