"""Test suite for the octet packings toolkit."""
