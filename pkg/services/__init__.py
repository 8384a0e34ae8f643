"""Service layer modules for the octet packings toolkit."""
