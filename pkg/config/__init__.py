"""Runtime configuration for the octet toolkit."""
