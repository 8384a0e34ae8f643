"""Command-line gateway and orchestration for the octet toolkit."""
