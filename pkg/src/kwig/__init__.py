"""Construction, querying and verification of k-wise independent random graphs."""

__version__ = "0.1.0"
