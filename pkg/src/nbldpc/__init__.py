"""Non-binary LDPC codes over GF(2^m) on binary-input symmetric channels."""
__version__ = "0.1.0"
