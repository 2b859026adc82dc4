"""graphmark: heap-tree software watermarking with constant-encoding
tamper-proofing, transformation attacks, and a measurement harness."""

__version__ = "0.1.0"
