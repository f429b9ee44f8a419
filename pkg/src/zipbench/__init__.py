"""Zippers versus mutable fingers: data structures, workloads and benchmarks."""

__version__ = "0.1.0"
