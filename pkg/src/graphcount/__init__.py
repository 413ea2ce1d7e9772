"""Counting-logic and GNN workbench with brute-force cross-verification oracles."""

__version__ = "0.1.0"
