"""Benchmarking tabular data generators on structural fidelity, density, privacy and utility."""
