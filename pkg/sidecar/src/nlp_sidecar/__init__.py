"""Upstream tooling for the groundedkg engine.

Produces parse bundles (chunking, sentence segmentation, coreference
substitution, clause-level AMR/SRL parses), serves the /embed HTTP
protocol, and merges BERTScore columns into evaluation results.

Backends are pluggable: heavyweight model toolchains are used when their
packages and weights are importable, and deterministic rule-based "lite"
backends cover fully offline environments.
"""

__version__ = "0.1.0"
