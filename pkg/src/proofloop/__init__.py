"""Adaptive proof refinement for interactive theorem provers.

The engine generates candidate proofs through a pluggable LLM gateway,
checks every candidate with the prover, and on failure iteratively picks
one of three repair strategies (lemma discovery, context enrichment,
regeneration) until the proof passes or the iteration budget runs out.
"""

__version__ = "0.1.0"
