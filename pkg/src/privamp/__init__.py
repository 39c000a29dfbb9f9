"""Desk-scale non-malleable condensers and privacy-amplification protocols.

The package pairs every construction with an exact brute-force oracle:
distributions are explicit, probabilities are rational, and definitional
properties (extraction, non-malleability, condensing, MAC security) are
verified by enumeration on tiny instances before anything runs.
"""

__version__ = "0.1.0"
