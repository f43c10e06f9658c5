"""
cvreceivers - error rates of continuously labelled receivers for BPSK coherent states.
"""

__version__ = "0.1.0"
