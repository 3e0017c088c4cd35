"""Simulator of a chaos-based stream cryptosystem built on two synchronised
Chua circuits: keystream digitisation, XOR encryption, RC recovery, and the
analysis needed to check chaos, synchronisation and message recovery."""

__version__ = "0.1.0"
