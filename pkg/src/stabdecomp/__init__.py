"""Exact stabilizer decompositions of magic states.

Search, certification, and Clifford protocol sweeps for qutrit and qubit
magic states, with all certificates grounded in exact cyclotomic arithmetic.
"""

__version__ = "0.1.0"
