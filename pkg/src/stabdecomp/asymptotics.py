"""Rank lower bounds from amplitude-ratio witnesses.

A single-qudit state whose largest and smallest nonzero amplitude moduli
differ by a factor of at least 2 feeds a subset-sum counting argument: the
m-copy coordinates (i_a, ..., i_a, i_b, ..., i_b) carry geometrically
increasing moduli a^k b^(m-k), which forces the stabilizer rank of the
m-th power above (m+1)/(3 log2(m+1)).  States whose nonzero amplitudes all
share one modulus admit no such witness and escape the bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RatioWitness",
    "find_ratio_witness",
    "moulton_bound",
    "exp_subsequence",
]

_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class RatioWitness:
    """Amplitude index pair whose moduli satisfy a >= 2b > 0."""

    i_a: int
    i_b: int
    a: float
    b: float

    @property
    def ratio(self) -> float:
        return self.a / self.b


def find_ratio_witness(amps) -> RatioWitness | None:
    """Largest/smallest nonzero-modulus index pair with ratio >= 2, or None."""
    v = np.asarray(amps, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError("amplitudes must form a vector")
    mod = np.abs(v)
    nz = np.flatnonzero(mod > _ZERO_TOL)
    if nz.size < 2:
        return None
    i_a = int(nz[np.argmax(mod[nz])])
    i_b = int(nz[np.argmin(mod[nz])])
    a, b = float(mod[i_a]), float(mod[i_b])
    if a < 2 * b - _ZERO_TOL:
        return None
    return RatioWitness(i_a, i_b, a, b)


def moulton_bound(m: int) -> float:
    """Counting lower bound (m+1)/(3 log2(m+1)) on the m-copy stabilizer rank."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return (m + 1) / (3 * math.log2(m + 1))


def exp_subsequence(amps, m: int) -> list[tuple[tuple[int, ...], float]]:
    """The m+1 coordinates with geometrically increasing moduli a^k b^(m-k).

    Entry k is the digit string (i_a repeated k times, then i_b repeated
    m-k times) together with its m-copy amplitude modulus; consecutive
    moduli grow by the witness ratio >= 2.  Raises ValueError when the
    state has no ratio witness, since the counting bound then says nothing.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    wit = find_ratio_witness(amps)
    if wit is None:
        raise ValueError("no amplitude-ratio witness: bound inapplicable")
    out = []
    for k in range(m + 1):
        coord = (wit.i_a,) * k + (wit.i_b,) * (m - k)
        out.append((coord, wit.a**k * wit.b ** (m - k)))
    return out
