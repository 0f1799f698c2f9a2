"""Stabilizer-rank decompositions: records, verification, and solving.

A decomposition asserts  target = sum_i c_i |sigma_i>  with the c_i exact
:class:`~stabdecomp.stabilizer.ScaledCyclo` numbers.  Verification comes in
two independent flavors: exact (clear the N = sqrt(3 - sqrt 3) denominators
and compare cyclotomic numbers coordinate-wise) and numeric (complex-vector
residual).  Both must agree; the exact route is the certificate, the numeric
route the cross-check.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .algebra import CycloNumber, cyclo_solve
from .stabilizer import CanonicalStabilizer, ScaledCyclo, TargetState, magic_power


class Decomposition:
    """An asserted rank-r stabilizer decomposition of a magic-state power."""

    def __init__(
        self,
        target: TargetState,
        states: list[CanonicalStabilizer],
        coeffs: list[ScaledCyclo],
    ) -> None:
        if len(states) != len(coeffs):
            raise ValueError("need one coefficient per state")
        for st in states:
            if (st.p, st.n) != (target.p, target.n):
                raise ValueError("state dimensions must match the target")
        self.target = target
        self.states = list(states)
        self.coeffs = [ScaledCyclo.wrap(c) for c in coeffs]

    @property
    def rank(self) -> int:
        return len(self.states)

    # -- verification -----------------------------------------------------------

    def verify_exact(self) -> list[int]:
        """Indices where sum_i c_i sigma_i(x) != target(x); empty means exact."""
        dim = self.target.p**self.target.n
        vecs = [st.state_vector() for st in self.states]
        bad = []
        for x in range(dim):
            lhs = ScaledCyclo.wrap(0)
            for c, vec in zip(self.coeffs, vecs):
                if not vec[x].is_zero():
                    lhs = lhs + c * vec[x]
            if not lhs == self.target.amps[x]:
                bad.append(x)
        return bad

    def verify_numeric(self) -> float:
        """Euclidean residual of the superposition against the target vector."""
        acc = np.zeros(self.target.p**self.target.n, dtype=np.complex128)
        for c, st in zip(self.coeffs, self.states):
            acc += c.to_complex() * st.complex_vector()
        return float(np.linalg.norm(acc - self.target.complex_vector()))

    # -- composition -------------------------------------------------------------

    def tensor(self, other: "Decomposition") -> "Decomposition":
        """Sub-multiplicativity in action: ranks multiply under tensoring."""
        if self.target.name != other.target.name or self.target.p != other.target.p:
            raise ValueError("tensor factors must decompose powers of the same state")
        target = magic_power(self.target.name, self.target.n + other.target.n)
        states, coeffs = [], []
        for ca, sa in zip(self.coeffs, self.states):
            for cb, sb in zip(other.coeffs, other.states):
                states.append(sa.tensor(sb))
                coeffs.append(ca * cb)
        return Decomposition(target, states, coeffs)

    # -- serialization -------------------------------------------------------------

    def to_payload(self) -> dict:
        npows = {c.npow for c in self.coeffs if not c.is_zero()}
        d = max(npows, default=0)
        if len({v % 2 for v in npows}) > 1:
            raise ValueError("coefficients mix N-denominator parities")
        return {
            "format": "stabdecomp-decomposition",
            "version": 1,
            "target": self.target.name,
            "copies": self.target.n,
            "p": self.target.p,
            "rank": self.rank,
            "n_power": d,
            "terms": [
                {"coeff": c.cleared(d).to_payload(), "state": st.record()}
                for c, st in zip(self.coeffs, self.states)
            ],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "Decomposition":
        target = magic_power(payload["target"], int(payload["copies"]))
        d = int(payload.get("n_power", 0))
        states, coeffs = [], []
        for term in payload["terms"]:
            states.append(CanonicalStabilizer.from_record(term["state"]))
            coeffs.append(ScaledCyclo(CycloNumber.from_payload(term["coeff"]), d))
        return cls(target, states, coeffs)

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_payload(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "Decomposition":
        with open(path) as fh:
            return cls.from_payload(json.load(fh))

    def __repr__(self) -> str:
        return "Decomposition(%s^%d, rank=%d)" % (
            self.target.name,
            self.target.n,
            self.rank,
        )


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


def exponent_from_bound(r: int, m: int, p: int) -> float:
    """Asymptotic rank exponent log_p(r)/m implied by a rank-r bound at m copies."""
    if r < 1 or m < 1:
        raise ValueError("r and m must be positive")
    return math.log(r, p) / m


def best_fit(vectors: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares coefficients for target over the given column vectors.

    Returns (coeffs, residual); the minimum-norm solution is used when the
    columns are dependent, so the residual is always the distance from the
    target to the column span.
    """
    A = np.asarray(vectors, dtype=np.complex128)
    if A.ndim != 2:
        raise ValueError("vectors must be a (dim, r) array")
    sol, _, _, _ = np.linalg.lstsq(A, np.asarray(target, dtype=np.complex128), rcond=None)
    residual = float(np.linalg.norm(A @ sol - target))
    return sol, residual


def exact_coefficients(
    states: list[CanonicalStabilizer], target: TargetState
) -> list[ScaledCyclo] | None:
    """Exact coefficients expressing the target over the given states, or None.

    The target's 1/N^D scale (uniform over its support) is cleared first, so
    the solve happens entirely inside a cyclotomic field; a returned solution
    therefore certifies the decomposition with no floating point involved.
    """
    npows = {a.npow for a in target.amps if not a.is_zero()}
    if len(npows) > 1:
        raise ValueError("target amplitudes must share one N power")
    d = npows.pop() if npows else 0
    dim = target.p**target.n
    matrix = [[CycloNumber.zero() for _ in states] for _ in range(dim)]
    for j, st in enumerate(states):
        vec = st.state_vector()
        for x in range(dim):
            matrix[x][j] = vec[x]
    rhs = [a.num if not a.is_zero() else CycloNumber.zero() for a in target.amps]
    sol = cyclo_solve(matrix, rhs)
    if sol is None:
        return None
    return [ScaledCyclo(u, d) for u in sol]


def solve_decomposition(
    states: list[CanonicalStabilizer], target: TargetState
) -> Decomposition | None:
    """Exact decomposition over the given states when one exists."""
    coeffs = exact_coefficients(states, target)
    if coeffs is None:
        return None
    return Decomposition(target, states, coeffs)
