"""Injection and two-copy conversion protocols on qutrit magic states.

A protocol entangles the data register with a magic-state ancilla via a
two-qutrit Clifford C and measures the ancilla; outcome k leaves the data in
the image of the branch operator

    E_k(C, M) = (1_data x <k|_anc) C (1_data x |M>)

with probability equal to the squared branch norm.  Weyl prefactors only
permute k and add phases (``check_reduction``), so exhaustive sweeps run
over the 51,840 symplectic classes of Sp(4, 3) with one synthesized unitary
per class.

Gate-word convention (fixed by reproducing the published branch outputs):
subscript 1 is the data leg (most significant tensor factor), subscript 2
the ancilla, and words read chronologically, leftmost gate applied first.
"""

from __future__ import annotations

import json

import numpy as np

from .clifford import (
    enumerate_symplectic,
    format_word,
    gate_matrix,
    generate_clifford_group,
    parse_word,
    synthesize,
    weyl_matrix,
)
from .stabilizer import magic_state

ATOL_UNITARY = 1e-8
ATOL_CLIFFORD = 1e-5

CLASS_NONCLIFFORD = "phase-state-nonclifford"
CLASS_CLIFFORD = "phase-state-clifford"
CLASS_NONE = "not-phase-state"


def circuit_matrix(word, n: int) -> np.ndarray:
    """Unitary of a chronological gate word (leftmost gate applied first)."""
    if isinstance(word, str):
        word = parse_word(word, n)
    U = np.eye(3**n, dtype=np.complex128)
    for name, legs, power in word:
        U = gate_matrix(name, n, tuple(legs), power) @ U
    return U


def branch_operator(C: np.ndarray, ancilla: np.ndarray, k: int) -> np.ndarray:
    """E_k(C, ancilla): 3x3 data-register operator for ancilla outcome k."""
    C = np.asarray(C)
    if C.shape != (9, 9):
        raise ValueError("C must be a two-qutrit unitary (9x9)")
    ancilla = np.asarray(ancilla, dtype=np.complex128)
    if ancilla.shape != (3,):
        raise ValueError("ancilla must be a single-qutrit vector")
    T = C.reshape(3, 3, 3, 3)  # [data_out, anc_out, data_in, anc_in]
    return np.einsum("ijm,m->ij", T[:, int(k) % 3], ancilla)


def check_reduction(
    D_data: np.ndarray,
    a: int,
    b: int,
    C: np.ndarray,
    ancilla: np.ndarray,
    tol: float = 1e-12,
    include_phase: bool = True,
) -> bool:
    """Verify E_k((D x X^a Z^b) C) = w^{b(k-a)} D E_{k-a}(C) for all k."""
    omega = np.exp(2j * np.pi / 3)
    W = np.kron(D_data, weyl_matrix(1, [a], [b]))
    for k in range(3):
        lhs = branch_operator(W @ C, ancilla, k)
        rhs = D_data @ branch_operator(C, ancilla, (k - a) % 3)
        if include_phase:
            rhs = omega ** (b * (k - a)) * rhs
        if np.abs(lhs - rhs).max() > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# predicates
# ---------------------------------------------------------------------------


def is_phase_state(v: np.ndarray, atol: float = ATOL_UNITARY):
    """(True, relative phases) when all moduli match within atol, else (False, None)."""
    v = np.asarray(v, dtype=np.complex128)
    mods = np.abs(v)
    if mods.max() <= atol:
        raise ValueError("zero vector has no phase-state classification")
    if mods.max() - mods.min() > atol:
        return False, None
    phases = np.angle(v[1:] / v[0])
    return True, tuple(float(t) for t in phases)


def is_nonclifford_diagonal(phases, atol: float = ATOL_CLIFFORD) -> bool:
    """True when some phase sits further than atol from every multiple of 2pi/3."""
    third = 2 * np.pi / 3
    for theta in phases:
        rem = theta % third
        if min(rem, third - rem) > atol:
            return True
    return False


def _classify(v: np.ndarray):
    norm2 = float(np.vdot(v, v).real)
    if np.abs(v).max() <= 10 * ATOL_UNITARY:
        return CLASS_NONE, None, norm2
    ok, phases = is_phase_state(v)
    if not ok:
        return CLASS_NONE, None, norm2
    if is_nonclifford_diagonal(phases):
        return CLASS_NONCLIFFORD, phases, norm2
    return CLASS_CLIFFORD, phases, norm2


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


class ProtocolReport:
    """One (Clifford, branch) outcome of a protocol on a magic state."""

    __slots__ = ("magic", "clifford", "k", "vector", "probability", "phases", "classification")

    def __init__(self, magic, clifford, k, vector, probability, phases, classification):
        self.magic = magic
        self.clifford = clifford  # symplectic index or gate-word string
        self.k = int(k)
        self.vector = np.asarray(vector, dtype=np.complex128)
        self.probability = float(probability)
        self.phases = phases
        self.classification = classification

    def to_json(self) -> dict:
        return {
            "magic": self.magic,
            "clifford": self.clifford,
            "k": self.k,
            "vector": [[float(z.real), float(z.imag)] for z in self.vector],
            "probability": self.probability,
            "phases": list(self.phases) if self.phases is not None else None,
            "classification": self.classification,
        }

    def __repr__(self) -> str:
        return "ProtocolReport(%s, C=%s, k=%d, p=%.6f, %s)" % (
            self.magic,
            self.clifford,
            self.k,
            self.probability,
            self.classification,
        )


class SweepResult:
    """Hits plus aggregate counts from an exhaustive protocol sweep."""

    def __init__(self, magic: str, kind: str, hits: list, counts: dict, total: int):
        self.magic = magic
        self.kind = kind
        self.hits = hits
        self.counts = counts
        self.total = total

    def nonclifford_hits(self):
        return [r for r in self.hits if r.classification == CLASS_NONCLIFFORD]

    def to_json(self) -> dict:
        return {
            "magic": self.magic,
            "kind": self.kind,
            "total": self.total,
            "counts": self.counts,
            "hits": [r.to_json() for r in self.hits],
        }


class GadgetReport:
    """A deterministic injection gadget: one non-Clifford unitary branch,
    every other branch a Clifford correction of it."""

    __slots__ = ("magic", "clifford", "k_star", "gate", "diagonal_phases", "corrections")

    def __init__(self, magic, clifford, k_star, gate, diagonal_phases, corrections):
        self.magic = magic
        self.clifford = clifford
        self.k_star = int(k_star)
        self.gate = np.asarray(gate, dtype=np.complex128)
        self.diagonal_phases = diagonal_phases  # set when gate is Pauli x diagonal
        self.corrections = corrections  # branch -> index into the 216 group

    def to_json(self) -> dict:
        return {
            "magic": self.magic,
            "clifford": self.clifford,
            "k_star": self.k_star,
            "gate": [[[float(z.real), float(z.imag)] for z in row] for row in self.gate],
            "diagonal_phases": list(self.diagonal_phases)
            if self.diagonal_phases is not None
            else None,
            "corrections": self.corrections,
        }


# ---------------------------------------------------------------------------
# the sweeps
# ---------------------------------------------------------------------------

_SWEEP_CACHE: dict = {}


def _symplectic_unitaries():
    """All Sp(4,3) elements with one synthesized unitary each (cached, ~67 MB)."""
    if "sp4" not in _SWEEP_CACHE:
        sp = enumerate_symplectic(2)
        mats: dict[tuple, np.ndarray] = {}

        def gmat(token):
            if token not in mats:
                mats[token] = gate_matrix(token[0], 2, token[1], token[2])
            return mats[token]

        U = np.empty((len(sp), 9, 9), dtype=np.complex128)
        for e, M in enumerate(sp):
            acc = np.eye(9, dtype=np.complex128)
            for token in synthesize(M):
                acc = acc @ gmat(token)
            U[e] = acc
        _SWEEP_CACHE["sp4"] = (sp, U)
    return _SWEEP_CACHE["sp4"]


def _clifford_group_stack():
    if "c216" not in _SWEEP_CACHE:
        group = generate_clifford_group(1)
        _SWEEP_CACHE["c216"] = np.stack([U for U, _ in group])
    return _SWEEP_CACHE["c216"]


def sweep_two_copy(magic: str, progress=None) -> SweepResult:
    """Classify E_k(C_sp, M)|M> over all of Sp(4,3) x F_3.

    Returns every phase-state hit; Weyl prefactors are quotiented out by the
    branch-reduction identity, so the symplectic classes are exhaustive.
    """
    m = magic_state(magic).complex_vector()
    sp, U = _symplectic_unitaries()
    T = U.reshape(-1, 3, 3, 3, 3)
    # v[e, k, i] = sum_{j,m} C[(i,k),(j,m)] M_j M_m
    V = np.einsum("eikjm,j,m->eki", T, m, m, optimize=True)
    mods = np.abs(V)
    norm2 = (mods**2).sum(axis=2)
    phase_mask = (mods.max(axis=2) - mods.min(axis=2) <= ATOL_UNITARY) & (
        mods.max(axis=2) > 10 * ATOL_UNITARY
    )
    hits = []
    counts = {CLASS_NONCLIFFORD: 0, CLASS_CLIFFORD: 0, CLASS_NONE: 0}
    third = 2 * np.pi / 3
    es, ks = np.nonzero(phase_mask)
    rel = np.angle(V[es, ks, 1:] / V[es, ks, :1])
    rem = rel % third
    noncliff = (np.minimum(rem, third - rem) > ATOL_CLIFFORD).any(axis=1)
    for idx in range(len(es)):
        e, k = int(es[idx]), int(ks[idx])
        cls = CLASS_NONCLIFFORD if noncliff[idx] else CLASS_CLIFFORD
        counts[cls] += 1
        hits.append(
            ProtocolReport(
                magic,
                e,
                k,
                V[e, k],
                norm2[e, k],
                (float(rel[idx, 0]), float(rel[idx, 1])),
                cls,
            )
        )
    counts[CLASS_NONE] = int(V.shape[0] * 3 - len(es))
    return SweepResult(magic, "two-copy", hits, counts, V.shape[0] * 3)


def _proportional_to_clifford(M: np.ndarray, group: np.ndarray, atol: float = ATOL_CLIFFORD):
    """Index of a 216-group element with M = scalar * G, or None."""
    fro = float(np.linalg.norm(M))
    if fro < 1e-12:
        return None
    # |tr(G^dag M)| = sqrt(3) * ||M||_F exactly when M is proportional to G
    overlaps = np.einsum("gxy,xy->g", group.conj(), M)
    cand = np.nonzero(np.abs(np.abs(overlaps) / (np.sqrt(3) * fro) - 1) < 1e-3)[0]
    for g in cand:
        mu = overlaps[g] / 3.0
        if np.abs(M - mu * group[g]).max() <= atol * max(1.0, abs(mu)):
            return int(g)
    return None


def _pauli_diagonal_phases(Ug: np.ndarray, atol: float = 1e-8):
    """For a monomial unitary Ug = phase * W_(a,b) D, the diagonal phases of D."""
    col_rows = []
    for j in range(3):
        nz = np.nonzero(np.abs(Ug[:, j]) > atol)[0]
        if len(nz) != 1:
            return None
        col_rows.append(int(nz[0]))
    shift = col_rows[0]
    if [(j + shift) % 3 for j in range(3)] != col_rows:
        return None
    diag = np.array([Ug[(j + shift) % 3, j] for j in range(3)])
    rel = np.angle(diag[1:] / diag[0])
    return (float(rel[0]), float(rel[1]))


def sweep_injection(magic: str) -> SweepResult:
    """Find deterministic single-copy injection gadgets across Sp(4,3).

    A gadget needs one branch k* proportional to a non-Clifford unitary
    (atol 1e-8) with every other branch equal to a 216-group Clifford
    composed with that unitary (atol 1e-5).
    """
    m = magic_state(magic).complex_vector()
    sp, U = _symplectic_unitaries()
    T = U.reshape(-1, 3, 3, 3, 3)
    # E[e, k] = branch operator, shape (E, 3, 3, 3)
    E = np.einsum("eikjm,m->ekij", T, m, optimize=True)
    G = np.einsum("ekji,ekjl->ekil", E.conj(), E, optimize=True)  # E^dag E
    tr = np.einsum("ekii->ek", G).real / 3.0
    dev = G - tr[..., None, None] * np.eye(3)
    unitary_mask = (np.abs(dev).max(axis=(2, 3)) <= ATOL_UNITARY) & (tr > 1e-12)
    group = _clifford_group_stack()
    gadgets: list[GadgetReport] = []
    counts = {"unitary-branches": int(unitary_mask.sum()), "gadgets": 0}
    for e in np.nonzero(unitary_mask.any(axis=1))[0]:
        for k_star in np.nonzero(unitary_mask[e])[0]:
            Ug = E[e, k_star] / np.sqrt(tr[e, k_star])
            if _proportional_to_clifford(Ug, group) is not None:
                continue  # injected gate must be non-Clifford
            corrections = {}
            ok = True
            Uinv = Ug.conj().T
            for k in range(3):
                if k == k_star:
                    continue
                if np.linalg.norm(E[e, k]) < 1e-10:
                    corrections[int(k)] = None  # outcome never occurs
                    continue
                g = _proportional_to_clifford(E[e, k] @ Uinv, group)
                if g is None:
                    ok = False
                    break
                corrections[int(k)] = g
            if ok:
                counts["gadgets"] += 1
                gadgets.append(
                    GadgetReport(
                        magic,
                        int(e),
                        int(k_star),
                        Ug,
                        _pauli_diagonal_phases(Ug),
                        corrections,
                    )
                )
    result = SweepResult(magic, "injection", gadgets, counts, E.shape[0] * 3)
    return result


def replay_protocol(word, magic: str, k: int) -> ProtocolReport:
    """Run a named protocol word on M x M and project ancilla outcome k."""
    parsed = parse_word(word, 2) if isinstance(word, str) else word
    C = circuit_matrix(parsed, 2)
    m = magic_state(magic).complex_vector()
    v = branch_operator(C, m, k) @ m
    cls, phases, norm2 = _classify(v)
    return ProtocolReport(magic, format_word(parsed), k, v, norm2, phases, cls)


def write_report(result: SweepResult, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(result.to_json(), fh, indent=1, sort_keys=True)
        fh.write("\n")
