"""Canonical stabilizer states, enumerated catalogs, and magic-state targets.

A canonical stabilizer state on n qudits (p = 2 or 3) is

    p^(-k/2) * sum_{y in F_p^k}  phase(y) * |x0 + W y>

where W is an n x k reduced column-echelon matrix over F_p, x0 is the
canonical coset representative (zero at the pivot rows of W), and phase is a
:class:`~stabdecomp.algebra.QuadraticForm` (qutrits, values in powers of
omega) or :class:`~stabdecomp.algebra.Z4Phase` (qubits, powers of i) with
zero constant term.  One tuple (k, W, x0, phase) per projective stabilizer
state; the catalog enumerates them in a fixed lexicographic order so that
integer indices are stable across runs and machines.

Basis indexing is big-endian: qudit 0 is the most significant digit, matching
``numpy.kron`` composition order.
"""

from __future__ import annotations

import hashlib
import json
from bisect import bisect_right
from fractions import Fraction
from itertools import combinations

import numpy as np

from .algebra import (
    CycloNumber,
    QuadraticForm,
    Z4Phase,
    inv_sqrt,
    omega9,
    rref_columns,
    reduce_coset_rep,
    sqrt2,
    sqrt3,
    sqrt6,
    xi,
)

# ---------------------------------------------------------------------------
# values of the form  num / N^npow,  N = sqrt(3 - sqrt 3)
# ---------------------------------------------------------------------------

# N itself generates a non-abelian extension and is *not* cyclotomic, but
# N^2 = 3 - sqrt 3 is, so any identity whose terms share the parity of npow
# can be cleared to pure cyclotomic arithmetic.

_N_SQUARED = CycloNumber.from_rational(3) - sqrt3()
_N_FLOAT = float(np.sqrt(3.0 - np.sqrt(3.0)))


class ScaledCyclo:
    """Exact number num / N^npow with num cyclotomic and N = sqrt(3 - sqrt 3)."""

    __slots__ = ("num", "npow")

    def __init__(self, num: CycloNumber, npow: int = 0) -> None:
        if npow < 0:
            raise ValueError("npow must be non-negative")
        self.num = num
        self.npow = int(npow) if not num.is_zero() else 0

    @classmethod
    def wrap(cls, value) -> "ScaledCyclo":
        if isinstance(value, ScaledCyclo):
            return value
        if isinstance(value, (int, Fraction)):
            value = CycloNumber.from_rational(value)
        return cls(value, 0)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __mul__(self, other) -> "ScaledCyclo":
        if isinstance(other, ScaledCyclo):
            return ScaledCyclo(self.num * other.num, self.npow + other.npow)
        return ScaledCyclo(self.num * other, self.npow)

    __rmul__ = __mul__

    def __neg__(self) -> "ScaledCyclo":
        return ScaledCyclo(-self.num, self.npow)

    def _cleared_pair(self, other: "ScaledCyclo") -> tuple[CycloNumber, CycloNumber, int]:
        d = max(self.npow, other.npow)
        return self.cleared(d), other.cleared(d), d

    def __add__(self, other) -> "ScaledCyclo":
        other = ScaledCyclo.wrap(other)
        a, b, d = self._cleared_pair(other)
        return ScaledCyclo(a + b, d)

    def __sub__(self, other) -> "ScaledCyclo":
        return self + (-ScaledCyclo.wrap(other))

    def __eq__(self, other) -> bool:
        if not isinstance(other, (ScaledCyclo, CycloNumber, int, Fraction)):
            return NotImplemented
        other = ScaledCyclo.wrap(other)
        a, b, _ = self._cleared_pair(other)
        return a == b

    def __hash__(self) -> int:
        raise TypeError("ScaledCyclo is unhashable; compare cleared numerators")

    def cleared(self, d: int) -> CycloNumber:
        """num * N^(d - npow), requiring the power difference to be even."""
        diff = d - self.npow
        if self.num.is_zero():
            return self.num
        if diff < 0 or diff % 2:
            raise ValueError(
                "cannot clear npow %d to denominator power %d" % (self.npow, d)
            )
        return self.num * _N_SQUARED ** (diff // 2)

    def conjugate(self) -> "ScaledCyclo":
        return ScaledCyclo(self.num.conjugate(), self.npow)

    def to_complex(self) -> complex:
        return self.num.to_complex() / _N_FLOAT**self.npow

    def __repr__(self) -> str:
        if self.npow == 0:
            return repr(self.num)
        return "(%r) / N^%d" % (self.num, self.npow)


# ---------------------------------------------------------------------------
# canonical stabilizer states
# ---------------------------------------------------------------------------


def basis_index(x: np.ndarray, p: int) -> int:
    """Big-endian index of a digit string (qudit 0 most significant)."""
    idx = 0
    for d in np.asarray(x).flat:
        idx = idx * p + int(d)
    return idx


def _all_points(p: int, k: int) -> np.ndarray:
    """All of F_p^k as a (p^k, k) array in lexicographic order (y_0 most significant)."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(p, dtype=np.int64)] * k, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


class CanonicalStabilizer:
    """One canonical stabilizer state; immutable once constructed."""

    __slots__ = ("p", "n", "k", "x0", "W", "phase")

    def __init__(self, p: int, n: int, x0, W, phase, check: bool = True) -> None:
        self.p = int(p)
        self.n = int(n)
        self.x0 = np.asarray(x0, dtype=np.int64).reshape(n) % p
        W = np.asarray(W, dtype=np.int64) % p
        self.W = W.reshape(n, W.size // n if n else 0)
        self.k = self.W.shape[1]
        self.phase = phase
        if check:
            self._validate()

    def _validate(self) -> None:
        E, r = rref_columns(self.W, self.p) if self.k else (self.W, 0)
        if r != self.k or (self.k and not np.array_equal(E, self.W)):
            raise ValueError("W must be a reduced column-echelon basis")
        if not np.array_equal(reduce_coset_rep(self.W, self.x0, self.p), self.x0):
            raise ValueError("x0 must be the canonical coset representative")
        if self.p == 3:
            if not isinstance(self.phase, QuadraticForm) or self.phase.k != self.k:
                raise ValueError("qutrit states need a QuadraticForm on k variables")
            if self.phase.c != 0:
                raise ValueError("phase constant must be zero (global phase fixed)")
        elif self.p == 2:
            if not isinstance(self.phase, Z4Phase) or self.phase.k != self.k:
                raise ValueError("qubit states need a Z4Phase on k variables")
            if self.phase.c != 0:
                raise ValueError("phase constant must be zero (global phase fixed)")
        else:
            raise ValueError("p must be 2 or 3")

    # -- support and amplitudes ------------------------------------------------

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """(basis indices, phase exponents) over the support, in y-lex order."""
        Y = _all_points(self.p, self.k)
        X = (self.x0[None, :] + Y @ self.W.T) % self.p
        weights = self.p ** np.arange(self.n - 1, -1, -1, dtype=np.int64)
        return X @ weights, self.phase.eval_batch(Y)

    def support_indices(self) -> np.ndarray:
        idx, _ = self.points()
        return np.sort(idx)

    def solve_y(self, x) -> np.ndarray | None:
        """The unique y with x = x0 + W y, or None when x is off-support."""
        v = (np.asarray(x, dtype=np.int64) - self.x0) % self.p
        y = np.array([v[int(np.nonzero(self.W[:, j])[0][0])] for j in range(self.k)],
                     dtype=np.int64)
        if np.array_equal((self.W @ y) % self.p, v):
            return y
        return None

    def amplitude(self, x) -> CycloNumber:
        """Exact amplitude at computational-basis digit string x."""
        y = self.solve_y(x)
        if y is None:
            return CycloNumber.zero()
        root = CycloNumber.root_of_unity(self.phase.phase_order)
        return inv_sqrt(self.p) ** self.k * root ** self.phase.eval(y)

    def state_vector(self) -> list[CycloNumber]:
        """Dense exact amplitude vector of length p^n."""
        dim = self.p**self.n
        vec = [CycloNumber.zero() for _ in range(dim)]
        scale = inv_sqrt(self.p) ** self.k
        order = self.phase.phase_order
        roots = [CycloNumber.root_of_unity(order, e) for e in range(order)]
        idx, exps = self.points()
        for i, e in zip(idx, exps):
            vec[int(i)] = scale * roots[int(e)]
        return vec

    def complex_vector(self) -> np.ndarray:
        vec = np.zeros(self.p**self.n, dtype=np.complex128)
        idx, exps = self.points()
        order = self.phase.phase_order
        vec[idx] = np.exp(2j * np.pi * exps / order) * self.p ** (-self.k / 2)
        return vec

    # -- composition and identity ----------------------------------------------

    def tensor(self, other: "CanonicalStabilizer") -> "CanonicalStabilizer":
        if self.p != other.p:
            raise ValueError("tensor factors must share p")
        n = self.n + other.n
        x0 = np.concatenate([self.x0, other.x0])
        W = np.zeros((n, self.k + other.k), dtype=np.int64)
        W[: self.n, : self.k] = self.W
        W[self.n :, self.k :] = other.W
        if self.p == 3:
            A = np.zeros((self.k + other.k,) * 2, dtype=np.int64)
            A[: self.k, : self.k] = self.phase.A
            A[self.k :, self.k :] = other.phase.A
            b = np.concatenate([self.phase.b, other.phase.b])
            phase = QuadraticForm(3, self.k + other.k, A, b, 0)
        else:
            B = np.zeros((self.k + other.k,) * 2, dtype=np.int64)
            B[: self.k, : self.k] = self.phase.B
            B[self.k :, self.k :] = other.phase.B
            a = np.concatenate([self.phase.a, other.phase.a])
            phase = Z4Phase(self.k + other.k, a, B, 0)
        return CanonicalStabilizer(self.p, n, x0, W, phase, check=False)

    def key(self) -> tuple:
        """Identity key of the canonical tuple."""
        return (self.p, self.n, self.k, tuple(self.x0), tuple(self.W.flat), self.phase.key())

    def support_key(self) -> tuple:
        """Projective dedupe key: sorted support with exponents rebased at the
        smallest support index.  Integer-only, no cyclotomic arithmetic."""
        idx, exps = self.points()
        order = np.argsort(idx, kind="stable")
        idx, exps = idx[order], exps[order]
        exps = (exps - exps[0]) % self.phase.phase_order
        return (self.k, tuple(idx), tuple(exps))

    def record(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "k": self.k,
            "x0": self.x0.tolist(),
            "W": self.W.tolist(),
            "phase": self.phase.to_payload(),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "CanonicalStabilizer":
        p, n, k = int(rec["p"]), int(rec["n"]), int(rec["k"])
        if p == 3:
            phase = QuadraticForm.from_payload(3, k, rec["phase"])
        else:
            phase = Z4Phase.from_payload(k, rec["phase"])
        W = np.asarray(rec["W"], dtype=np.int64).reshape(n, k)
        return cls(p, n, rec["x0"], W, phase)

    def __repr__(self) -> str:
        return "CanonicalStabilizer(p=%d, n=%d, k=%d, x0=%s)" % (
            self.p,
            self.n,
            self.k,
            self.x0.tolist(),
        )


def ket(p: int, digits) -> CanonicalStabilizer:
    """Computational basis state |digits>."""
    digits = np.asarray(digits, dtype=np.int64)
    n = len(digits)
    phase = QuadraticForm.zero(3, 0) if p == 3 else Z4Phase.zero(0)
    return CanonicalStabilizer(p, n, digits, np.zeros((n, 0), dtype=np.int64), phase)


def plus_state(p: int, n: int = 1) -> CanonicalStabilizer:
    """Uniform superposition |+>^n."""
    phase = QuadraticForm.zero(3, n) if p == 3 else Z4Phase.zero(n)
    return CanonicalStabilizer(p, n, np.zeros(n, dtype=np.int64), np.eye(n, dtype=np.int64), phase)


# ---------------------------------------------------------------------------
# the catalog: all canonical states on (p, n), lazily indexable
# ---------------------------------------------------------------------------


def _echelon_bases(p: int, n: int, k: int):
    """All n x k reduced column-echelon matrices, lexicographic in
    (pivot rows, free entries)."""
    for pivots in combinations(range(n), k):
        pivot_set = set(pivots)
        free = [(j, r) for j in range(k) for r in range(pivots[j] + 1, n) if r not in pivot_set]
        base = np.zeros((n, k), dtype=np.int64)
        for j, pj in enumerate(pivots):
            base[pj, j] = 1
        nfree = len(free)
        for a in range(p**nfree):
            W = base.copy()
            rem = a
            for t in range(nfree - 1, -1, -1):
                j, r = free[t]
                W[r, j] = rem % p
                rem //= p
            yield pivots, W


class _Block:
    """A contiguous catalog range sharing (k, W, x0); forms vary within."""

    __slots__ = ("start", "nforms", "k", "W", "x0")

    def __init__(self, start: int, nforms: int, k: int, W: np.ndarray, x0: np.ndarray) -> None:
        self.start = start
        self.nforms = nforms
        self.k = k
        self.W = W
        self.x0 = x0


class Catalog:
    """All canonical stabilizer states on (p, n) in a fixed order.

    Entries are decoded on demand from (block, form index), so the 4-qutrit
    catalog (7,439,040 states) costs no more memory than its ~2500 blocks.
    Order: k ascending, then pivot rows, then W free entries, then x0, then
    phase coefficients, each lexicographic.
    """

    def __init__(self, p: int, n: int, mode: str = "dedupe") -> None:
        if mode not in ("raw", "dedupe"):
            raise ValueError("mode must be 'raw' or 'dedupe'")
        self.p = p
        self.n = n
        self.mode = mode
        self._blocks: list[_Block] = []
        self._starts: list[int] = []
        total = 0
        for k in range(n + 1):
            nforms = self._forms_per_state(k)
            for pivots, W in _echelon_bases(p, n, k):
                free_rows = [r for r in range(n) if r not in set(pivots)]
                for ci in range(p ** len(free_rows)):
                    x0 = np.zeros(n, dtype=np.int64)
                    rem = ci
                    for t in range(len(free_rows) - 1, -1, -1):
                        x0[free_rows[t]] = rem % p
                        rem //= p
                    self._blocks.append(_Block(total, nforms, k, W, x0))
                    self._starts.append(total)
                    total += nforms
        self._total = total
        self._unique: list[int] | None = None
        self._hash: str | None = None
        if mode == "dedupe":
            self._dedupe()

    # -- sizing -----------------------------------------------------------------

    def _forms_per_state(self, k: int) -> int:
        if self.p == 3:
            return 3 ** (k * (k + 1) // 2 + k)
        return 4**k * 2 ** (k * (k - 1) // 2)

    @property
    def raw_count(self) -> int:
        return self._total

    def __len__(self) -> int:
        if self._unique is not None:
            return len(self._unique)
        return self._total

    @staticmethod
    def expected_count(p: int, n: int) -> int:
        """Number of projective stabilizer states: p^n * prod_{j<=n} (p^j + 1)."""
        out = p**n
        for j in range(1, n + 1):
            out *= p**j + 1
        return out

    # -- decoding -----------------------------------------------------------------

    def _decode_form(self, k: int, f: int):
        p = self.p
        if p == 3:
            nA = k * (k + 1) // 2
            digits = []
            rem = f
            for _ in range(nA + k):
                digits.append(rem % 3)
                rem //= 3
            digits.reverse()
            A = np.zeros((k, k), dtype=np.int64)
            t = 0
            for i in range(k):
                for j in range(i, k):
                    A[i, j] = digits[t]
                    A[j, i] = digits[t]
                    t += 1
            b = np.asarray(digits[nA:], dtype=np.int64)
            return QuadraticForm(3, k, A, b, 0)
        nB = k * (k - 1) // 2
        b_digits = []
        rem = f
        for _ in range(nB):
            b_digits.append(rem % 2)
            rem //= 2
        b_digits.reverse()
        a_digits = []
        for _ in range(k):
            a_digits.append(rem % 4)
            rem //= 4
        a_digits.reverse()
        B = np.zeros((k, k), dtype=np.int64)
        t = 0
        for i in range(k):
            for j in range(i + 1, k):
                B[i, j] = b_digits[t]
                t += 1
        return Z4Phase(k, np.asarray(a_digits, dtype=np.int64), B, 0)

    def _get_raw(self, i: int) -> CanonicalStabilizer:
        if not 0 <= i < self._total:
            raise IndexError(i)
        bi = bisect_right(self._starts, i) - 1
        blk = self._blocks[bi]
        phase = self._decode_form(blk.k, i - blk.start)
        return CanonicalStabilizer(self.p, self.n, blk.x0, blk.W, phase, check=False)

    def get(self, i: int) -> CanonicalStabilizer:
        if self._unique is not None:
            i = self._unique[i]
        return self._get_raw(i)

    def __iter__(self):
        for i in range(len(self)):
            yield self.get(i)

    # -- deduplication ---------------------------------------------------------

    def _dedupe(self) -> None:
        seen: set[tuple] = set()
        unique: list[int] = []
        for i in range(self._total):
            key = self._get_raw(i).support_key()
            if key not in seen:
                seen.add(key)
                unique.append(i)
        self._unique = unique

    # -- hashing / export --------------------------------------------------------

    def entry_line(self, i: int) -> str:
        return json.dumps(self.get(i).record(), sort_keys=True, separators=(",", ":"))

    def content_hash(self) -> str:
        """SHA-256 over the ordered entry serializations (computed lazily)."""
        if self._hash is None:
            h = hashlib.sha256()
            for i in range(len(self)):
                h.update(self.entry_line(i).encode())
                h.update(b"\n")
            self._hash = h.hexdigest()
        return self._hash

    def write_jsonl(self, path: str) -> dict:
        header = {
            "format": "stabdecomp-catalog",
            "version": 1,
            "p": self.p,
            "n": self.n,
            "mode": self.mode,
            "count": len(self),
            "sha256": self.content_hash(),
        }
        with open(path, "w") as fh:
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for i in range(len(self)):
                fh.write(self.entry_line(i) + "\n")
        return header


def build_catalog(p: int, n: int, mode: str = "dedupe") -> Catalog:
    """Enumerate all canonical stabilizer states on n qudits of dimension p."""
    return Catalog(p, n, mode)


# ---------------------------------------------------------------------------
# magic-state targets
# ---------------------------------------------------------------------------

MAGIC_NAMES = ("S", "N", "H3", "T3", "H", "T")


def _single_leg_amps(name: str) -> tuple[int, list[ScaledCyclo]]:
    one = CycloNumber.one()
    if name == "S":
        r2 = sqrt2() / 2
        return 3, [ScaledCyclo.wrap(0), ScaledCyclo(r2), ScaledCyclo(-r2)]
    if name == "N":
        r6 = sqrt6() / 6
        return 3, [ScaledCyclo(r6), ScaledCyclo(r6), ScaledCyclo(-2 * r6)]
    if name == "H3":
        c = (sqrt3() - one) / 2
        return 3, [ScaledCyclo(one, 1), ScaledCyclo(c, 1), ScaledCyclo(c, 1)]
    if name == "T3":
        r3 = (sqrt3() / 3).lift(72)
        w9 = omega9()
        return 3, [ScaledCyclo(r3), ScaledCyclo(r3 * w9), ScaledCyclo(r3 * w9 * w9)]
    if name == "H":
        r2 = sqrt2() / 2
        return 2, [ScaledCyclo(r2), ScaledCyclo(r2 * CycloNumber.zeta_pow(24, 3))]
    raise ValueError("unknown magic state %r" % (name,))


class TargetState:
    """An m-fold magic-state tensor power with exact and float amplitudes."""

    __slots__ = ("name", "p", "n", "amps")

    def __init__(self, name: str, p: int, n: int, amps: list[ScaledCyclo]) -> None:
        self.name = name
        self.p = p
        self.n = n
        self.amps = amps

    def complex_vector(self) -> np.ndarray:
        return np.array([a.to_complex() for a in self.amps], dtype=np.complex128)

    def support_mask(self) -> np.ndarray:
        return np.array([not a.is_zero() for a in self.amps], dtype=bool)

    def __repr__(self) -> str:
        return "TargetState(%s, p=%d, n=%d)" % (self.name, self.p, self.n)


def _qubit_t_power(m: int) -> TargetState:
    """|T>^m for the qubit T state, exact for even m.

    Single-copy amplitudes are cos(beta)|0> + e^{i pi/4} sin(beta)|1> with
    cos^2 = 1/2 + sqrt3/6; only even products of cos/sin are cyclotomic, so
    odd powers are refused rather than approximated.
    """
    if m % 2:
        raise ValueError("qubit T tensor powers are exact only for even m")
    half = Fraction(1, 2)
    cos2 = CycloNumber.from_rational(half) + sqrt3() / 6
    sin2 = CycloNumber.from_rational(half) - sqrt3() / 6
    cossin = sqrt6() / 6
    amps: list[ScaledCyclo] = []
    for idx in range(2**m):
        w = bin(idx).count("1")
        if w % 2 == 0:
            mag = cos2 ** ((m - w) // 2) * sin2 ** (w // 2)
        else:
            mag = cossin * cos2 ** ((m - w - 1) // 2) * sin2 ** ((w - 1) // 2)
        amps.append(ScaledCyclo(mag * CycloNumber.zeta_pow(24, 3 * w)))
    return TargetState("T", 2, m, amps)


def magic_power(name: str, m: int) -> TargetState:
    """The m-fold tensor power of a named magic state, exact amplitudes."""
    if name == "T":
        return _qubit_t_power(m)
    p, leg = _single_leg_amps(name)
    amps = [ScaledCyclo.wrap(1)]
    for _ in range(m):
        amps = [a * l for a in amps for l in leg]
    return TargetState(name, p, m, amps)


def magic_state(name: str) -> TargetState:
    return magic_power(name, 1)
