"""Qutrit Clifford machinery: gates, symplectic images, synthesis, orbits.

Weyl operators are W_(a,b) = X^a Z^b with X|j> = |j+1>, Z|j> = omega^j |j>;
conjugation by a Clifford unitary sends Weyl labels through a symplectic
matrix over F_3 (coordinates ordered a_1..a_n, b_1..b_n).  Generator images:

    H: (a, b) -> (-b, a)        S: (a, b) -> (a, a + b)
    SUM(c->t): a_t += a_c,  b_c -= b_t

``synthesize`` inverts the story: given any M in Sp(2n, 3) it emits a
deterministic H/S/SUM gate word whose unitary realizes M.  Gate words are
lists of (name, legs, power) in operator-product order (index 0 is the
leftmost matrix factor, i.e. the gate applied last).
"""

from __future__ import annotations

import numpy as np

OMEGA = np.exp(2j * np.pi / 3)

# single-qutrit gate matrices
_X = np.roll(np.eye(3, dtype=np.complex128), 1, axis=0)
_Z = np.diag(OMEGA ** np.arange(3))
_S = np.diag(OMEGA ** np.array([0, 0, 1]))
_H = OMEGA ** np.outer(np.arange(3), np.arange(3)) / np.sqrt(3)

GATE_ORDER = {"X": 3, "Z": 3, "S": 3, "H": 4, "SUM": 3}


def _embed_single(gate: np.ndarray, n: int, leg: int) -> np.ndarray:
    ops = [gate if i == leg else np.eye(3) for i in range(n)]
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def _sum_matrix(n: int, control: int, target: int) -> np.ndarray:
    dim = 3**n
    U = np.zeros((dim, dim), dtype=np.complex128)
    digits = np.array([(np.arange(dim) // 3 ** (n - 1 - i)) % 3 for i in range(n)])
    new = digits.copy()
    new[target] = (digits[target] + digits[control]) % 3
    weights = 3 ** np.arange(n - 1, -1, -1)
    U[(weights @ new), np.arange(dim)] = 1
    return U


def gate_matrix(name: str, n: int, legs: tuple[int, ...], power: int = 1) -> np.ndarray:
    """Dense unitary for one gate application on n qutrits (leg 0 most significant)."""
    power %= GATE_ORDER[name]
    if name == "SUM":
        c, t = legs
        base = _sum_matrix(n, c, t)
    else:
        single = {"X": _X, "Z": _Z, "S": _S, "H": _H}[name]
        base = _embed_single(single, n, legs[0])
    return np.linalg.matrix_power(base, power)


def word_to_matrix(word, n: int) -> np.ndarray:
    """Operator product of a gate word (index 0 = leftmost factor)."""
    U = np.eye(3**n, dtype=np.complex128)
    for name, legs, power in word:
        U = U @ gate_matrix(name, n, tuple(legs), power)
    return U


def invert_word(word) -> list:
    return [(name, legs, -power % GATE_ORDER[name]) for name, legs, power in reversed(word)]


def format_word(word) -> str:
    parts = []
    for name, legs, power in word:
        if power % GATE_ORDER[name] == 0:
            continue
        token = name + "".join(str(l + 1) for l in legs)
        if power != 1:
            token += "^%d" % power
        parts.append(token)
    return " ".join(parts) if parts else "I"


def parse_word(text: str, n: int) -> list:
    """Parse 'H1 SUM12 S2^2' into gate-word tuples; legs are 1-based digits.

    'SUM' with no digits on two qutrits means SUM12.
    """
    word = []
    for token in text.split():
        if "^" in token:
            token, pw = token.split("^")
            power = int(pw)
        else:
            power = 1
        name = "".join(ch for ch in token if ch.isalpha()).upper()
        digits = [int(ch) - 1 for ch in token if ch.isdigit()]
        if name not in GATE_ORDER:
            raise ValueError("unknown gate %r" % token)
        if name == "SUM":
            if not digits:
                if n != 2:
                    raise ValueError("SUM needs explicit legs on %d qutrits" % n)
                digits = [0, 1]
            if len(digits) != 2:
                raise ValueError("SUM takes two legs: %r" % token)
        elif len(digits) != 1:
            raise ValueError("%s takes one leg: %r" % (name, token))
        if any(not 0 <= d < n for d in digits):
            raise ValueError("leg out of range in %r" % token)
        word.append((name, tuple(digits), power))
    return word


def weyl_matrix(n: int, a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64) % 3
    b = np.asarray(b, dtype=np.int64) % 3
    out = np.eye(1, dtype=np.complex128)
    for i in range(n):
        leg = np.linalg.matrix_power(_X, int(a[i])) @ np.linalg.matrix_power(_Z, int(b[i]))
        out = np.kron(out, leg)
    return out


def weyl_decompose(V: np.ndarray, n: int, tol: float = 1e-8):
    """Recover (a, b, phase) with V = phase * W_(a,b), or None if V is not a Weyl."""
    dim = 3**n
    col0 = V[:, 0]
    nz = np.nonzero(np.abs(col0) > tol)[0]
    if len(nz) != 1:
        return None
    shift = int(nz[0])
    a = np.array([(shift // 3 ** (n - 1 - i)) % 3 for i in range(n)], dtype=np.int64)
    phase = col0[shift]
    if abs(abs(phase) - 1) > tol:
        return None
    b = np.zeros(n, dtype=np.int64)
    for i in range(n):
        s = 3 ** (n - 1 - i)  # basis string e_i
        r = np.nonzero(np.abs(V[:, s]) > tol)[0]
        if len(r) != 1:
            return None
        ratio = V[r[0], s] / phase
        b[i] = int(np.round(np.angle(ratio) / (2 * np.pi / 3))) % 3
    if not np.allclose(V, phase * weyl_matrix(n, a, b), atol=10 * tol):
        return None
    return a, b, phase


# ---------------------------------------------------------------------------
# symplectic structure
# ---------------------------------------------------------------------------


def symplectic_form(n: int) -> np.ndarray:
    J = np.zeros((2 * n, 2 * n), dtype=np.int64)
    J[:n, n:] = np.eye(n, dtype=np.int64)
    J[n:, :n] = -np.eye(n, dtype=np.int64) % 3
    return J


def is_symplectic(M: np.ndarray, n: int) -> bool:
    J = symplectic_form(n)
    return np.array_equal((M.T @ J @ M) % 3, J % 3)


def _gen_image(name: str, n: int, legs: tuple[int, ...], power: int = 1) -> np.ndarray:
    M = np.eye(2 * n, dtype=np.int64)
    G = np.eye(2 * n, dtype=np.int64)
    if name == "H":
        i = legs[0]
        G[i, i] = G[n + i, n + i] = 0
        G[i, n + i] = -1 % 3
        G[n + i, i] = 1
    elif name == "S":
        i = legs[0]
        G[n + i, i] = 1
    elif name == "SUM":
        c, t = legs
        G[t, c] = 1
        G[n + c, n + t] = -1 % 3
    elif name in ("X", "Z"):
        pass  # Weyl operators act trivially on symplectic labels
    else:
        raise ValueError(name)
    for _ in range(power % GATE_ORDER[name]):
        M = (G @ M) % 3
    return M


def word_image(word, n: int) -> np.ndarray:
    M = np.eye(2 * n, dtype=np.int64)
    for name, legs, power in word:
        M = (M @ _gen_image(name, n, tuple(legs), power)) % 3
    return M


def symplectic_image(U: np.ndarray, n: int, tol: float = 1e-8) -> np.ndarray:
    """Extract the symplectic image of a Clifford unitary by conjugating Weyls."""
    M = np.zeros((2 * n, 2 * n), dtype=np.int64)
    Udag = U.conj().T
    for col in range(2 * n):
        i = col % n
        lab_a = np.zeros(n, dtype=np.int64)
        lab_b = np.zeros(n, dtype=np.int64)
        (lab_a if col < n else lab_b)[i] = 1
        V = U @ weyl_matrix(n, lab_a, lab_b) @ Udag
        dec = weyl_decompose(V, n, tol)
        if dec is None:
            raise ValueError("matrix does not normalize the Weyl group")
        a, b, _ = dec
        M[:n, col] = a
        M[n:, col] = b
    if not is_symplectic(M, n):
        raise ValueError("extracted image is not symplectic")
    return M


def enumerate_symplectic(n: int) -> list[np.ndarray]:
    """All of Sp(2n, 3) by breadth-first closure of the generator images."""
    gens = [_gen_image("S", n, (i,)) for i in range(n)]
    gens += [_gen_image("H", n, (i,)) for i in range(n)]
    for c in range(n):
        for t in range(n):
            if c != t:
                gens.append(_gen_image("SUM", n, (c, t)))
    start = np.eye(2 * n, dtype=np.int64)
    seen = {start.tobytes(): 0}
    order = [start]
    frontier = [start]
    while frontier:
        new = []
        for M in frontier:
            for G in gens:
                cand = (G @ M) % 3
                key = cand.tobytes()
                if key not in seen:
                    seen[key] = len(order)
                    order.append(cand)
                    new.append(cand)
        frontier = new
    return order


# ---------------------------------------------------------------------------
# synthesis: symplectic matrix -> gate word
# ---------------------------------------------------------------------------


def synthesize(M: np.ndarray) -> list:
    """A gate word (H/S/SUM tokens) whose unitary has symplectic image M.

    Deterministic row reduction: for each qudit i the X-image column is
    steered to the unit vector e_{a_i} using single-qudit moves and SUM
    gathers, then the Z-image column is cleaned with the X-shear
    H_i^-1 S_i^-nu H_i = [[1, nu], [0, 1]] and SUM transfers; symplectic
    orthogonality keeps finished qudits untouched.
    """
    M = np.asarray(M, dtype=np.int64) % 3
    n = M.shape[0] // 2
    if not is_symplectic(M, n):
        raise ValueError("not a symplectic matrix")
    work = M.copy()
    applied: list[tuple] = []

    def apply(name, legs, power=1):
        nonlocal work
        power %= GATE_ORDER[name]
        if power == 0:
            return
        applied.append((name, tuple(legs), power))
        work = (_gen_image(name, n, tuple(legs), power) @ work) % 3

    for i in range(n):
        # --- phase 1: X column -> e_{a_i} ---------------------------------
        for j in range(i, n):
            alpha, beta = work[j, i], work[n + j, i]
            if beta:
                if alpha:
                    # S_j^t sends (a, b) to (a, b + t a): kill b
                    apply("S", (j,), (-beta * _inv3(alpha)) % 3)
                else:
                    apply("H", (j,))  # (0, beta) -> (-beta, 0)
        if work[i, i] == 0:
            j = next(j for j in range(i + 1, n) if work[j, i])
            apply("SUM", (j, i))  # a_i += a_j
        for j in range(i + 1, n):
            if work[j, i]:
                t = (-work[j, i] * _inv3(work[i, i])) % 3
                apply("SUM", (i, j), t)  # a_j += t a_i
        if work[i, i] == 2:
            apply("H", (i,), 2)  # parity flips the scale
        # --- phase 2: Z column -> e_{b_i} ----------------------------------
        zc = n + i
        for j in range(i + 1, n):
            gam, dlt = work[j, zc], work[n + j, zc]
            if gam and dlt:
                apply("S", (j,), (-dlt * _inv3(gam)) % 3)
            gam = work[j, zc]
            if gam:
                apply("H", (j,))  # move to pure b_j
            bj = work[n + j, zc]
            if bj:
                apply("SUM", (j, i), bj)  # b_j -= power * b_i, b_i = 1
        if work[i, zc]:
            nu = (-work[i, zc]) % 3
            # X-shear [[1, nu], [0, 1]] at qudit i
            apply("H", (i,))
            apply("S", (i,), (-nu) % 3)
            apply("H", (i,), 3)
    assert np.array_equal(work, np.eye(2 * n, dtype=np.int64) % 3)
    # work = img(g_K) ... img(g_1) M = I, so M = img(g_1^-1) ... img(g_K^-1):
    # invert each applied gate but keep the chronological order
    return [(name, legs, -power % GATE_ORDER[name]) for name, legs, power in applied]


def _inv3(a) -> int:
    a = int(a) % 3
    if a == 0:
        raise ZeroDivisionError
    return a  # 1 and 2 are self-inverse mod 3


def clifford_from_symplectic(M: np.ndarray) -> np.ndarray:
    """A concrete unitary (one representative) with symplectic image M."""
    n = M.shape[0] // 2
    return word_to_matrix(synthesize(M), n)


# ---------------------------------------------------------------------------
# projective group and orbits
# ---------------------------------------------------------------------------


def projective_key(matrix: np.ndarray, tol: float = 1e-8) -> bytes:
    """Hashable key identifying a matrix up to global phase (1e-8 grid)."""
    flat = matrix.ravel()
    idx = np.argmax(np.abs(flat) > tol)
    normalized = matrix * (abs(flat[idx]) / flat[idx])
    grid = np.round(normalized / tol)
    return np.stack([grid.real, grid.imag]).astype(np.int64).tobytes()


def generate_clifford_group(n: int = 1) -> list[tuple[np.ndarray, list]]:
    """The projective Clifford group by BFS over {X, Z, S, H(, SUM)} words.

    Returns (matrix, word) pairs; for one qutrit there are exactly 216
    elements (9 Weyls x |Sp(2,3)| = 24).
    """
    gens = []
    for name in ("X", "Z", "S", "H"):
        for i in range(n):
            gens.append(((name, (i,), 1), gate_matrix(name, n, (i,))))
    if n > 1:
        for c in range(n):
            for t in range(n):
                if c != t:
                    gens.append((("SUM", (c, t), 1), gate_matrix("SUM", n, (c, t))))
    eye = np.eye(3**n, dtype=np.complex128)
    seen = {projective_key(eye)}
    out = [(eye, [])]
    frontier = [(eye, [])]
    while frontier:
        new = []
        for mat, word in frontier:
            for token, g in gens:
                cand = mat @ g
                key = projective_key(cand)
                if key not in seen:
                    seen.add(key)
                    entry = (cand, word + [token])
                    out.append(entry)
                    new.append(entry)
        frontier = new
    return out


def orbit_closure(vec: np.ndarray, matrices) -> list[np.ndarray]:
    """Projectively distinct images of a state vector under the given unitaries."""
    seen = {}
    for U in matrices:
        img = U @ vec
        key = projective_key(img.reshape(-1, 1))
        if key not in seen:
            seen[key] = img
    return list(seen.values())
