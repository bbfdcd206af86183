"""Compressible-state tooling and the Bell-difference distinguisher.

A t-compressible state is a random Clifford applied to (t-qubit Haar factor)
x |0...0>; its stabilizer group has size >= 2^(n-t).  compress() rebuilds a
Clifford that maps such a state back to product form, pinning the last n-t
wires to |0>.  distinguish() runs the Bell-difference attack: l phaseless
Pauli samples, S = span(X) with its symplectic self-orthogonal part, then
the squared expectation of a uniformly random nontrivial element of S.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .dense import (
    StateVector,
    bell_difference_table,
    draw_from_table,
    expectation,
    flat_index_to_pauli,
    haar_state,
)
from .errors import InternalConsistencyError, ValidationError
from .f2 import (
    BinVec,
    rref_basis,
    span_intersect,
    swap_halves,
    symplectic_complement,
    symplectic_product,
)
from .pauli import (
    CliffordOp,
    PauliString,
    StabilizerGroup,
    clifford_conjugate,
    clifford_inverse,
    clifford_to_matrix,
    random_clifford,
)

MAX_ATTACK_QUBITS = 8
ATTACK_SCHEMA_VERSION = 1


def make_compressible(n: int, t: int, rng: np.random.Generator) -> StateVector:
    """Random Clifford applied to (Haar factor on the first t qubits) x |0>."""
    if not 0 <= t <= n <= MAX_ATTACK_QUBITS:
        raise ValidationError(f"need 0 <= t <= n <= {MAX_ATTACK_QUBITS}")
    if t == 0:
        low = np.array([1.0 + 0.0j])
    else:
        low = haar_state(t, rng).amplitudes
    full = np.zeros(1 << n, dtype=complex)
    full[: 1 << t] = low
    c = clifford_to_matrix(random_clifford(n, rng))
    return StateVector(n, c @ full)


def _solve_gf2(rows: list[int], rhs: list[int]) -> int:
    """One solution x of the bit-mask system row . x = rhs (mod 2).

    Gauss-Jordan; free variables are set to zero.
    """
    solved: list[tuple[int, int, int]] = []  # (pivot column, row, rhs bit)
    for r, b in zip(rows, (v & 1 for v in rhs)):
        for col, prow, pb in solved:
            if (r >> col) & 1:
                r ^= prow
                b ^= pb
        if r == 0:
            if b:
                raise InternalConsistencyError("inconsistent linear system")
            continue
        col = r.bit_length() - 1
        solved = [
            (c2, prow ^ r, pb ^ b) if (prow >> col) & 1 else (c2, prow, pb)
            for c2, prow, pb in solved
        ]
        solved.append((col, r, b))
    x = 0
    for col, _, b in solved:
        if b:
            x |= 1 << col
    return x


def _conjugate_partners(gens: list[BinVec], nn: int) -> list[BinVec]:
    """h_i with <g_j, h_i> = delta_ij and <h_j, h_i> = 0 for j < i."""
    partners: list[BinVec] = []
    for i in range(len(gens)):
        rows = [swap_halves(g).bits for g in gens]
        rhs = [1 if j == i else 0 for j in range(len(gens))]
        for h in partners:
            rows.append(swap_halves(h).bits)
            rhs.append(0)
        partners.append(BinVec(nn, _solve_gf2(rows, rhs)))
    return partners


def _sweep(v: BinVec, a: BinVec, b: BinVec) -> BinVec:
    """Remove the (a, b) hyperbolic component: <a,b> = 1 assumed."""
    if symplectic_product(b, v):
        v = v ^ a
    if symplectic_product(a, v):
        v = v ^ b
    return v


def _complete_symplectic_pairs(
    taken: list[tuple[BinVec, BinVec]], nn: int
) -> list[tuple[BinVec, BinVec]]:
    """Hyperbolic pairs spanning the symplectic complement of the taken pairs."""
    pool = [BinVec(nn, 1 << j) for j in range(nn)]
    for a, b in taken:
        pool = [_sweep(v, a, b) for v in pool]
    pairs = []
    while True:
        basis = rref_basis([v for v in pool if not v.is_zero()])
        if not basis:
            break
        a = basis[0]
        b = next((v for v in basis[1:] if symplectic_product(a, v)), None)
        if b is None:
            raise InternalConsistencyError("degenerate leftover symplectic form")
        pool = [_sweep(v, a, b) for v in basis if v != a and v != b]
        pairs.append((a, b))
    return pairs


def compress(psi: StateVector, group: StabilizerGroup) -> CliffordOp:
    """Clifford sending psi to (state on first t qubits) x |0>^(n-t).

    The group's signed generators become +Z on the last n-t wires.
    """
    n = psi.n
    gens = list(group.generators)
    if group.n != n:
        raise ValidationError("group register size must match the state")
    for g in gens:
        if abs(expectation(psi, g) - 1.0) > 1e-8:
            raise ValidationError("generators must stabilize psi with +1 eigenvalue")
    m = len(gens)
    nn = 2 * n
    if m == 0:
        return CliffordOp.identity(n)
    gvecs = [g.symplectic_vec for g in gens]
    partners = _conjugate_partners(gvecs, nn)
    free_pairs = _complete_symplectic_pairs(list(zip(gvecs, partners)), nn)
    if len(free_pairs) != n - m:
        raise InternalConsistencyError("symplectic completion has wrong rank")

    x_images: list[PauliString] = [None] * n  # type: ignore[list-item]
    z_images: list[PauliString] = [None] * n  # type: ignore[list-item]
    for q, (a, b) in enumerate(free_pairs):
        x_images[q] = PauliString.from_symplectic_vec(a)
        z_images[q] = PauliString.from_symplectic_vec(b)
    for i, g in enumerate(gens):
        q = n - m + i
        x_images[q] = PauliString.from_symplectic_vec(partners[i])
        z_images[q] = g
    d = CliffordOp(n, tuple(x_images), tuple(z_images))
    c = clifford_inverse(d)
    for i, g in enumerate(gens):
        q = n - m + i
        want = PauliString.from_symplectic_vec(BinVec(nn, 1 << (n + q)))
        if clifford_conjugate(c, g) != want:
            raise InternalConsistencyError("compression does not map generators to +Z")
    return c


# ---------------------------------------------------------------------------
# the distinguisher


@dataclass(frozen=True)
class CompressibleSource:
    """Emits fresh t-compressible n-qubit states; t = n gives Haar states."""

    n: int
    t: int
    states: tuple[StateVector, ...] | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.t <= self.n <= MAX_ATTACK_QUBITS:
            raise ValidationError(f"need 0 <= t <= n <= {MAX_ATTACK_QUBITS}")
        if self.states is not None:
            if not self.states:
                raise ValidationError("state list must be nonempty")
            for s in self.states:
                if s.n != self.n:
                    raise ValidationError("state list register sizes must match n")

    def draw(self, rng: np.random.Generator) -> StateVector:
        if self.states is not None:
            return self.states[int(rng.integers(len(self.states)))]
        return make_compressible(self.n, self.t, rng)


@dataclass(frozen=True)
class AttackReport:
    n: int
    t: int
    l: int
    epsilon_t: float
    thresholded: bool
    statistics: tuple[float, ...]

    def __post_init__(self) -> None:
        for s in self.statistics:
            if not 0.0 <= s <= 1.0 + 1e-12:
                raise InternalConsistencyError(f"statistic {s} outside [0, 1]")

    @property
    def trials(self) -> int:
        return len(self.statistics)

    @property
    def copies(self) -> int:
        return 4 * self.l + 2

    @property
    def mean(self) -> float:
        return float(np.mean(self.statistics))

    @property
    def stderr(self) -> float:
        if len(self.statistics) < 2:
            return 0.0
        return float(np.std(self.statistics, ddof=1) / math.sqrt(len(self.statistics)))


def _nontrivial_subspace(vecs: list[BinVec]) -> list[BinVec]:
    """Basis of S = span(X) with its symplectically self-orthogonal part."""
    basis = rref_basis([v for v in vecs if not v.is_zero()])
    if not basis:
        return []
    return span_intersect(basis, symplectic_complement(basis))


def sample_attack_statistic(
    psi: StateVector,
    l: int,
    epsilon_t: float,
    rng: np.random.Generator,
    thresholded: bool = False,
) -> float:
    """One trial: l Bell-difference samples, then tr^2 of a random S element."""
    table = bell_difference_table(psi)
    flats = draw_from_table(table, rng, l)
    vecs = [flat_index_to_pauli(int(f), psi.n).symplectic_vec for f in flats]
    s_basis = _nontrivial_subspace(vecs)
    if not s_basis:
        return 0.0
    pick = int(rng.integers(1, 1 << len(s_basis)))
    acc = BinVec.zero(2 * psi.n)
    for j, b in enumerate(s_basis):
        if (pick >> j) & 1:
            acc = acc ^ b
    p = PauliString.from_symplectic_vec(acc)
    stat = expectation(psi, p) ** 2
    if thresholded:
        return 1.0 if stat >= epsilon_t else 0.0
    return min(stat, 1.0)


def distinguish(
    source: CompressibleSource,
    l: int,
    epsilon_t: float,
    trials: int,
    rng: np.random.Generator,
    thresholded: bool = False,
) -> AttackReport:
    """Run the Bell-difference attack for `trials` fresh states."""
    if l < 1:
        raise ValidationError("need l >= 1 samples per trial")
    if trials < 1:
        raise ValidationError("need trials >= 1")
    stats = tuple(
        sample_attack_statistic(source.draw(rng), l, epsilon_t, rng, thresholded)
        for _ in range(trials)
    )
    return AttackReport(source.n, source.t, l, epsilon_t, thresholded, stats)


@dataclass(frozen=True)
class AdvantageRow:
    t: int
    l: int
    copies: int
    source_mean: float
    haar_mean: float
    advantage: float
    stderr: float


def advantage_curve(
    source_t: list[int],
    n: int,
    trials: int,
    rng: np.random.Generator,
    epsilon_t: float = 0.5,
    thresholded: bool = False,
) -> list[AdvantageRow]:
    """Advantage over Haar per t, at the proof's l = 3t + 2 (k = 12t + 10)."""
    rows = []
    for t in sorted(set(source_t)):
        if not 0 <= t <= n:
            raise ValidationError("every t must satisfy 0 <= t <= n")
        l = 3 * t + 2
        src = distinguish(CompressibleSource(n, t), l, epsilon_t, trials, rng, thresholded)
        ref = distinguish(CompressibleSource(n, n), l, epsilon_t, trials, rng, thresholded)
        rows.append(
            AdvantageRow(
                t,
                l,
                4 * l + 2,
                src.mean,
                ref.mean,
                src.mean - ref.mean,
                math.hypot(src.stderr, ref.stderr),
            )
        )
    return rows


# ---------------------------------------------------------------------------
# artifacts


def write_trials_csv(report: AttackReport, path: str) -> None:
    lines = ["trial,statistic"]
    for i, s in enumerate(report.statistics):
        lines.append(f"{i},{s!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_advantage_json(
    rows: list[AdvantageRow], path: str, *, n: int, trials: int, seed: int, epsilon_t: float
) -> None:
    doc = {
        "schema_version": ATTACK_SCHEMA_VERSION,
        "n": n,
        "trials": trials,
        "seed": seed,
        "epsilon_t": epsilon_t,
        "rows": [
            {
                "t": r.t,
                "l": r.l,
                "copies": r.copies,
                "source_mean": r.source_mean,
                "haar_mean": r.haar_mean,
                "advantage": r.advantage,
                "stderr": r.stderr,
            }
            for r in rows
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
