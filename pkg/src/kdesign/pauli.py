"""Pauli strings, Clifford tableaus, and stabilizer groups.

Conventions, used consistently everywhere downstream:

- qubit j corresponds to bit j of the x and z bitsets and to bit j of a
  computational-basis index (little-endian);
- a PauliString(n, x, z, phase) is the operator i^phase * sigma(x, z), where
  sigma(x, z) := i^|x & z| X^x Z^z is the Hermitian representative
  (so sigma(1, 1) = Y on one qubit);
- the symplectic bit vector of a Pauli is x | (z << n), matching the
  x-block-then-z-block layout of kdesign.f2;
- CliffordOps are phase-quotiented: only the +/- signs on generator images
  are tracked, never a global phase.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InternalConsistencyError, ValidationError
from .f2 import BinMat, BinVec, rref_basis, symplectic_product


@dataclass(frozen=True)
class PauliString:
    """n-qubit Pauli with an i^phase prefactor on the Hermitian representative."""

    n: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError(f"need at least one qubit, got n={self.n}")
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask or self.x < 0 or self.z < 0:
            raise ValidationError("x/z bits out of range for n qubits")
        if not 0 <= self.phase < 4:
            raise ValidationError(f"phase exponent must be in 0..3, got {self.phase}")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_label(cls, label: str, sign: int = 1) -> "PauliString":
        """Build from a string like 'XIZY'; label[j] acts on qubit j."""
        x = z = 0
        for j, ch in enumerate(label):
            if ch in "XY":
                x |= 1 << j
            if ch in "ZY":
                z |= 1 << j
            if ch not in "IXYZ":
                raise ValidationError(f"bad Pauli letter {ch!r}")
        return cls(len(label), x, z, 0 if sign == 1 else 2)

    def label(self) -> str:
        out = []
        for j in range(self.n):
            out.append("IXZY"[((self.x >> j) & 1) + 2 * ((self.z >> j) & 1)])
        return "".join(out)

    @property
    def symplectic_vec(self) -> BinVec:
        return BinVec(2 * self.n, self.x | (self.z << self.n))

    @classmethod
    def from_symplectic_vec(cls, v: BinVec, phase: int = 0) -> "PauliString":
        if v.n % 2:
            raise ValidationError("symplectic vector must have even length")
        n = v.n // 2
        mask = (1 << n) - 1
        return cls(n, v.bits & mask, v.bits >> n, phase)

    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    def sign(self) -> int:
        """+1 or -1 for Hermitian Paulis."""
        if not self.is_hermitian():
            raise ValidationError("sign undefined for non-Hermitian phase")
        return 1 if self.phase == 0 else -1

    def negate(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, (self.phase + 2) % 4)

    def weight(self) -> int:
        return (self.x | self.z).bit_count()


def pauli_mul(p: PauliString, q: PauliString) -> PauliString:
    """Exact operator product, tracking the power of i."""
    if p.n != q.n:
        raise ValidationError(f"qubit count mismatch: {p.n} vs {q.n}")
    x = p.x ^ q.x
    z = p.z ^ q.z
    w_p = (p.x & p.z).bit_count()
    w_q = (q.x & q.z).bit_count()
    w_pq = (x & z).bit_count()
    cross = (p.z & q.x).bit_count()
    phase = (p.phase + q.phase + w_p + w_q + 2 * cross - w_pq) % 4
    return PauliString(p.n, x, z, phase)


def chi(p: PauliString, q: PauliString) -> int:
    """+1 when the Paulis commute, -1 when they anticommute."""
    return 1 if symplectic_product(p.symplectic_vec, q.symplectic_vec) == 0 else -1


# ---------------------------------------------------------------------------
# dense action (used by to_matrix, expectations, stabilizer scans)


def _parity(a: np.ndarray) -> np.ndarray:
    """Elementwise popcount parity for nonnegative integer arrays."""
    a = a.copy()
    for s in (32, 16, 8, 4, 2, 1):
        a ^= a >> s
    return a & 1


def apply_pauli(p: PauliString, vec: np.ndarray) -> np.ndarray:
    """P |vec> for a dense state of length 2^n."""
    d = 1 << p.n
    if vec.shape != (d,):
        raise ValidationError(f"state length {vec.shape} does not match n={p.n}")
    coeff = 1j ** ((p.phase + (p.x & p.z).bit_count()) % 4)
    src = np.arange(d) ^ p.x
    signs = 1.0 - 2.0 * _parity(src & p.z)
    return coeff * signs * vec[src]


def pauli_matrix(p: PauliString) -> np.ndarray:
    d = 1 << p.n
    m = np.zeros((d, d), dtype=complex)
    coeff = 1j ** ((p.phase + (p.x & p.z).bit_count()) % 4)
    cols = np.arange(d)
    signs = 1.0 - 2.0 * _parity(cols & p.z)
    m[cols ^ p.x, cols] = coeff * signs
    return m


# ---------------------------------------------------------------------------
# Clifford tableaus


@dataclass(frozen=True)
class CliffordOp:
    """Phase-quotiented Clifford, stored as signed generator images.

    x_images[j] and z_images[j] are the conjugation images of X_j and Z_j;
    both are Hermitian Paulis (phase 0 or 2).  The induced map on symplectic
    bit vectors must preserve the form, which the constructor verifies.
    """

    n: int
    x_images: tuple[PauliString, ...]
    z_images: tuple[PauliString, ...]

    def __post_init__(self) -> None:
        if len(self.x_images) != self.n or len(self.z_images) != self.n:
            raise ValidationError("need exactly n images for X and Z generators")
        gens = self.x_images + self.z_images
        for g in gens:
            if g.n != self.n:
                raise ValidationError("image qubit count mismatch")
            if not g.is_hermitian():
                raise ValidationError("generator images must carry sign +/-1 only")
        # S^T J S = J: images inherit the generators' commutation table.
        for a in range(2 * self.n):
            for b in range(a + 1, 2 * self.n):
                want = 1 if b == a + self.n else 0
                got = symplectic_product(gens[a].symplectic_vec, gens[b].symplectic_vec)
                if got != want:
                    raise ValidationError("images do not satisfy the symplectic condition")

    @classmethod
    def identity(cls, n: int) -> "CliffordOp":
        xs = tuple(PauliString(n, 1 << j, 0, 0) for j in range(n))
        zs = tuple(PauliString(n, 0, 1 << j, 0) for j in range(n))
        return cls(n, xs, zs)

    @classmethod
    def from_symplectic(cls, s: BinMat, signs: BinVec) -> "CliffordOp":
        """Column j of s is the image bit vector of generator j (X_1..X_n, Z_1..Z_n)."""
        nn = s.ncols
        if nn % 2 or s.nrows != nn or signs.n != nn:
            raise ValidationError("symplectic matrix must be 2n x 2n with a 2n sign vector")
        n = nn // 2
        cols = s.transpose().rows
        imgs = [
            PauliString.from_symplectic_vec(BinVec(nn, cols[j]), 2 * signs.bit(j))
            for j in range(nn)
        ]
        return cls(n, tuple(imgs[:n]), tuple(imgs[n:]))

    @property
    def symplectic(self) -> BinMat:
        """2n x 2n matrix whose column j is the image of generator j."""
        nn = 2 * self.n
        cols = [g.symplectic_vec.bits for g in self.x_images + self.z_images]
        rows = []
        for i in range(nn):
            r = 0
            for j in range(nn):
                r |= ((cols[j] >> i) & 1) << j
            rows.append(r)
        return BinMat(nn, tuple(rows))

    @property
    def sign_vector(self) -> BinVec:
        bits = 0
        for j, g in enumerate(self.x_images + self.z_images):
            if g.phase == 2:
                bits |= 1 << j
        return BinVec(2 * self.n, bits)

    def key(self) -> tuple:
        """Hashable identity of the phase-quotiented operator."""
        return (
            self.n,
            tuple((g.x, g.z, g.phase) for g in self.x_images + self.z_images),
        )


def clifford_conjugate(c: CliffordOp, p: PauliString) -> PauliString:
    """C P C^dagger via the tableau, with exact sign tracking."""
    if p.n != c.n:
        raise ValidationError(f"qubit count mismatch: {p.n} vs {c.n}")
    w = (p.x & p.z).bit_count()
    acc = PauliString(c.n, 0, 0, (p.phase + w) % 4)
    for j in range(c.n):
        if (p.x >> j) & 1:
            acc = pauli_mul(acc, c.x_images[j])
    for j in range(c.n):
        if (p.z >> j) & 1:
            acc = pauli_mul(acc, c.z_images[j])
    if p.is_hermitian() and not acc.is_hermitian():
        raise InternalConsistencyError("conjugation broke Hermiticity")
    return acc


def clifford_compose(c2: CliffordOp, c1: CliffordOp) -> CliffordOp:
    """The Clifford acting as first c1, then c2 (operator product C2 C1)."""
    if c1.n != c2.n:
        raise ValidationError("qubit count mismatch")
    xs = tuple(clifford_conjugate(c2, g) for g in c1.x_images)
    zs = tuple(clifford_conjugate(c2, g) for g in c1.z_images)
    return CliffordOp(c1.n, xs, zs)


def clifford_inverse(c: CliffordOp) -> CliffordOp:
    """Tableau inverse: symplectic part J S^T J, signs fixed by round-tripping."""
    n = c.n
    nn = 2 * n
    s = c.symplectic

    # J S^T J in the x|z block layout swaps the n-row/column halves.
    st = s.transpose()

    def swapped(i: int) -> int:
        return (i + n) % nn

    rows = []
    for i in range(nn):
        src = st.rows[swapped(i)]
        r = 0
        for j in range(nn):
            r |= ((src >> swapped(j)) & 1) << j
        rows.append(r)
    s_inv = BinMat(nn, tuple(rows))

    inv0 = CliffordOp.from_symplectic(s_inv, BinVec.zero(nn))
    # Adjust each image sign so that C(C^-1 g C) C^dagger == g exactly.
    gens = [PauliString(n, 1 << j, 0, 0) for j in range(n)] + [
        PauliString(n, 0, 1 << j, 0) for j in range(n)
    ]
    imgs = list(inv0.x_images + inv0.z_images)
    for j, g in enumerate(gens):
        back = clifford_conjugate(c, imgs[j])
        if (back.x, back.z) != (g.x, g.z):
            raise InternalConsistencyError("symplectic inverse failed to round-trip")
        if back.phase != g.phase:
            imgs[j] = imgs[j].negate()
    return CliffordOp(n, tuple(imgs[:n]), tuple(imgs[n:]))


# ---------------------------------------------------------------------------
# uniform sampling (transvection construction, directsum layout internally)


def _sp_ds(u: int, v: int, nn: int) -> int:
    """Symplectic product in the (2i, 2i+1)-paired layout."""
    even = sum(1 << i for i in range(0, nn, 2))
    t = (u & (v >> 1) & even) ^ ((u >> 1) & v & even)
    return t.bit_count() & 1


def _transvect(h: int, v: int, nn: int) -> int:
    """Z_h(v) = v + <v,h> h."""
    return v ^ h if _sp_ds(v, h, nn) else v


def _anticommuting_pair_value(a: int) -> int:
    """A 2-bit local value with odd symplectic pairing against local value a."""
    if a == 0:
        raise InternalConsistencyError("no local value anticommutes with identity")
    return 3 if a in (1, 2) else 1


def _find_transvections(x: int, y: int, nn: int) -> tuple[int, int]:
    """h0, h1 with y = Z_h1 Z_h0 x, for nonzero x and y.

    Uses that two distinct nonzero local pair values always anticommute, so a
    single-pair bridge works whenever x and y share support; otherwise bridge
    through one supported pair of each.
    """
    if x == y:
        return 0, 0
    if _sp_ds(x, y, nn) == 1:
        return x ^ y, 0

    def pair(v: int, i: int) -> int:
        return (v >> (2 * i)) & 3

    for i in range(nn // 2):
        a, b = pair(x, i), pair(y, i)
        if a and b:
            zz = (a ^ b) or _anticommuting_pair_value(a)
            z = zz << (2 * i)
            return x ^ z, y ^ z
    z = 0
    for i in range(nn // 2):
        a, b = pair(x, i), pair(y, i)
        if a and not b:
            z |= _anticommuting_pair_value(a) << (2 * i)
            break
    for i in range(nn // 2):
        a, b = pair(x, i), pair(y, i)
        if b and not a:
            z |= _anticommuting_pair_value(b) << (2 * i)
            break
    return x ^ z, y ^ z


def _random_symplectic_ds(n: int, rng: np.random.Generator) -> list[int]:
    """Uniformly random element of Sp(2n, F_2), rows in directsum layout.

    Row-by-row: pick the image of the first basis vector uniformly among
    nonzero vectors, complete it to a symplectic pair uniformly among the
    2^(2n-1) partners, then recurse on the complement via transvections.
    """
    nn = 2 * n
    f1 = int(rng.integers(1, 1 << nn))
    t0, t1 = _find_transvections(1, f1, nn)
    bits = [int(b) for b in rng.integers(0, 2, size=nn - 1)]
    eprime = 1
    for j in range(2, nn):
        eprime |= bits[j - 1] << j
    h0 = _transvect(t1, _transvect(t0, eprime, nn), nn)
    if bits[0]:
        f1 = 0
    if n == 1:
        g = [1, 2]
    else:
        sub = _random_symplectic_ds(n - 1, rng)
        g = [1, 2] + [r << 2 for r in sub]
    out = []
    for r in g:
        r = _transvect(t0, r, nn)
        r = _transvect(t1, r, nn)
        r = _transvect(h0, r, nn)
        r = _transvect(f1, r, nn)
        out.append(r)
    return out


def _ds_rows_to_standard(rows: list[int]) -> BinMat:
    """Reindex a directsum-layout matrix into the x-block-then-z-block layout."""
    nn = len(rows)
    n = nn // 2

    def std(i: int) -> int:
        # directsum position 2q -> x_q (= q), 2q+1 -> z_q (= n+q)
        return (i // 2) if i % 2 == 0 else n + i // 2

    out = [0] * nn
    for i, r in enumerate(rows):
        for j in range(nn):
            if (r >> j) & 1:
                out[std(i)] |= 1 << std(j)
    return BinMat(nn, tuple(out))


def random_clifford(n: int, rng: np.random.Generator) -> CliffordOp:
    """Exactly uniform Clifford: uniform symplectic part, uniform signs."""
    if n < 1:
        raise ValidationError(f"need n >= 1, got {n}")
    s = _ds_rows_to_standard(_random_symplectic_ds(n, rng))
    signs = BinVec(2 * n, int(rng.integers(0, 1 << (2 * n))))
    return CliffordOp.from_symplectic(s, signs)


# ---------------------------------------------------------------------------
# exhaustive enumeration (small n; independent of the sampler)


@lru_cache(maxsize=None)
def enumerate_symplectics(n: int) -> tuple[BinMat, ...]:
    """All of Sp(2n, F_2) by brute scan; n <= 2 only."""
    if n > 2:
        raise ValidationError("exhaustive symplectic enumeration is limited to n <= 2")
    nn = 2 * n
    j_rows = [((1 << ((i + n) % nn))) for i in range(nn)]
    out = []
    for bits in range(1 << (nn * nn)):
        cols = [(bits >> (nn * j)) & ((1 << nn) - 1) for j in range(nn)]
        ok = True
        for a in range(nn):
            for b in range(a, nn):
                want = 1 if b == a + n else 0
                va = BinVec(nn, cols[a])
                vb = BinVec(nn, cols[b])
                if symplectic_product(va, vb) != want:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            rows = [0] * nn
            for i in range(nn):
                for j in range(nn):
                    rows[i] |= ((cols[j] >> i) & 1) << j
            out.append(BinMat(nn, tuple(rows)))
    return tuple(out)


def enumerate_cliffords(n: int) -> list[CliffordOp]:
    """The full phase-quotiented Clifford group; n <= 2 (24 and 11520 elements)."""
    out = []
    for s in enumerate_symplectics(n):
        for sgn in range(1 << (2 * n)):
            out.append(CliffordOp.from_symplectic(s, BinVec(2 * n, sgn)))
    return out


# ---------------------------------------------------------------------------
# dense conversion


MAX_DENSE_QUBITS = 12


def clifford_to_matrix(c: CliffordOp) -> np.ndarray:
    """Dense 2^n x 2^n unitary realizing the tableau, deterministic global phase."""
    if c.n > MAX_DENSE_QUBITS:
        raise ValidationError(
            f"dense conversion limited to n <= {MAX_DENSE_QUBITS}, got n={c.n}"
        )
    d = 1 << c.n
    psi = None
    for start in range(d):
        cand = np.zeros(d, dtype=complex)
        cand[start] = 1.0
        for q in c.z_images:
            cand = 0.5 * (cand + apply_pauli(q, cand))
        nrm = np.linalg.norm(cand)
        if nrm > 1e-9:
            psi = cand / nrm
            break
    if psi is None:
        raise InternalConsistencyError("stabilizer projector annihilated every basis state")
    # pin the global phase: largest amplitude made real positive
    k = int(np.argmax(np.abs(psi)))
    psi = psi * (abs(psi[k]) / psi[k])

    u = np.zeros((d, d), dtype=complex)
    u[:, 0] = psi
    for x in range(1, d):
        p = PauliString.identity(c.n)
        for j in range(c.n):
            if (x >> j) & 1:
                p = pauli_mul(p, c.x_images[j])
        u[:, x] = apply_pauli(p, psi)
    return u


# ---------------------------------------------------------------------------
# stabilizer groups


@dataclass(frozen=True)
class StabilizerGroup:
    """Abelian Pauli subgroup of order 2^(n-t) stabilizing some state.

    Generators are signed so each has expectation +1 on that state; they are
    the canonical RREF basis of the group's symplectic span.
    """

    n: int
    t: int
    generators: tuple[PauliString, ...]

    def __post_init__(self) -> None:
        if len(self.generators) != self.n - self.t:
            raise ValidationError(
                f"expected {self.n - self.t} generators, got {len(self.generators)}"
            )
        for a, b in itertools.combinations(self.generators, 2):
            if chi(a, b) != 1:
                raise ValidationError("stabilizer generators must commute")

    @property
    def order(self) -> int:
        return 1 << (self.n - self.t)

    def elements(self):
        """All 2^(n-t) signed elements, identity included."""
        m = len(self.generators)
        for mask in range(1 << m):
            acc = PauliString.identity(self.n)
            for j in range(m):
                if (mask >> j) & 1:
                    acc = pauli_mul(acc, self.generators[j])
            yield acc

    def bit_vectors(self) -> list[BinVec]:
        return [g.symplectic_vec for g in self.generators]


def _fwht(v: np.ndarray) -> np.ndarray:
    """Walsh-Hadamard transform, unnormalized, length a power of two."""
    v = v.copy()
    h = 1
    while h < len(v):
        v = v.reshape(-1, 2, h)
        a = v[:, 0, :].copy()
        v[:, 0, :] = a + v[:, 1, :]
        v[:, 1, :] = a - v[:, 1, :]
        v = v.reshape(-1)
        h *= 2
    return v


def pauli_expectations_all(amps: np.ndarray, n: int) -> np.ndarray:
    """<psi| sigma(a,b) |psi> for every (a,b), as a (2^n, 2^n) real array.

    Entry [a, b] is the expectation of sigma(a, b); cost O(4^n log 2^n).
    """
    d = 1 << n
    if amps.shape != (d,):
        raise ValidationError("amplitude count does not match n")
    out = np.empty((d, d), dtype=float)
    idx = np.arange(d)
    popcount = np.array([v.bit_count() for v in range(d)])
    for a in range(d):
        v = np.conj(amps[idx ^ a]) * amps
        f = _fwht(v)
        vals = (1j ** (popcount[a & idx] % 4)) * f
        if np.max(np.abs(vals.imag)) > 1e-7:
            raise InternalConsistencyError("Pauli expectation came out non-real")
        out[a, :] = vals.real
    return out


def stabilizer_group_of(psi, t: int) -> StabilizerGroup:
    """Scan all 4^n Paulis for expectation +/-1 (tolerance 1e-9) on psi.

    psi may be a dense amplitude array or anything with an .amplitudes array.
    Raises ValidationError when the matches do not form a closed group of
    order 2^(n-t).
    """
    amps = np.asarray(getattr(psi, "amplitudes", psi), dtype=complex)
    n = int(np.log2(len(amps)))
    if 1 << n != len(amps):
        raise ValidationError("state length is not a power of two")
    if n > 8:
        raise ValidationError("stabilizer scan limited to n <= 8")
    if not 0 <= t <= n:
        raise ValidationError(f"need 0 <= t <= n, got t={t}")

    exps = pauli_expectations_all(amps, n)
    members: list[tuple[int, int, int]] = []
    for a in range(1 << n):
        for b in range(1 << n):
            e = exps[a, b]
            if abs(abs(e) - 1.0) <= 1e-9:
                members.append((a, b, 0 if e > 0 else 2))

    expected = 1 << (n - t)
    if len(members) != expected:
        raise ValidationError(
            f"found {len(members)} stabilizing Paulis, expected {expected} for t={t}"
        )
    vec_set = {x | (z << n) for x, z, _ in members}
    basis = rref_basis([BinVec(2 * n, v) for v in sorted(vec_set) if v], 2 * n)
    # a subset of its own span is the span (hence a group) iff the sizes agree
    if (1 << len(basis)) != len(vec_set):
        raise ValidationError("stabilizing Paulis are not closed under products")
    gens = []
    for v in basis:
        p = PauliString.from_symplectic_vec(v)
        e = exps[p.x, p.z]
        gens.append(p if e > 0 else p.negate())
    return StabilizerGroup(n, t, tuple(gens))
