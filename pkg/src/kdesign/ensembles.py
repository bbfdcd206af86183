"""Declarative unitary ensembles and their moment estimators.

An ensemble is a small immutable spec tree: Haar on n qubits, uniform or
enumerated Clifford groups, a fixed list of unitaries, or the sandwich
construction C1 (U_t x I) C2 with an inner ensemble on the first t qubits.
Samplers produce dense unitaries; moment_choi and frame_potential estimate
k-th moment fingerprints, with exact closed forms where a group can be
enumerated or a Weingarten table applies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Union

import numpy as np

from .commutant import (
    PermutationOp,
    enumerate_monomials,
    monomial_full_matrix,
    permutation_gram,
    weingarten_table,
)
from .dense import MAX_DENSE_DIM, DenseOperator, haar_unitary, query_output_state
from .errors import InternalConsistencyError, ValidationError
from .pauli import clifford_to_matrix, enumerate_cliffords, random_clifford

MAX_ENUMERATED_QUBITS = 2


@dataclass(frozen=True)
class Haar:
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError("Haar ensemble needs n >= 1")

    @property
    def n_qubits(self) -> int:
        return self.n


@dataclass(frozen=True)
class CliffordUniform:
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError("Clifford ensemble needs n >= 1")

    @property
    def n_qubits(self) -> int:
        return self.n


@dataclass(frozen=True)
class CliffordEnumerated:
    n: int

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_ENUMERATED_QUBITS:
            raise ValidationError(
                f"enumerated Clifford group supports 1 <= n <= {MAX_ENUMERATED_QUBITS}"
            )

    @property
    def n_qubits(self) -> int:
        return self.n


@dataclass(frozen=True)
class FixedList:
    unitaries: tuple[DenseOperator, ...]

    def __post_init__(self) -> None:
        if not self.unitaries:
            raise ValidationError("FixedList needs at least one unitary")
        d = self.unitaries[0].dim
        if d & (d - 1):
            raise ValidationError("FixedList dimension must be a power of two")
        for u in self.unitaries:
            if u.dim != d:
                raise ValidationError("FixedList unitaries must share one dimension")
            if not u.is_unitary(1e-12):
                raise ValidationError("FixedList entries must be unitary to 1e-12")

    @property
    def n_qubits(self) -> int:
        return self.unitaries[0].dim.bit_length() - 1


@dataclass(frozen=True)
class Homeopathy:
    """C1 (U_t x I) C2 with C1, C2 uniform Clifford and U_t from `inner`."""

    n: int
    t: int
    inner: "EnsembleSpec"

    def __post_init__(self) -> None:
        if not 1 <= self.t <= self.n:
            raise ValidationError("need 1 <= t <= n")
        if self.inner.n_qubits != self.t:
            raise ValidationError("inner ensemble must act on exactly t qubits")

    @property
    def n_qubits(self) -> int:
        return self.n


EnsembleSpec = Union[Haar, CliffordUniform, CliffordEnumerated, FixedList, Homeopathy]


@lru_cache(maxsize=4)
def _dense_clifford_group(n: int) -> tuple[DenseOperator, ...]:
    d = 1 << n
    return tuple(
        DenseOperator(d, clifford_to_matrix(c)) for c in enumerate_cliffords(n)
    )


def sample(spec: EnsembleSpec, rng: np.random.Generator) -> DenseOperator:
    """One unitary drawn from the spec's distribution, as a dense operator."""
    if isinstance(spec, Haar):
        return haar_unitary(1 << spec.n, rng)
    if isinstance(spec, CliffordUniform):
        d = 1 << spec.n
        return DenseOperator(d, clifford_to_matrix(random_clifford(spec.n, rng)))
    if isinstance(spec, CliffordEnumerated):
        group = _dense_clifford_group(spec.n)
        return group[int(rng.integers(len(group)))]
    if isinstance(spec, FixedList):
        return spec.unitaries[int(rng.integers(len(spec.unitaries)))]
    if isinstance(spec, Homeopathy):
        inner = sample(spec.inner, rng).matrix
        mid = np.kron(np.eye(1 << (spec.n - spec.t)), inner)
        c2 = clifford_to_matrix(random_clifford(spec.n, rng))
        c1 = clifford_to_matrix(random_clifford(spec.n, rng))
        return DenseOperator(1 << spec.n, c1 @ mid @ c2)
    raise ValidationError(f"unknown ensemble spec {spec!r}")


def enumerate_unitaries(spec: EnsembleSpec) -> tuple[DenseOperator, ...]:
    """All elements of a finite, uniformly weighted spec."""
    if isinstance(spec, FixedList):
        return spec.unitaries
    if isinstance(spec, CliffordEnumerated):
        return _dense_clifford_group(spec.n)
    raise ValidationError(f"{type(spec).__name__} cannot be enumerated")


# ---------------------------------------------------------------------------
# config serialization


def to_config(spec: EnsembleSpec) -> dict:
    if isinstance(spec, Haar):
        return {"variant": "haar", "n": spec.n}
    if isinstance(spec, CliffordUniform):
        return {"variant": "clifford_uniform", "n": spec.n}
    if isinstance(spec, CliffordEnumerated):
        return {"variant": "clifford_enumerated", "n": spec.n}
    if isinstance(spec, Homeopathy):
        return {
            "variant": "homeopathy",
            "n": spec.n,
            "t": spec.t,
            "inner": to_config(spec.inner),
        }
    if isinstance(spec, FixedList):
        mats = [
            [[[float(z.real), float(z.imag)] for z in row] for row in u.matrix]
            for u in spec.unitaries
        ]
        return {"variant": "fixed_list", "unitaries": mats}
    raise ValidationError(f"unknown ensemble spec {spec!r}")


def from_config(cfg: dict) -> EnsembleSpec:
    try:
        variant = cfg["variant"]
    except (TypeError, KeyError):
        raise ValidationError("ensemble config needs a 'variant' key") from None
    if variant == "haar":
        return Haar(int(cfg["n"]))
    if variant == "clifford_uniform":
        return CliffordUniform(int(cfg["n"]))
    if variant == "clifford_enumerated":
        return CliffordEnumerated(int(cfg["n"]))
    if variant == "homeopathy":
        return Homeopathy(int(cfg["n"]), int(cfg["t"]), from_config(cfg["inner"]))
    if variant == "fixed_list":
        us = []
        for rows in cfg["unitaries"]:
            m = np.array([[complex(re, im) for re, im in row] for row in rows])
            us.append(DenseOperator(m.shape[0], m))
        return FixedList(tuple(us))
    raise ValidationError(f"unknown ensemble variant {variant!r}")


# ---------------------------------------------------------------------------
# moment estimators


def frame_potential(
    spec: EnsembleSpec, k: int, samples: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte Carlo E|tr(U^dag V)|^{2k} over two independent streams.

    Returns (estimate, standard error).
    """
    if k < 1:
        raise ValidationError("need k >= 1")
    if samples < 2:
        raise ValidationError("need at least two samples for a standard error")
    vals = np.empty(samples)
    for i in range(samples):
        u = sample(spec, rng).matrix
        v = sample(spec, rng).matrix
        vals[i] = abs(np.vdot(u, v)) ** (2 * k)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))


def _choi_dims(spec: EnsembleSpec, k: int) -> tuple[int, int]:
    if k < 1:
        raise ValidationError("need k >= 1")
    d = 1 << spec.n_qubits
    big = d**k
    if big * big > MAX_DENSE_DIM:
        raise ValidationError(
            f"Choi dimension {big}^2 exceeds the dense limit {MAX_DENSE_DIM}"
        )
    return d, big


def _kth_power(m: np.ndarray, k: int) -> np.ndarray:
    return reduce(np.kron, [m] * k)


def moment_choi(
    spec: EnsembleSpec, k: int, samples: int, rng: np.random.Generator
) -> np.ndarray:
    """Sampled Choi state of the k-fold channel, J = E (U^k x I)|Phi+><Phi+|(..)^dag."""
    _, big = _choi_dims(spec, k)
    if samples < 1:
        raise ValidationError("need samples >= 1")
    scale = 1.0 / math.sqrt(big)
    acc = np.zeros((big * big, big * big), dtype=complex)
    batch = max(1, (1 << 20) // (big * big))
    done = 0
    while done < samples:
        take = min(batch, samples - done)
        vs = np.empty((take, big * big), dtype=complex)
        for s in range(take):
            u = sample(spec, rng).matrix
            vs[s] = _kth_power(u, k).reshape(-1) * scale
        acc += vs.T @ vs.conj()
        done += take
    j = acc / samples
    return _checked_choi(j)


def _checked_choi(j: np.ndarray) -> np.ndarray:
    j = 0.5 * (j + j.conj().T)
    tr = np.trace(j).real
    if abs(tr - 1.0) > 1e-9:
        raise InternalConsistencyError(f"Choi trace {tr} drifted from 1")
    return j


def exact_moment_choi(spec: EnsembleSpec, k: int) -> np.ndarray:
    """Closed-form Choi state where the ensemble admits one.

    Finite specs average exactly; Haar uses the permutation Weingarten
    expansion and uniform Clifford the monomial one:
    J = (1/D^2) sum_{A,B} W[A,B] A x conj(B) over the commutant basis.
    """
    d, big = _choi_dims(spec, k)
    if isinstance(spec, (FixedList, CliffordEnumerated)):
        els = enumerate_unitaries(spec)
        scale = 1.0 / math.sqrt(big)
        acc = np.zeros((big * big, big * big), dtype=complex)
        chunk = max(1, (1 << 20) // (big * big))
        for start in range(0, len(els), chunk):
            part = els[start : start + chunk]
            vs = np.empty((len(part), big * big), dtype=complex)
            for i, u in enumerate(part):
                vs[i] = _kth_power(u.matrix, k).reshape(-1) * scale
            acc += vs.T @ vs.conj()
        return _checked_choi(acc / len(els))
    if isinstance(spec, Haar):
        perms = [PermutationOp(p, d).matrix for p in _permutations(k)]
        lam = permutation_gram(k, d)
        winv = _stable_inverse(lam)
        j = np.zeros((big * big, big * big), dtype=complex)
        for a, ta in enumerate(perms):
            for b, tb in enumerate(perms):
                if winv[a, b] != 0.0:
                    j += winv[a, b] * np.kron(ta, tb)
        return _checked_choi(j / big)
    if isinstance(spec, CliffordUniform):
        table = weingarten_table(k, spec.n)
        if table.weingarten is None:
            raise ValidationError("no Weingarten table at this k")
        mats = [monomial_full_matrix(m, spec.n).matrix for m in enumerate_monomials(k)]
        j = np.zeros((big * big, big * big), dtype=complex)
        for a, ma in enumerate(mats):
            for b, mb in enumerate(mats):
                w = table.weingarten[a, b]
                if w != 0.0:
                    j += w * np.kron(ma, mb.conj())
        return _checked_choi(j / (big * big))
    raise ValidationError(f"no exact Choi path for {type(spec).__name__}")


def _permutations(k: int):
    return list(itertools.permutations(range(k)))


def _stable_inverse(mat: np.ndarray) -> np.ndarray:
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[-1] / sv[0] < 1e-12:
        return np.linalg.pinv(mat, rcond=1e-12)
    return np.linalg.inv(mat)


def adaptive_output_state(
    spec: EnsembleSpec,
    queries: list[np.ndarray],
    samples: int | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Average adaptive output E_U |psi_U><psi_U|, psi_U = U V_k ... U V_1 |0>.

    The queries act on the full register (sample wires low, ancilla high).
    samples=None averages exactly over an enumerable spec.
    """
    if not queries:
        raise ValidationError("need at least one query operator")
    mats = [q.matrix if isinstance(q, DenseOperator) else np.asarray(q) for q in queries]
    if samples is None:
        els = [u.matrix for u in enumerate_unitaries(spec)]
    else:
        if samples < 1:
            raise ValidationError("need samples >= 1")
        if rng is None:
            raise ValidationError("Monte Carlo averaging needs an rng")
        els = None
    dim = mats[0].shape[0] if mats else 0
    if els is not None:
        states = np.empty((len(els), dim), dtype=complex)
        for i, u in enumerate(els):
            states[i] = query_output_state(u, mats)
    else:
        states = np.empty((samples, dim), dtype=complex)
        for i in range(samples):
            states[i] = query_output_state(sample(spec, rng).matrix, mats)
    rho = states.T @ states.conj() / states.shape[0]
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-9:
        raise InternalConsistencyError(f"output state trace {tr} drifted from 1")
    return rho
