"""Dense state-vector simulation for small qubit registers.

Conventions used throughout the package:

* Qubits are labelled 1..n and qubit 1 is the most significant bit, so the
  basis index of |q1 q2 ... qn> is sum(q_i * 2**(n - i)).
* Gates are plain complex ndarrays.  A k-qubit gate applied to an ordered
  target list binds the first listed target to the gate's most significant
  bit.
* Operations are pure: inputs are never mutated and randomness enters only
  through an explicitly passed numpy ``Generator``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

NORM_TOL = 1e-12
UNITARY_TOL = 1e-12
#: Outcomes with Born probability below this can never be drawn by measure().
MIN_DRAW_PROBABILITY = 1e-15


def _as_amplitudes(values, expected_len: int | None = None) -> np.ndarray:
    amps = np.array(values, dtype=np.complex128).reshape(-1)
    if expected_len is not None and amps.size != expected_len:
        raise ValueError(f"expected {expected_len} amplitudes, got {amps.size}")
    if not np.all(np.isfinite(amps)):
        raise ValueError("amplitudes must be finite")
    return amps


@dataclass(frozen=True)
class PureState:
    """A normalised state on ``n_qubits`` qubits; norm checked on construction."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        amps = _as_amplitudes(self.amplitudes, 2**self.n_qubits)
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} differs from 1 by more than {NORM_TOL}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)


@dataclass(frozen=True)
class UnnormalizedBranch:
    """Projected, deliberately unnormalised amplitudes on the full register.

    ``weight`` is the squared norm, i.e. the Born probability of the branch.
    """

    n_qubits: int
    amplitudes: np.ndarray
    weight: float = field(init=False)

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        amps = _as_amplitudes(self.amplitudes, 2**self.n_qubits)
        weight = float(np.real(np.vdot(amps, amps)))
        if weight > 1.0 + 1e-12:
            raise ValueError(f"branch weight {weight!r} exceeds 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "weight", weight)

    def normalized(self) -> PureState:
        if self.weight <= 0.0:
            raise ValueError("cannot normalise a zero-weight branch")
        return PureState(self.n_qubits, self.amplitudes / math.sqrt(self.weight))


StateLike = Union[PureState, UnnormalizedBranch]


def make_state(n_qubits: int, amplitudes=None) -> PureState:
    """Build a state from amplitudes (normalising them) or default to |0...0>."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    if amplitudes is None:
        amps = np.zeros(2**n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return PureState(n_qubits, amps)
    amps = _as_amplitudes(amplitudes, 2**n_qubits)
    norm = float(np.linalg.norm(amps))
    if norm == 0.0:
        raise ValueError("cannot normalise a zero amplitude vector")
    return PureState(n_qubits, amps / norm)


def _check_targets(n_qubits: int, targets: Sequence[int]) -> tuple[int, ...]:
    t = tuple(int(q) for q in targets)
    if not t:
        raise ValueError("target list must not be empty")
    if len(set(t)) != len(t):
        raise ValueError(f"targets must be distinct, got {t}")
    for q in t:
        if not 1 <= q <= n_qubits:
            raise ValueError(f"target {q} outside register 1..{n_qubits}")
    return t


def _check_gate(gate, n_targets: int) -> np.ndarray:
    gate = np.asarray(gate, dtype=np.complex128)
    dim = 2**n_targets
    if gate.shape != (dim, dim):
        raise ValueError(f"gate shape {gate.shape} does not match {n_targets} target(s)")
    if not np.all(np.isfinite(gate)):
        raise ValueError("gate entries must be finite")
    return gate


def _apply_raw(amps: np.ndarray, n: int, gate: np.ndarray, targets: tuple[int, ...]) -> np.ndarray:
    """Apply ``gate`` on ``targets`` of a raw amplitude vector (no validation)."""
    axes = [q - 1 for q in targets]
    rest = [a for a in range(n) if a not in axes]
    order = axes + rest
    psi = amps.reshape([2] * n).transpose(order).reshape(gate.shape[0], -1)
    psi = gate @ psi
    psi = psi.reshape([2] * n)
    return psi.transpose(np.argsort(order)).reshape(-1)


def apply_gate(state: PureState, gate, targets: Sequence[int]) -> PureState:
    """Apply a 2^k x 2^k gate to the ordered qubit list ``targets``.

    The first target is bound to the gate's most significant bit.
    """
    t = _check_targets(state.n_qubits, targets)
    g = _check_gate(gate, len(t))
    return PureState(state.n_qubits, _apply_raw(state.amplitudes, state.n_qubits, g, t))


def _marginal_probabilities(amps: np.ndarray, n: int, qubits: tuple[int, ...]) -> np.ndarray:
    axes = [q - 1 for q in qubits]
    rest = [a for a in range(n) if a not in axes]
    psi = amps.reshape([2] * n).transpose(axes + rest).reshape(2 ** len(axes), -1)
    return np.einsum("ij,ij->i", psi, psi.conj()).real


def _draw_outcome(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw in fixed basis order from a single uniform variate.

    Outcomes below MIN_DRAW_PROBABILITY are excluded from the CDF, so they can
    never be selected.
    """
    eligible = np.flatnonzero(probs >= MIN_DRAW_PROBABILITY)
    if eligible.size == 0:
        raise ValueError("no outcome has drawable probability")
    cdf = np.cumsum(probs[eligible])
    u = rng.random() * cdf[-1]
    j = int(np.searchsorted(cdf, u, side="right"))
    return int(eligible[min(j, eligible.size - 1)])


def _measure_raw(
    amps: np.ndarray, n: int, qubits: tuple[int, ...], rng: np.random.Generator
) -> tuple[tuple[int, ...], float, np.ndarray]:
    k = len(qubits)
    probs = _marginal_probabilities(amps, n, qubits)
    outcome = _draw_outcome(probs, rng)
    p = float(probs[outcome])
    bits = tuple((outcome >> (k - 1 - i)) & 1 for i in range(k))
    axes = [q - 1 for q in qubits]
    rest = [a for a in range(n) if a not in axes]
    order = axes + rest
    psi = amps.reshape([2] * n).transpose(order).reshape(2**k, -1)
    collapsed = np.zeros_like(psi)
    collapsed[outcome] = psi[outcome] / math.sqrt(p)
    collapsed = collapsed.reshape([2] * n).transpose(np.argsort(order)).reshape(-1)
    return bits, p, collapsed


def measure(
    state: PureState, qubits: Sequence[int], rng: np.random.Generator
) -> tuple[tuple[int, ...], float, PureState]:
    """Projective computational-basis measurement of ``qubits``.

    Returns ``(bits, probability, collapsed)`` where ``bits`` lists outcomes in
    the order the qubits were given, ``probability`` is the exact Born
    probability of the drawn outcome (not an estimate), and ``collapsed`` is
    renormalised with the measured qubits left in their outcome state.
    Sampling uses one uniform draw via the inverse CDF in basis order.
    """
    t = _check_targets(state.n_qubits, qubits)
    bits, p, amps = _measure_raw(state.amplitudes, state.n_qubits, t, rng)
    return bits, p, PureState(state.n_qubits, amps)


def _coerce_bits(outcome, k: int) -> tuple[int, ...]:
    if isinstance(outcome, (int, np.integer)):
        if k != 1:
            raise ValueError("scalar outcome only valid for a single qubit")
        bits = (int(outcome),)
    else:
        bits = tuple(int(b) for b in outcome)
    if len(bits) != k:
        raise ValueError(f"expected {k} outcome bits, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"outcome bits must be 0 or 1, got {bits}")
    return bits


def project(state: StateLike, qubits: Sequence[int], outcome) -> UnnormalizedBranch:
    """Project onto a fixed measurement outcome without renormalising.

    ``outcome`` is a bit sequence aligned with ``qubits`` (a bare int is
    accepted for a single qubit).  The full register is kept; the weight of
    the returned branch is the outcome's Born probability.
    """
    t = _check_targets(state.n_qubits, qubits)
    bits = _coerce_bits(outcome, len(t))
    n = state.n_qubits
    psi = state.amplitudes.reshape([2] * n)
    index: list = [slice(None)] * n
    for q, b in zip(t, bits):
        index[q - 1] = b
    kept = np.zeros_like(psi)
    kept[tuple(index)] = psi[tuple(index)]
    return UnnormalizedBranch(n, kept.reshape(-1))


def subsystem_amplitudes(state: StateLike, fixed: Mapping[int, int], keep: Sequence[int]) -> np.ndarray:
    """Amplitude block of the ``keep`` qubits with ``fixed`` qubits pinned.

    ``fixed`` and ``keep`` together must cover the register exactly; the
    result is ordered with the first kept qubit as the most significant bit.
    """
    n = state.n_qubits
    keep_t = _check_targets(n, keep)
    if sorted((*fixed, *keep_t)) != list(range(1, n + 1)):
        raise ValueError("fixed and keep qubits must partition the register")
    psi = state.amplitudes.reshape([2] * n)
    index: list = [slice(None)] * n
    for q, b in fixed.items():
        if b not in (0, 1):
            raise ValueError(f"fixed bit for qubit {q} must be 0 or 1")
        index[q - 1] = b
    block = psi[tuple(index)]
    remaining = [q for q in range(1, n + 1) if q not in fixed]
    order = [remaining.index(q) for q in keep_t]
    return np.ascontiguousarray(block.transpose(order).reshape(-1))


def fidelity_up_to_phase(s1: PureState, s2: PureState) -> float:
    """|<s1|s2>| — equality test that ignores one global phase."""
    if s1.n_qubits != s2.n_qubits:
        raise ValueError("states act on different registers")
    return float(abs(np.vdot(s1.amplitudes, s2.amplitudes)))


def require_unitary(m, tol: float = UNITARY_TOL) -> np.ndarray:
    """Return ``m`` as a complex ndarray after checking max|U†U - I| <= tol."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    dev = unitarity_deviation(m)
    if dev > tol:
        raise ValueError(f"matrix is not unitary: max|U^H U - I| = {dev:.3e} > {tol:g}")
    return m


def unitarity_deviation(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=np.complex128)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def max_deviation(a, b) -> float:
    """Plain elementwise max|a - b| for arrays of equal shape."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b)))


def phase_aligned_deviation(a, b) -> float:
    """max|a - e^{i phi} b| with the phase fixed analytically.

    The phase is read off at the largest-modulus element of ``a`` (first such
    element in row-major order), which maximises agreement without a numerical
    search.  Falls back to phi = 0 when that element of ``b`` vanishes.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    flat_a = a.reshape(-1)
    flat_b = b.reshape(-1)
    ref = int(np.argmax(np.abs(flat_a)))
    if abs(flat_b[ref]) == 0.0:
        phase = 1.0 + 0.0j
    else:
        phase = np.exp(1j * (np.angle(flat_a[ref]) - np.angle(flat_b[ref])))
    return float(np.max(np.abs(flat_a - phase * flat_b)))
