"""Gate matrices for the teleportation network.

Provides the named fixed gates used by the protocol, the channel-dependent
doubly-controlled blocks, the 8x8 collective purification unitary U0 (basis
|q5 q6 a> with q5 the most significant bit), and the long factored gate
sequence that is claimed to reproduce U0 on a 3-qubit register.

Naming of two-qubit gates: ``CNOT`` has its control on the *first* qubit of
the target pair, ``CNOT_REV`` on the second.  ``TOFFOLI_ij`` flips the
remaining qubit when local qubits i and j are both 1; ``CCU_ij`` applies an
arbitrary 2x2 block under the same controls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .statevector import PureState, require_unitary

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)

# Control on the first qubit of the pair: |10> <-> |11>.
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)
# Control on the second qubit of the pair: |01> <-> |11>.
CNOT_REV = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=np.complex128
)
CZ = np.diag([1, 1, 1, -1]).astype(np.complex128)


def ry(theta: float) -> np.ndarray:
    """[[cos t/2, -sin t/2], [sin t/2, cos t/2]]"""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz(theta: float) -> np.ndarray:
    """diag(e^{-i t/2}, e^{i t/2})"""
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)]).astype(np.complex128)


def phase_gate(delta: float) -> np.ndarray:
    """diag(1, e^{i delta})"""
    return np.diag([1.0, np.exp(1j * delta)]).astype(np.complex128)


def _swap_rows(dim: int, i: int, j: int) -> np.ndarray:
    m = np.eye(dim, dtype=np.complex128)
    m[[i, j]] = m[[j, i]]
    return m


# Toffoli gates on a local 3-qubit register, named by their control qubits.
TOFFOLI_12 = _swap_rows(8, 6, 7)  # controls 1,2 -> flip qubit 3
TOFFOLI_23 = _swap_rows(8, 3, 7)  # controls 2,3 -> flip qubit 1
TOFFOLI_13 = _swap_rows(8, 5, 7)  # controls 1,3 -> flip qubit 2

_NAMED_GATES = {
    "I": I2,
    "X": X,
    "Z": Z,
    "H": H,
    "CNOT": CNOT,
    "CNOT_REV": CNOT_REV,
    "CZ": CZ,
    "TOFFOLI_12": TOFFOLI_12,
    "TOFFOLI_23": TOFFOLI_23,
    "TOFFOLI_13": TOFFOLI_13,
}


def basic_gate(name: str) -> np.ndarray:
    """Return a fresh copy of a named fixed gate; unknown names are an error."""
    try:
        return _NAMED_GATES[name].copy()
    except KeyError:
        raise ValueError(f"unknown gate name {name!r}; known: {sorted(_NAMED_GATES)}") from None


@dataclass(frozen=True)
class ChannelParams:
    """Real coefficients (alpha, beta, gamma, kappa) of the four-particle channel
    alpha|0000> + beta|1001> + gamma|0110> + kappa|1111> on particles (3,4,5,6).

    Constraints: normalised, 0 < alpha <= min(|beta|, |gamma|, |kappa|).
    """

    alpha: float
    beta: float
    gamma: float
    kappa: float

    def __post_init__(self) -> None:
        values = self.as_tuple()
        if not all(math.isfinite(v) for v in values):
            raise ValueError("channel coefficients must be finite")
        norm_sq = sum(v * v for v in values)
        if abs(norm_sq - 1.0) > 1e-12:
            raise ValueError(f"channel coefficients are not normalised: sum of squares {norm_sq!r}")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be strictly positive")
        smallest = min(abs(self.beta), abs(self.gamma), abs(self.kappa))
        if self.alpha > smallest + 1e-12:
            raise ValueError(
                f"alpha={self.alpha!r} must not exceed min(|beta|,|gamma|,|kappa|)={smallest!r}"
            )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (float(self.alpha), float(self.beta), float(self.gamma), float(self.kappa))


def equal_channel() -> ChannelParams:
    """The maximally entangled channel with all four coefficients 1/2."""
    return ChannelParams(0.5, 0.5, 0.5, 0.5)


def channel_for_alpha(alpha: float) -> ChannelParams:
    """Complete a channel from alpha alone: beta = gamma = kappa = sqrt((1-alpha^2)/3).

    Valid for 0 < alpha <= 1/2.
    """
    rest = math.sqrt((1.0 - alpha * alpha) / 3.0)
    return ChannelParams(alpha, rest, rest, rest)


def random_channel(rng: np.random.Generator) -> ChannelParams:
    """Draw a random valid channel: normalised, alpha the smallest magnitude,
    random signs on the other three coefficients."""
    while True:
        v = np.abs(rng.standard_normal(4))
        if float(np.min(v)) < 1e-6:
            continue
        v = v / float(np.linalg.norm(v))
        i = int(np.argmin(v))
        alpha = float(v[i])
        others = np.delete(v, i) * rng.choice([-1.0, 1.0], size=3)
        return ChannelParams(alpha, float(others[0]), float(others[1]), float(others[2]))


def _ratios(p: ChannelParams) -> tuple[float, float, float, float, float, float]:
    rb = p.alpha / p.beta
    rg = p.alpha / p.gamma
    rk = p.alpha / p.kappa
    sb = math.sqrt(max(0.0, 1.0 - rb * rb))
    sg = math.sqrt(max(0.0, 1.0 - rg * rg))
    sk = math.sqrt(max(0.0, 1.0 - rk * rk))
    return rb, rg, rk, sb, sg, sk


def cc_u_blocks(p: ChannelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three 2x2 blocks applied by the doubly-controlled gates of the
    factored purification sequence, in order (beta, gamma, kappa) coupling.

    Each block is unitary with determinant +1.
    """
    rb, rg, rk, sb, sg, sk = _ratios(p)
    u_beta = np.array([[-rb, sb], [-sb, -rb]], dtype=np.complex128)
    u_gamma = np.array([[-rg, sg], [-sg, -rg]], dtype=np.complex128)
    u_kappa = np.array([[rk, -sk], [sk, rk]], dtype=np.complex128)
    return u_beta, u_gamma, u_kappa


def controlled_controlled_u(u, controls: Sequence[int], target: int) -> np.ndarray:
    """8x8 gate on local qubits (1,2,3): apply 2x2 ``u`` to ``target`` when both
    ``controls`` are 1; identity elsewhere."""
    u = require_unitary(u)
    if u.shape != (2, 2):
        raise ValueError("block must be 2x2")
    ctrl = tuple(int(c) for c in controls)
    if sorted((*ctrl, int(target))) != [1, 2, 3]:
        raise ValueError(f"controls {controls} and target {target} must cover qubits 1,2,3")
    base = sum(1 << (3 - c) for c in ctrl)
    m0 = base  # target bit 0
    m1 = base | (1 << (3 - int(target)))  # target bit 1
    out = np.eye(8, dtype=np.complex128)
    out[m0, m0] = u[0, 0]
    out[m0, m1] = u[0, 1]
    out[m1, m0] = u[1, 0]
    out[m1, m1] = u[1, 1]
    return out


def purification_unitary(p: ChannelParams) -> np.ndarray:
    """The 8x8 collective unitary U0 on basis |q5 q6 a| (q5 most significant).

    Block layout: +1 on |000>; a 2x2 block mixing |001>,|010>; a 2x2 block
    mixing |011>,|100>; -1 on |101>; a 2x2 block mixing |110>,|111>.
    """
    rb, rg, rk, sb, sg, sk = _ratios(p)
    u = np.zeros((8, 8), dtype=np.complex128)
    u[0, 0] = 1.0
    u[1, 1] = -rb
    u[1, 2] = sb
    u[2, 1] = sb
    u[2, 2] = rb
    u[3, 3] = -rg
    u[3, 4] = sg
    u[4, 3] = sg
    u[4, 4] = rg
    u[5, 5] = -1.0
    u[6, 6] = rk
    u[6, 7] = sk
    u[7, 6] = sk
    u[7, 7] = -rk
    return require_unitary(u)


@dataclass(frozen=True, eq=False)
class GateOp:
    """A named gate bound to an ordered tuple of register qubits."""

    name: str
    targets: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        targets = tuple(int(q) for q in self.targets)
        if len(set(targets)) != len(targets) or any(q < 1 for q in targets):
            raise ValueError(f"invalid targets {targets}")
        m = require_unitary(self.matrix)
        if m.shape != (2 ** len(targets), 2 ** len(targets)):
            raise ValueError(f"matrix shape {m.shape} does not match targets {targets}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "matrix", m)


GateSequence = list  # list[GateOp]; element order is temporal (first acts first)


# The factored form of U0, transcribed factor by factor in *printed* order
# (matrix-product order: the rightmost token acts first on the state).  Tokens:
#   L1_ij / L2_ij -- CNOT / CNOT_REV embedded on local qubit pair (i,j)
#   Cij           -- TOFFOLI_ij (controls i and j)
#   Xq / Zq       -- Pauli on local qubit q
#   CCU_B/G/K     -- doubly-controlled beta/gamma/kappa blocks on controls
#                    (2,3) / (1,3) / (1,2) respectively
FACTORED_U0_TOKENS: tuple[str, ...] = (
    "L2_23", "C13", "L1_23", "C12", "L2_23", "C13", "X2", "L1_12", "L2_23", "C13",
    "L2_23", "C13", "L1_23", "C12", "L2_23", "C13", "X3", "L1_23", "C23", "C13",
    "L2_23", "C13", "L1_23", "C12", "L2_23", "C13", "X2", "L1_12",
    "L2_23", "C13", "L2_23", "C13", "L1_23", "C12", "L2_23", "C13", "X3",
    "L1_23", "C13", "C23", "L1_23", "C12", "L2_23", "C13", "L1_23", "C12", "L2_23",
    "C13", "C12", "L2_12", "C23", "C12", "CCU_B", "C12", "L2_12", "C23", "C12", "C13", "L2_23", "C13",
    "L1_23", "C12", "L2_23", "C13", "X2", "L1_12", "L2_23", "C13",
    "L2_23", "C13", "L1_23", "C12", "L2_23", "C13", "X3", "L1_23", "C13", "CCU_G",
    "C13", "L2_23", "C13", "L1_23", "C12", "L2_23", "C13", "X2", "L1_12", "L2_23",
    "C13", "L2_23", "C13", "L1_23", "C12", "L2_23", "C13", "X3", "L1_23", "C13", "CCU_K",
    "Z3", "L2_23", "C13", "L1_23", "C12", "L2_23", "C13", "L1_23", "C12", "C23", "C13",
    "L2_23", "C13", "L1_23", "C12", "L2_23", "C13", "X2", "L1_12", "L2_23", "C13",
    "L2_23", "C13", "L1_23", "C12", "L2_23", "C13", "X3", "L1_23", "C13", "C23",
    "L2_23", "C13", "L1_23", "C12", "L2_23", "C13", "X2", "L1_12", "L2_23",
    "C13", "L2_23", "C13", "L1_23", "C12", "L2_23", "C13", "X3", "L1_23",
)


def _factor_for_token(token: str, p: ChannelParams) -> GateOp:
    if token == "L1_12":
        return GateOp("CNOT", (1, 2), CNOT)
    if token == "L2_12":
        return GateOp("CNOT_REV", (1, 2), CNOT_REV)
    if token == "L1_23":
        return GateOp("CNOT", (2, 3), CNOT)
    if token == "L2_23":
        return GateOp("CNOT_REV", (2, 3), CNOT_REV)
    if token in ("C12", "C23", "C13"):
        name = f"TOFFOLI_{token[1:]}"
        return GateOp(name, (1, 2, 3), _NAMED_GATES[name])
    if token in ("X2", "X3", "Z3"):
        return GateOp(token[0], (int(token[1]),), _NAMED_GATES[token[0]])
    u_beta, u_gamma, u_kappa = cc_u_blocks(p)
    if token == "CCU_B":
        return GateOp("CCU_23", (1, 2, 3), controlled_controlled_u(u_beta, (2, 3), 1))
    if token == "CCU_G":
        return GateOp("CCU_13", (1, 2, 3), controlled_controlled_u(u_gamma, (1, 3), 2))
    if token == "CCU_K":
        return GateOp("CCU_12", (1, 2, 3), controlled_controlled_u(u_kappa, (1, 2), 3))
    raise ValueError(f"unrecognised factor token {token!r}")


def factored_u0_sequence(p: ChannelParams) -> list[GateOp]:
    """The factored form of U0 as a gate sequence in temporal order.

    The transcription is verbatim; whether its composition actually equals
    ``purification_unitary(p)`` is checked numerically by the harness, which
    reports the deviation rather than assuming equality.
    """
    return [_factor_for_token(tok, p) for tok in reversed(FACTORED_U0_TOKENS)]


def embed_gate(matrix, targets: Sequence[int], width: int) -> np.ndarray:
    """Embed a k-qubit gate on ordered ``targets`` into a 2^width unitary."""
    m = np.asarray(matrix, dtype=np.complex128)
    t = tuple(int(q) for q in targets)
    k = len(t)
    if m.shape != (2**k, 2**k):
        raise ValueError(f"matrix shape {m.shape} does not match {k} targets")
    if len(set(t)) != len(t) or any(not 1 <= q <= width for q in t):
        raise ValueError(f"invalid targets {t} for width {width}")
    dim = 2**width
    rest = [q for q in range(1, width + 1) if q not in t]
    out = np.zeros((dim, dim), dtype=np.complex128)
    offsets = [sum(((g >> (k - 1 - pos)) & 1) << (width - q) for pos, q in enumerate(t)) for g in range(2**k)]
    for r in range(2 ** len(rest)):
        base = sum(((r >> (len(rest) - 1 - pos)) & 1) << (width - q) for pos, q in enumerate(rest))
        idx = [base + off for off in offsets]
        out[np.ix_(idx, idx)] = m
    return out


def compose(seq: Sequence[GateOp], register_width: int) -> np.ndarray:
    """Multiply a gate sequence into a single unitary on ``register_width`` qubits.

    Sequence order is temporal, so the product is M_last @ ... @ M_first.
    """
    u = np.eye(2**register_width, dtype=np.complex128)
    for op in seq:
        u = embed_gate(op.matrix, op.targets, register_width) @ u
    return require_unitary(u, tol=1e-10)


def bell_states() -> tuple[PureState, PureState, PureState, PureState]:
    """The Bell basis in index order 0..3: Phi+, Phi-, Psi+, Psi-."""
    r = 1.0 / math.sqrt(2.0)
    return (
        PureState(2, [r, 0, 0, r]),
        PureState(2, [r, 0, 0, -r]),
        PureState(2, [0, r, r, 0]),
        PureState(2, [0, r, -r, 0]),
    )


def matrix_to_json(m) -> list:
    """Row-major nested lists with each entry encoded as an [re, im] pair."""
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data], dtype=np.complex128)
