"""Compilation of controlled gates into single-qubit unitaries and CNOTs.

Uses the standard constructions for universal gate sets: the ZY Euler
decomposition of a 2x2 unitary, the ABC construction for a singly-controlled
gate, and the square-root construction (five controlled factors) for a
doubly-controlled gate.

The flattened output is a list of :class:`PrimitiveGate`; the text export
writes one gate per line:

    CNOT <control> <target>
    U1Q <qubit> <m00.re> <m00.im> <m01.re> <m01.im> <m10.re> <m10.im> <m11.re> <m11.im>

with matrix entries in row-major order, formatted with ``repr`` so the file
round-trips bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gates import CNOT, GateOp, phase_gate, ry, rz
from .statevector import require_unitary

RECONSTRUCTION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PrimitiveGate:
    """A single-qubit unitary (kind ``"single"``) or a CNOT (kind ``"cnot"``).

    For a CNOT, ``targets`` is (control, target) and ``matrix`` is the 4x4
    control-on-first-qubit form; for a single-qubit gate, ``targets`` is the
    one qubit it acts on and ``matrix`` its 2x2.
    """

    kind: str
    targets: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        if self.kind not in ("single", "cnot"):
            raise ValueError(f"unknown primitive kind {self.kind!r}")
        targets = tuple(int(q) for q in self.targets)
        expected = 1 if self.kind == "single" else 2
        if len(targets) != expected or len(set(targets)) != expected:
            raise ValueError(f"bad targets {targets} for kind {self.kind!r}")
        m = require_unitary(self.matrix)
        if m.shape != (2**expected, 2**expected):
            raise ValueError(f"matrix shape {m.shape} does not match kind {self.kind!r}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "matrix", m)


def _single(matrix: np.ndarray, qubit: int) -> PrimitiveGate:
    return PrimitiveGate("single", (qubit,), matrix)


def _cnot(control: int, target: int) -> PrimitiveGate:
    return PrimitiveGate("cnot", (control, target), CNOT)


def zy_decompose(u) -> tuple[float, float, float, float]:
    """Angles (delta, beta, theta, gamma) with u = e^{i delta} Rz(beta) Ry(theta) Rz(gamma).

    One valid solution is returned (the split of beta/gamma is not unique when
    the matrix is diagonal or anti-diagonal); callers should verify by
    reconstruction, not by comparing angles.
    """
    u = require_unitary(u)
    if u.shape != (2, 2):
        raise ValueError("zy_decompose expects a 2x2 unitary")
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    delta = 0.5 * float(np.angle(det))
    v = u * np.exp(-1j * delta)
    # v is special unitary: v = [[cos(t/2) e^{-i(b+g)/2}, -sin(t/2) e^{-i(b-g)/2}],
    #                            [sin(t/2) e^{+i(b-g)/2},  cos(t/2) e^{+i(b+g)/2}]]
    theta = 2.0 * float(np.arctan2(abs(v[1, 0]), abs(v[0, 0])))
    ang00 = float(np.angle(v[0, 0]))  # -(beta+gamma)/2 when cos != 0, else irrelevant
    ang10 = float(np.angle(v[1, 0]))  # +(beta-gamma)/2 when sin != 0, else irrelevant
    beta = ang10 - ang00
    gamma = -(ang00 + ang10)
    return delta, beta, theta, gamma


def zy_reconstruct(delta: float, beta: float, theta: float, gamma: float) -> np.ndarray:
    return np.exp(1j * delta) * (rz(beta) @ ry(theta) @ rz(gamma))


def decompose_cu(u, control: int, target: int) -> list[PrimitiveGate]:
    """Controlled-u as single-qubit gates and CNOTs (ABC construction).

    Emits, in temporal order, C / CNOT / B / CNOT / A on the target plus the
    phase gate diag(1, e^{i delta}) on the control, where A B C = I and
    A X B X C = e^{-i delta} u.
    """
    if control == target:
        raise ValueError("control and target must differ")
    delta, beta, theta, gamma = zy_decompose(u)
    a = rz(beta) @ ry(theta / 2.0)
    b = ry(-theta / 2.0) @ rz(-(gamma + beta) / 2.0)
    c = rz((gamma - beta) / 2.0)
    return [
        _single(c, target),
        _cnot(control, target),
        _single(b, target),
        _cnot(control, target),
        _single(a, target),
        _single(phase_gate(delta), control),
    ]


def unitary_sqrt(u) -> np.ndarray:
    """Principal square root of a 2x2 unitary via eigen-decomposition.

    Each eigenphase (taken in (-pi, pi]) is halved into (-pi/2, pi/2], so the
    result V satisfies V @ V = u and is itself unitary.
    """
    u = require_unitary(u)
    if u.shape != (2, 2):
        raise ValueError("unitary_sqrt expects a 2x2 unitary")
    trace = u[0, 0] + u[1, 1]
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    disc = np.sqrt(trace * trace - 4.0 * det)
    lam1 = (trace + disc) / 2.0
    lam2 = (trace - disc) / 2.0
    if abs(lam1 - lam2) < 1e-12:
        # A normal matrix with a single eigenvalue is that scalar times I.
        return np.exp(0.5j * np.angle(lam1)) * np.eye(2, dtype=np.complex128)
    # Eigenvector of lam1: pick the better-conditioned of the two column forms.
    cand_a = np.array([u[0, 1], lam1 - u[0, 0]], dtype=np.complex128)
    cand_b = np.array([lam1 - u[1, 1], u[1, 0]], dtype=np.complex128)
    vec = cand_a if np.linalg.norm(cand_a) >= np.linalg.norm(cand_b) else cand_b
    v1 = vec / np.linalg.norm(vec)
    v2 = np.array([-np.conj(v1[1]), np.conj(v1[0])], dtype=np.complex128)
    s1 = np.exp(0.5j * np.angle(lam1))
    s2 = np.exp(0.5j * np.angle(lam2))
    return s1 * np.outer(v1, v1.conj()) + s2 * np.outer(v2, v2.conj())


def decompose_ccu(u, controls: Sequence[int], target: int) -> list[PrimitiveGate]:
    """Doubly-controlled u via the square-root construction.

    With V = sqrt(u) and controls (i, j), the temporal order is
    controlled-V(j->k), CNOT(i->j), controlled-V†(j->k), CNOT(i->j),
    controlled-V(i->k); each controlled factor is expanded by
    :func:`decompose_cu`, so the result contains only primitives.
    """
    i, j = (int(c) for c in controls)
    k = int(target)
    if len({i, j, k}) != 3:
        raise ValueError("controls and target must be three distinct qubits")
    v = unitary_sqrt(u)
    v_dag = v.conj().T
    out: list[PrimitiveGate] = []
    out += decompose_cu(v, j, k)
    out.append(_cnot(i, j))
    out += decompose_cu(v_dag, j, k)
    out.append(_cnot(i, j))
    out += decompose_cu(v, i, k)
    return out


def _ccu_block(op: GateOp) -> tuple[np.ndarray, tuple[int, int], int]:
    """Extract (2x2 block, register controls, register target) from a
    doubly-controlled GateOp named ``TOFFOLI_ij`` or ``CCU_ij``."""
    suffix = op.name.rsplit("_", 1)[1]
    local_controls = (int(suffix[0]), int(suffix[1]))
    (local_target,) = set((1, 2, 3)) - set(local_controls)
    base = sum(1 << (3 - c) for c in local_controls)
    m0 = base
    m1 = base | (1 << (3 - local_target))
    block = op.matrix[np.ix_((m0, m1), (m0, m1))]
    # Everything outside the block must be the identity, otherwise the factor
    # is not the doubly-controlled gate its name claims.
    probe = np.eye(8, dtype=np.complex128)
    probe[np.ix_((m0, m1), (m0, m1))] = block
    if np.max(np.abs(probe - op.matrix)) > 1e-12:
        raise ValueError(f"factor {op.name!r} is not a doubly-controlled gate")
    controls = tuple(op.targets[c - 1] for c in local_controls)
    return block, controls, op.targets[local_target - 1]


def flatten(seq: Sequence[GateOp]) -> list[PrimitiveGate]:
    """Flatten a factored gate sequence into single-qubit gates and CNOTs.

    Recognised factors: one-qubit gates (passed through), CNOT/CNOT_REV
    (re-expressed as primitives), and TOFFOLI_ij / CCU_ij (expanded with
    :func:`decompose_ccu`).  Anything else is an error.
    """
    out: list[PrimitiveGate] = []
    for op in seq:
        if len(op.targets) == 1:
            out.append(_single(op.matrix, op.targets[0]))
        elif op.name == "CNOT" and len(op.targets) == 2:
            out.append(_cnot(op.targets[0], op.targets[1]))
        elif op.name == "CNOT_REV" and len(op.targets) == 2:
            out.append(_cnot(op.targets[1], op.targets[0]))
        elif len(op.targets) == 3 and (op.name.startswith("TOFFOLI_") or op.name.startswith("CCU_")):
            block, controls, target = _ccu_block(op)
            out.extend(decompose_ccu(block, controls, target))
        else:
            raise ValueError(f"unrecognised factor {op.name!r} on {op.targets}")
    return out


def primitives_to_ops(prims: Sequence[PrimitiveGate]) -> list[GateOp]:
    """View primitives as GateOps so they can be composed or applied."""
    ops = []
    for g in prims:
        name = "CNOT" if g.kind == "cnot" else "U1Q"
        ops.append(GateOp(name, g.targets, g.matrix))
    return ops


def gate_counts(prims: Sequence[PrimitiveGate]) -> dict[str, int]:
    counts = {"single": 0, "cnot": 0}
    for g in prims:
        counts[g.kind] += 1
    return counts


def format_primitives(prims: Sequence[PrimitiveGate]) -> str:
    """Line-oriented text export of a flattened sequence (see module docstring)."""
    lines = []
    for g in prims:
        if g.kind == "cnot":
            lines.append(f"CNOT {g.targets[0]} {g.targets[1]}")
        else:
            entries = " ".join(f"{float(v.real)!r} {float(v.imag)!r}" for v in g.matrix.reshape(-1))
            lines.append(f"U1Q {g.targets[0]} {entries}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_primitives(text: str) -> list[PrimitiveGate]:
    """Inverse of :func:`format_primitives`."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "CNOT" and len(parts) == 3:
            out.append(_cnot(int(parts[1]), int(parts[2])))
        elif parts[0] == "U1Q" and len(parts) == 10:
            vals = [float(x) for x in parts[2:]]
            m = np.array(
                [[complex(vals[0], vals[1]), complex(vals[2], vals[3])],
                 [complex(vals[4], vals[5]), complex(vals[6], vals[7])]]
            )
            out.append(_single(m, int(parts[1])))
        else:
            raise ValueError(f"unparseable gate line {lineno}: {line!r}")
    return out
