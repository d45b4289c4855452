import math

import numpy as np
import pytest
from hypothesis import given

from conftest import channels
from teleportnet.gates import (
    CNOT,
    CNOT_REV,
    CZ,
    FACTORED_U0_TOKENS,
    ChannelParams,
    GateOp,
    H,
    I2,
    TOFFOLI_12,
    TOFFOLI_13,
    TOFFOLI_23,
    X,
    Z,
    basic_gate,
    bell_states,
    cc_u_blocks,
    channel_for_alpha,
    compose,
    controlled_controlled_u,
    embed_gate,
    equal_channel,
    factored_u0_sequence,
    matrix_from_json,
    matrix_to_json,
    phase_gate,
    purification_unitary,
    random_channel,
    ry,
    rz,
)
from teleportnet.statevector import (
    apply_gate,
    make_state,
    max_deviation,
    unitarity_deviation,
)


def test_fixed_gate_identities():
    assert max_deviation(H @ H, I2) < 1e-15
    assert max_deviation(X @ X, I2) == 0.0
    assert max_deviation(CNOT @ CNOT, np.eye(4)) == 0.0
    assert np.allclose(CZ, np.diag([1, 1, 1, -1]))


def test_cnot_variants_differ_by_control_side():
    # CNOT: |10> -> |11>; CNOT_REV: |01> -> |11>
    assert CNOT[3, 2] == 1.0 and CNOT[1, 1] == 1.0
    assert CNOT_REV[3, 1] == 1.0 and CNOT_REV[2, 2] == 1.0


def test_toffoli_swap_positions():
    for gate, (i, j) in [(TOFFOLI_12, (6, 7)), (TOFFOLI_23, (3, 7)), (TOFFOLI_13, (5, 7))]:
        expect = np.eye(8)
        expect[[i, j]] = expect[[j, i]]
        assert max_deviation(gate, expect) == 0.0


def test_rotation_conventions():
    assert np.allclose(ry(math.pi), [[0, -1], [1, 0]], atol=1e-15)
    assert np.allclose(rz(math.pi), np.diag([-1j, 1j]))
    assert np.allclose(phase_gate(math.pi / 2), np.diag([1, 1j]))
    assert np.allclose(ry(0.4) @ ry(-0.4), I2, atol=1e-15)


def test_basic_gate_lookup():
    assert max_deviation(basic_gate("H"), H) == 0.0
    got = basic_gate("X")
    got[0, 0] = 99.0  # copies only; the registry must stay intact
    assert basic_gate("X")[0, 0] == 0.0
    with pytest.raises(ValueError):
        basic_gate("SWAP")


class TestChannelParams:
    def test_reference_values_accepted(self):
        p = ChannelParams(0.3, 0.4, 0.5, math.sqrt(0.5))
        assert p.as_tuple()[0] == 0.3

    def test_negative_coefficients_allowed_except_alpha(self):
        ChannelParams(0.5, -0.5, 0.5, -0.5)
        with pytest.raises(ValueError):
            ChannelParams(-0.5, 0.5, 0.5, 0.5)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            ChannelParams(0.5, 0.5, 0.5, 0.6)

    def test_alpha_must_be_smallest_in_magnitude(self):
        with pytest.raises(ValueError):
            ChannelParams(0.6, 0.3, 0.4, math.sqrt(1 - 0.36 - 0.09 - 0.16))

    def test_equal_channel_is_half_everywhere(self):
        assert equal_channel().as_tuple() == (0.5, 0.5, 0.5, 0.5)

    def test_channel_for_alpha(self):
        p = channel_for_alpha(0.3)
        assert p.alpha == 0.3
        assert abs(p.beta - p.gamma) == 0.0 and abs(p.gamma - p.kappa) == 0.0
        with pytest.raises(ValueError):
            channel_for_alpha(0.6)  # alpha would exceed the other coefficients

    @given(channels)
    def test_random_channels_are_valid(self, p):
        a, b, g, k = p.as_tuple()
        assert abs(a * a + b * b + g * g + k * k - 1.0) < 1e-12
        assert 0 < a <= min(abs(b), abs(g), abs(k)) + 1e-12


@given(channels)
def test_purification_unitary_is_unitary(p):
    assert unitarity_deviation(purification_unitary(p)) < 1e-12


def test_purification_unitary_layout(reference_channel):
    u = purification_unitary(reference_channel)
    a, b, g, k = reference_channel.as_tuple()
    assert u[0, 0] == 1.0
    assert u[5, 5] == -1.0
    assert abs(u[1, 1] + a / b) < 1e-15
    assert abs(u[3, 3] + a / g) < 1e-15
    assert abs(u[6, 6] - a / k) < 1e-15
    # off-diagonal couplings are the positive square roots
    assert abs(u[1, 2] - math.sqrt(1 - (a / b) ** 2)) < 1e-15
    assert abs(u[2, 1] - u[1, 2]) == 0.0
    # no coupling between the 2x2 blocks
    assert u[1, 3] == 0.0 and u[4, 6] == 0.0


def test_purification_unitary_on_equal_channel_is_signed_permutation():
    u = purification_unitary(equal_channel())
    assert np.count_nonzero(np.abs(np.abs(u) - 1.0) < 1e-12) == 8


@given(channels)
def test_cc_u_blocks_are_special_unitary(p):
    for blk in cc_u_blocks(p):
        assert unitarity_deviation(blk) < 1e-12
        det = blk[0, 0] * blk[1, 1] - blk[0, 1] * blk[1, 0]
        assert abs(det - 1.0) < 1e-12


def test_controlled_controlled_u_block_placement():
    u = np.array([[0, 1], [1, 0]], dtype=complex)
    assert max_deviation(controlled_controlled_u(u, (1, 2), 3), TOFFOLI_12) == 0.0
    assert max_deviation(controlled_controlled_u(u, (2, 3), 1), TOFFOLI_23) == 0.0
    assert max_deviation(controlled_controlled_u(u, (1, 3), 2), TOFFOLI_13) == 0.0
    with pytest.raises(ValueError):
        controlled_controlled_u(u, (1, 2), 2)


def test_embed_gate_matches_apply_gate():
    rng = np.random.default_rng(4)
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    q, r = np.linalg.qr(m)
    u = q * (np.diag(r) / np.abs(np.diag(r)))
    state = make_state(3, rng.standard_normal(8) + 1j * rng.standard_normal(8))
    for targets in [(1, 2), (2, 3), (1, 3), (3, 1)]:
        via_embed = embed_gate(u, targets, 3) @ state.amplitudes
        via_apply = apply_gate(state, u, targets).amplitudes
        assert max_deviation(via_embed, via_apply) < 1e-12


def test_compose_is_temporal():
    seq = [GateOp("X", (1,), X), GateOp("H", (1,), H)]
    # H acts after X, so the product is H @ X
    assert max_deviation(compose(seq, 1), H @ X) < 1e-15


def test_gateop_validation():
    with pytest.raises(ValueError):
        GateOp("X", (1, 1), np.eye(4))
    with pytest.raises(ValueError):
        GateOp("X", (1,), np.eye(4))  # shape mismatch
    with pytest.raises(ValueError):
        GateOp("M", (1,), np.array([[1, 0], [0, 2]]))  # not unitary


def test_bell_states_orthonormal_and_indexed():
    states = bell_states()
    for i, si in enumerate(states):
        for j, sj in enumerate(states):
            overlap = abs(np.vdot(si.amplitudes, sj.amplitudes))
            assert abs(overlap - (1.0 if i == j else 0.0)) < 1e-12
    # The measurement rotation (CNOT then H on the first qubit) must map
    # Bell state k onto the computational state with m1 + 2*m2 = k.
    for k, s in enumerate(states):
        rotated = apply_gate(apply_gate(s, CNOT, (1, 2)), H, (1,))
        idx = int(np.argmax(np.abs(rotated.amplitudes)))
        m1, m2 = idx >> 1, idx & 1
        assert m1 + 2 * m2 == k
        assert abs(abs(rotated.amplitudes[idx]) - 1.0) < 1e-12


def test_factored_sequence_has_expected_shape(reference_channel):
    seq = factored_u0_sequence(reference_channel)
    assert len(seq) == len(FACTORED_U0_TOKENS) == 148
    names = {op.name for op in seq}
    assert names <= {"CNOT", "CNOT_REV", "TOFFOLI_12", "TOFFOLI_23", "TOFFOLI_13",
                     "X", "Z", "CCU_12", "CCU_23", "CCU_13"}
    # exactly one doubly-controlled block per channel coefficient
    assert sum(op.name == "CCU_23" for op in seq) == 1
    assert sum(op.name == "CCU_13" for op in seq) == 1
    assert sum(op.name == "CCU_12" for op in seq) == 1


def test_factored_sequence_composes_to_purification(reference_channel):
    got = compose(factored_u0_sequence(reference_channel), register_width=3)
    assert max_deviation(got, purification_unitary(reference_channel)) < 1e-12


@given(channels)
def test_factored_sequence_composes_for_random_channels(p):
    got = compose(factored_u0_sequence(p), register_width=3)
    assert max_deviation(got, purification_unitary(p)) < 1e-9


def test_matrix_json_round_trip():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    again = matrix_from_json(matrix_to_json(m))
    assert max_deviation(m, again) == 0.0
