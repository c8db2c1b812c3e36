#!/usr/bin/env python3
"""
Tests for the coupling topology, frame energies and Hamiltonian
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from errors import CyclicTopology, UnknownKey, ValidationError
from model import (
    CouplingMap, Edge, SystemParams, build_hamiltonian, composite_detunings, frame_energies,
    m_scheme_topology, topology_by_name, variant_topology,
)

detuning = st.floats(min_value=-100, max_value=100, allow_nan=False, allow_infinity=False)
rabi_part = st.floats(min_value=-5, max_value=5, allow_nan=False, allow_infinity=False)


class TestTopology:

    def test_m_scheme_edges(self):
        topology = m_scheme_topology()
        assert [(e.field_index, e.lower, e.upper) for e in topology.edges] == [
            (1, 1, 2), (2, 3, 2), (3, 3, 4), (4, 5, 4)]
        assert topology.neighbours(3) == [2, 4]

    def test_field_two_lower_is_three(self):
        edge = m_scheme_topology().edge_for(2)
        assert (edge.lower, edge.upper) == (3, 2)

    def test_variant_path(self):
        topology = variant_topology()
        assert [(e.field_index, e.lower, e.upper) for e in topology.edges] == [
            (1, 1, 2), (2, 5, 2), (3, 3, 4), (4, 5, 4)]
        assert topology.neighbours(3) == [4]
        assert topology.neighbours(5) == [2, 4]

    def test_cycle_rejected(self):
        with pytest.raises(CyclicTopology):
            CouplingMap(((1, 1, 2), (2, 3, 2), (3, 3, 4), (4, 1, 4)))

    def test_frame_energies_rejects_cycle(self):
        with pytest.raises(CyclicTopology):
            frame_energies([(1, 1, 2), (2, 3, 2), (3, 3, 4), (4, 1, 4)], (1, 2, 3, 4))

    def test_edge_must_join_ground_to_excited(self):
        with pytest.raises(ValidationError):
            Edge(1, 2, 4)

    def test_duplicate_pair_rejected(self):
        with pytest.raises(ValidationError):
            CouplingMap(((1, 1, 2), (2, 1, 2), (3, 3, 4), (4, 5, 4)))

    def test_needs_four_edges(self):
        with pytest.raises(ValidationError):
            CouplingMap(((1, 1, 2), (2, 3, 2), (3, 3, 4)))

    def test_topology_by_name(self):
        assert topology_by_name("variant") == variant_topology()
        with pytest.raises(ValidationError):
            topology_by_name("lambda")


class TestFrameEnergies:

    def test_reference_detunings(self):
        np.testing.assert_allclose(frame_energies(m_scheme_topology(), (20, 0, 20, 20)),
                                   [0, 20, 20, 40, 20])

    def test_zero_detunings(self):
        for topology in (m_scheme_topology(), variant_topology()):
            np.testing.assert_array_equal(frame_energies(topology, (0, 0, 0, 0)), np.zeros(5))

    def test_variant_traversal(self):
        theta = frame_energies(variant_topology(), (20, 0, 20, 20))
        assert theta[0] == 0
        assert theta[4] == 20 - 0
        assert theta[3] == theta[4] + 20
        assert theta[2] == theta[3] - 20

    def test_unreachable_level_gets_zero(self, capsys):
        theta = frame_energies([(1, 1, 2), (2, 3, 2), (3, 3, 4)], (1, 2, 3, 4))
        np.testing.assert_allclose(theta, [0, 1, -1, 2, 0])
        assert "⚠️" in capsys.readouterr().out

    @settings(max_examples=100, deadline=None)
    @given(st.tuples(detuning, detuning, detuning, detuning))
    def test_m_scheme_chain_sums(self, deltas):
        d1, d2, d3, d4 = deltas
        theta = frame_energies(m_scheme_topology(), deltas)
        assert theta[0] == 0
        assert theta[1] == pytest.approx(d1)
        assert theta[2] == pytest.approx(d1 - d2, abs=1e-9)
        assert theta[3] == pytest.approx(theta[2] + d3, abs=1e-9)
        assert theta[4] == pytest.approx(theta[3] - d4, abs=1e-9)
        composite = composite_detunings(deltas)
        assert theta[2] == pytest.approx(composite["delta12"], abs=1e-9)
        assert theta[3] == pytest.approx(composite["delta13"], abs=1e-9)
        assert theta[4] == pytest.approx(composite["delta14"], abs=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(st.tuples(detuning, detuning, detuning, detuning), st.permutations(range(4)))
    def test_edge_order_irrelevant(self, deltas, order):
        edges = m_scheme_topology().edges
        shuffled = CouplingMap(tuple(edges[i] for i in order))
        np.testing.assert_allclose(frame_energies(shuffled, deltas),
                                   frame_energies(m_scheme_topology(), deltas), atol=1e-9)


class TestSystemParams:

    def test_negative_rate_names_field(self, fig1a_params):
        with pytest.raises(ValidationError) as info:
            fig1a_params.replace(gamma_25=-1.0)
        assert info.value.field == "gamma_25"
        assert "gamma25" in info.value.message

    def test_non_finite_rejected(self, fig1a_params):
        with pytest.raises(ValidationError):
            fig1a_params.with_detuning(2, float("inf"))
        with pytest.raises(ValidationError):
            fig1a_params.with_rabi(1, complex(float("nan"), 0))

    def test_wrong_lengths(self):
        with pytest.raises(ValidationError):
            SystemParams(rabi=(1, 1, 1), detunings=(0, 0, 0, 0))
        with pytest.raises(ValidationError):
            SystemParams(rabi=(1, 1, 1, 1), detunings=(0, 0, 0))

    def test_flat_round_trip(self, fig1a_params):
        assert SystemParams.from_flat(fig1a_params.to_flat()) == fig1a_params

    def test_from_flat_unknown_key(self):
        with pytest.raises(UnknownKey):
            SystemParams.from_flat({"omega_6": 1.0})

    def test_from_flat_complex_and_lock(self, fig1a_params):
        params = SystemParams.from_flat({"omega1": [0.0, 0.75], "delta3": 12.5,
                                         "lock_delta4_to_delta3": True}, base=fig1a_params)
        assert params.rabi[0] == 0.75j
        assert params.detunings[2] == params.detunings[3] == 12.5

    @pytest.mark.parametrize("flag", ["no", 1, 0, None])
    def test_lock_flag_must_be_boolean(self, fig1a_params, flag):
        with pytest.raises(ValidationError) as info:
            SystemParams.from_flat({"delta3": 5.0, "lock_delta4_to_delta3": flag}, base=fig1a_params)
        assert info.value.field == "lock_delta4_to_delta3"

    def test_lock_false_leaves_delta4(self, fig1a_params):
        params = SystemParams.from_flat({"delta3": 5.0, "lock_delta4_to_delta3": False}, base=fig1a_params)
        assert params.detunings[3] == fig1a_params.detunings[3]

    def test_from_flat_variant_topology(self):
        params = SystemParams.from_flat({"topology": "variant", "gamma12": 1.0})
        assert params.topology.name == "variant"
        assert params.gamma_12 == 1.0

    def test_decay_rates_by_channel(self, fig1a_params):
        rates = fig1a_params.decay_rates
        assert rates[(2, 5)] == 0.25
        assert rates[(4, 1)] == 0.25
        assert rates[(2, 1)] == rates[(4, 5)] == 1.0


class TestHamiltonian:

    def test_zero(self, zero_params):
        H = build_hamiltonian(zero_params)
        np.testing.assert_array_equal(H.matrix, np.zeros((5, 5)))

    def test_reference_entries(self, far_detuned):
        H = build_hamiltonian(far_detuned).matrix
        np.testing.assert_allclose(np.diag(H).real, [0, 20, 20, 40, 20])
        assert H[1, 0] == 0.75
        assert H[1, 2] == 1.5
        assert H[3, 2] == 0.01
        assert H[3, 4] == 0.1
        assert np.count_nonzero(H - np.diag(np.diag(H))) == 8

    def test_complex_rabi_phase(self, fig1a_params):
        H = build_hamiltonian(fig1a_params.with_rabi(1, 0.75 * np.exp(1j * np.pi / 2))).matrix
        assert H[1, 0] == pytest.approx(0.75j)
        assert H[0, 1] == pytest.approx(-0.75j)
        assert np.array_equal(H, H.conj().T)

    def test_variant_couples_five_to_two(self, fig1a_params):
        H = build_hamiltonian(fig1a_params.replace(topology=variant_topology())).matrix
        assert H[1, 4] == 1.5
        assert H[1, 2] == 0

    def test_read_only(self, fig1a_params):
        H = build_hamiltonian(fig1a_params)
        with pytest.raises(ValueError):
            H.matrix[0, 0] = 1.0

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(rabi_part, rabi_part), min_size=4, max_size=4),
           st.tuples(detuning, detuning, detuning, detuning),
           st.sampled_from(["m_scheme", "variant"]))
    def test_always_hermitian(self, rabi, deltas, topology):
        params = SystemParams(rabi=tuple(complex(a, b) for a, b in rabi), detunings=deltas,
                              topology=topology_by_name(topology))
        H = build_hamiltonian(params)
        assert H.is_hermitian()
        assert H.frame_energies[0] == 0
        off_diagonal = H.matrix - np.diag(np.diag(H.matrix))
        assert np.count_nonzero(off_diagonal) <= 8


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-v"]))
