import pytest
from hypothesis import given
from hypothesis import strategies as st

from slconifold.errors import InconsistentTopologyError, InvalidInputError
from slconifold.topology import (
    ConifoldTopology,
    cone_topology,
    decomposition_block_dims,
    require_consistent,
    tilde_h0bullet_dim,
    tilde_hc1_dim,
    validate,
)


@pytest.mark.parametrize("b1_c,e,want", [(1, 2, 0), (3, 2, 2), (0, 1, 0)])
def test_tilde_hc1(b1_c, e, want):
    assert tilde_hc1_dim(b1_c, e) == want


def test_tilde_hc1_negative():
    with pytest.raises(InconsistentTopologyError):
        tilde_hc1_dim(0, 3)


def test_tilde_h0bullet():
    assert tilde_h0bullet_dim(0, 1) == 0
    assert tilde_h0bullet_dim(4, 2) == 3
    with pytest.raises(InconsistentTopologyError):
        tilde_h0bullet_dim(0, 2)


def test_blocks():
    assert decomposition_block_dims(ConifoldTopology(3, b1=5, b1_c=5), "compact").total == 5
    assert decomposition_block_dims(ConifoldTopology(3, l=1, b1=2, b1_c=2), "AC_decay").total == 2
    r = decomposition_block_dims(ConifoldTopology(3, s=1, b1=1, b1_c=1), "CS_growth")
    assert r.blocks == {"ker_rho": 1, "d_E0": 0}


def test_blocks_need_bullet():
    with pytest.raises(InvalidInputError):
        decomposition_block_dims(ConifoldTopology(3, s=1, l=1, b1_c=1), "CSAC_growth")


def test_cone_topology_is_consistent():
    top = cone_topology(3)
    assert validate(top) == []
    assert tilde_h0bullet_dim(top.b1_c_bullet, top.s) == 0


def test_violations():
    assert any("e - 1" in v for v in validate(ConifoldTopology(3, s=3, b1_c=0)))
    bad = ConifoldTopology(3, s=1, l=1, b1=0, b1_c=3)
    assert any("exceeds b1" in v for v in validate(bad))
    with pytest.raises(InconsistentTopologyError) as exc:
        require_consistent(bad)
    assert exc.value.violations


def test_compact_needs_equal_betti():
    assert validate(ConifoldTopology(3, b1=2, b1_c=1))


@given(
    st.integers(0, 3), st.integers(0, 3), st.integers(0, 6), st.integers(0, 6),
    st.lists(st.integers(0, 3), min_size=6, max_size=6),
)
def test_mixed_blocks_identity(s, l, b1, b1_c, link_b1):
    top = ConifoldTopology(3, s, l, b1, b1_c, None, tuple(link_b1[: s + l]))
    if s == 0 or l == 0 or validate(top):
        return
    r = decomposition_block_dims(top, "CSAC_mixed")
    assert r.blocks["tilde_Hc1"] + r.blocks["d_E_prime"] == b1_c - s
    assert r.blocks["tilde_Hc1"] <= b1
