import numpy as np
import pytest

from conftest import small_hin
from hinmhp.hin import (
    SIDE_KINDS,
    TRAIT_KINDS,
    EdgeKind,
    Hin,
    NodeId,
    NodeKind,
    SchemaError,
    build,
)


def test_node_and_edge_kind_counts():
    assert len(NodeKind) == 6
    assert len(EdgeKind) == 6
    assert [ek for ek in EdgeKind if ek.is_target] == [EdgeKind.IM]


def test_edge_kind_schema_pairs():
    assert EdgeKind.II.endpoints == (NodeKind.Individual, NodeKind.Individual)
    assert EdgeKind.IP.endpoints == (NodeKind.Individual, NodeKind.PersonalityTraits)
    assert EdgeKind.IS.endpoints == (NodeKind.Individual, NodeKind.SocialStatus)
    assert EdgeKind.IF.endpoints == (NodeKind.Individual, NodeKind.PhysicalHealth)
    assert EdgeKind.IW.endpoints == (NodeKind.Individual, NodeKind.WellBeing)
    assert EdgeKind.IM.endpoints == (NodeKind.Individual, NodeKind.MentalHealth)


def test_neighbors_sms_triangle():
    h = small_hin(3, ii_edges=[(0, 1, 5), (0, 2, 2), (1, 2, 1)])
    got = h.neighbors(NodeId(NodeKind.Individual, 0), EdgeKind.II)
    assert got == [
        (NodeId(NodeKind.Individual, 1), 5.0),
        (NodeId(NodeKind.Individual, 2), 2.0),
    ]


def test_neighbors_exactly_one_trait_edge(fixture_hin):
    for i in (0, 100, 273):
        node = NodeId(NodeKind.Individual, i)
        for ek in TRAIT_KINDS:
            assert len(fixture_hin.neighbors(node, ek)) == 1


def test_neighbors_incompatible_kind_errors():
    h = small_hin(2)
    with pytest.raises(SchemaError):
        h.neighbors(NodeId(NodeKind.PersonalityTraits, 0), EdgeKind.II)


def test_neighbors_unknown_node_errors():
    h = small_hin(2)
    with pytest.raises(SchemaError):
        h.neighbors(NodeId(NodeKind.Individual, 9), EdgeKind.II)


def test_slice_matrix_single_edge_symmetric():
    h = small_hin(2, ii_edges=[(0, 1, 3)])
    M = h.slice_matrix(EdgeKind.II)
    assert M.nnz == 2
    assert sorted(M.data.tolist()) == [3.0, 3.0]
    assert (M != M.T).nnz == 0


def test_slice_matrix_empty_kind_is_zero():
    h = small_hin(2)
    assert h.slice_matrix(EdgeKind.II).nnz == 0


def test_slice_matrix_fixture_ii_nonzeros(fixture_hin):
    assert fixture_hin.slice_matrix(EdgeKind.II).nnz == 2 * 1354


def test_slice_matrix_symmetric_every_kind(fixture_hin):
    for ek in EdgeKind:
        M = fixture_hin.slice_matrix(ek)
        assert (M != M.T).nnz == 0


def test_mask_all_individuals_empties_im():
    h = small_hin(3, im={0: 0, 1: 1, 2: 0})
    masked = h.mask_target_edges(NodeId(NodeKind.Individual, j) for j in range(3))
    assert masked.edges[EdgeKind.IM] == ()
    # input unchanged
    assert len(h.edges[EdgeKind.IM]) == 3


def test_mask_empty_set_is_identity():
    h = small_hin(3, im={0: 0, 1: 1, 2: 0})
    assert h.mask_target_edges([]).edges == h.edges


def test_mask_20_percent_of_fixture(fixture_hin):
    import math

    k = math.ceil(0.2 * 274)
    assert k == 55
    masked = fixture_hin.mask_target_edges(
        NodeId(NodeKind.Individual, j) for j in range(k)
    )
    assert len(masked.edges[EdgeKind.IM]) == 274 - 55


def test_mask_idempotent():
    h = small_hin(3, im={0: 0, 1: 1, 2: 0})
    sel = [NodeId(NodeKind.Individual, 1)]
    once = h.mask_target_edges(sel)
    assert once.mask_target_edges(sel).edges == once.edges


def test_mask_non_individual_errors():
    h = small_hin(2, im={0: 0, 1: 1})
    with pytest.raises(SchemaError):
        h.mask_target_edges([NodeId(NodeKind.MentalHealth, 0)])


def test_restrict_fw_keeps_only_fw_and_im():
    h = small_hin(2, ii_edges=[(0, 1, 4)], im={0: 0, 1: 1})
    r = h.restrict_edge_kinds({EdgeKind.IF, EdgeKind.IW})
    assert r.edges[EdgeKind.II] == ()
    assert r.edges[EdgeKind.IP] == ()
    assert r.edges[EdgeKind.IS] == ()
    assert len(r.edges[EdgeKind.IF]) == 2
    assert len(r.edges[EdgeKind.IW]) == 2
    assert len(r.edges[EdgeKind.IM]) == 2
    # node sets unchanged
    assert r.labels == h.labels


def test_restrict_all_five_is_identity():
    h = small_hin(2, ii_edges=[(0, 1, 4)], im={0: 0, 1: 1})
    assert h.restrict_edge_kinds(set(SIDE_KINDS)).edges == h.edges


def test_restrict_empty_errors():
    h = small_hin(2)
    with pytest.raises(ValueError):
        h.restrict_edge_kinds(set())


def test_restrict_with_im_errors():
    h = small_hin(2)
    with pytest.raises(ValueError):
        h.restrict_edge_kinds({EdgeKind.II, EdgeKind.IM})


def test_validate_clean_fixture(fixture_hin):
    assert fixture_hin.validate() == []


def test_validate_clean_after_restrict(fixture_hin):
    assert fixture_hin.restrict_edge_kinds({EdgeKind.II}).validate() == []


def test_validate_duplicate_ip_edge():
    h = small_hin(2)
    bad = build(
        dict(h.labels),
        {**{k: list(v) for k, v in h.edges.items()},
         EdgeKind.IP: [(0, 0, 1), (0, 0, 1), (1, 0, 1)]},
    )
    msgs = bad.validate()
    assert msgs and any("IP" in m for m in msgs)


def test_validate_zero_weight_ii():
    h = small_hin(2, ii_edges=[(0, 1, 0)])
    assert any("II" in m for m in h.validate())


def test_validate_two_mental_health_nodes():
    labels = {
        NodeKind.Individual: ["a"],
        NodeKind.PersonalityTraits: ["p"],
        NodeKind.SocialStatus: ["s"],
        NodeKind.PhysicalHealth: ["f"],
        NodeKind.WellBeing: ["w"],
        NodeKind.MentalHealth: ["only-one"],
    }
    edges = {ek: [] for ek in EdgeKind}
    for ek in TRAIT_KINDS:
        edges[ek] = [(0, 0, 1)]
    bad = build(labels, edges)
    assert any("MentalHealth" in m for m in bad.validate())


def test_fixture_totals(fixture_hin):
    assert fixture_hin.total_nodes == 274 + 114 + 55 + 27 + 87 + 2 == 559
    assert sum(len(v) for v in fixture_hin.edges.values()) == 1354 + 5 * 274 == 2724


def test_json_round_trip(fixture_hin):
    again = Hin.from_json(fixture_hin.to_json())
    assert again.labels == fixture_hin.labels
    assert again.edges == fixture_hin.edges


def test_global_ordering_individual_first(fixture_hin):
    assert fixture_hin.node_offset(NodeKind.Individual) == 0
    assert fixture_hin.node_offset(NodeKind.PersonalityTraits) == 274
    assert (
        fixture_hin.node_offset(NodeKind.MentalHealth)
        == fixture_hin.total_nodes - 2
    )
