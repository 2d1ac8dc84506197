import pytest

from hinmhp.hin import EdgeKind, NodeKind, build
from hinmhp.ingest import Condition, build_hin
from hinmhp.synth import nethealth_fixture


@pytest.fixture(scope="session")
def fixture_data():
    return nethealth_fixture()


@pytest.fixture(scope="session")
def fixture_hin(fixture_data):
    cohort, sms = fixture_data
    return build_hin(cohort, sms, Condition.Depression)


def small_hin(n_ind=3, ii_edges=(), im=None):
    """Minimal valid HIN: every individual shares one node per trait kind."""
    labels = {
        NodeKind.Individual: [f"i{j}" for j in range(n_ind)],
        NodeKind.PersonalityTraits: ["p0"],
        NodeKind.SocialStatus: ["s0"],
        NodeKind.PhysicalHealth: ["f0"],
        NodeKind.WellBeing: ["w0"],
        NodeKind.MentalHealth: ["pos", "neg"],
    }
    edges = {
        EdgeKind.II: list(ii_edges),
        EdgeKind.IP: [(j, 0, 1) for j in range(n_ind)],
        EdgeKind.IS: [(j, 0, 1) for j in range(n_ind)],
        EdgeKind.IF: [(j, 0, 1) for j in range(n_ind)],
        EdgeKind.IW: [(j, 0, 1) for j in range(n_ind)],
        EdgeKind.IM: [(j, m, 1) for j, m in (im or {}).items()],
    }
    return build(labels, edges)
