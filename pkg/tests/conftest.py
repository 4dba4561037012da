import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from infdiag.core import Diagram, Node, NodeKind, OutcomeSpace
from infdiag.fileio import load_diagram, load_joint

DIAGRAM_DIR = pathlib.Path(__file__).parent.parent / "diagrams"


@pytest.fixture(scope="session")
def mars_path() -> pathlib.Path:
    return DIAGRAM_DIR / "mars_venus.json"


@pytest.fixture(scope="session")
def joint_path() -> pathlib.Path:
    return DIAGRAM_DIR / "mars_venus_joint.json"


@pytest.fixture(scope="session")
def split_path() -> pathlib.Path:
    return DIAGRAM_DIR / "mars_split.json"


@pytest.fixture()
def mars(mars_path) -> Diagram:
    return load_diagram(mars_path.read_bytes())


@pytest.fixture()
def mars_joint(mars, joint_path):
    return load_joint(joint_path.read_bytes(), mars)


@pytest.fixture()
def split(split_path) -> Diagram:
    return load_diagram(split_path.read_bytes())


@pytest.fixture()
def two_chain() -> Diagram:
    """X -> Y -> V with the worked posterior numbers used across tests."""
    return Diagram(
        [
            Node("X", NodeKind.CHANCE, OutcomeSpace(("x1", "x2")), table=[[0.3, 0.7]]),
            Node(
                "Y",
                NodeKind.CHANCE,
                OutcomeSpace(("y1", "y2")),
                parents=("X",),
                table=[[0.5, 0.5], [0.2, 0.8]],
            ),
            Node("V", NodeKind.VALUE, parents=("Y",), table=[10.0, 4.0]),
        ],
        name="two-chain",
    )


@pytest.fixture()
def xor_net() -> Diagram:
    """Two fair binary inputs feeding an exclusive-or node."""
    return Diagram(
        [
            Node("A", NodeKind.CHANCE, OutcomeSpace(("0", "1")), table=[[0.5, 0.5]]),
            Node("B", NodeKind.CHANCE, OutcomeSpace(("0", "1")), table=[[0.5, 0.5]]),
            Node(
                "veto",
                NodeKind.DETERMINISTIC,
                OutcomeSpace(("0", "1")),
                parents=("A", "B"),
                table=[0, 1, 1, 0],
            ),
            Node("V", NodeKind.VALUE, parents=("veto",), table=[1.0, 3.0]),
        ],
        name="xor-net",
    )


@pytest.fixture()
def conditional_instance() -> Diagram:
    """Chance node with a decision predecessor and a chance successor; the
    shape where the per-outcome propagation method needs strictly less
    space than the standard pipeline."""
    return Diagram(
        [
            Node("K", NodeKind.DECISION, OutcomeSpace(("k0", "k1"))),
            Node(
                "I",
                NodeKind.CHANCE,
                OutcomeSpace(("i0", "i1")),
                parents=("K",),
                table=[[0.7, 0.3], [0.35, 0.65]],
            ),
            Node(
                "S",
                NodeKind.CHANCE,
                OutcomeSpace(("s0", "s1")),
                parents=("I",),
                table=[[0.8, 0.2], [0.25, 0.75]],
            ),
            Node("V", NodeKind.VALUE, parents=("K", "S"), table=[10.0, -5.0, 2.0, 12.0]),
        ],
        name="conditional-instance",
    )
