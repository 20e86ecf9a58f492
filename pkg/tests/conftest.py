"""Pytest fixtures for Doctrina tests."""

from pathlib import Path

import pytest
import yaml

from doctrina.base import Sign
from doctrina.doctrine import builtin_doctrine
from doctrina.sketch import ConeInstance, Generator, Sketch, SketchObject
from doctrina.types import Gen

CORPUS_DIR = Path(__file__).parent.parent / "corpus"

P = Sign.POS
N = Sign.NEG


def _sketch(doctrine, objects, generators=None, extremal=(), name="S"):
    if isinstance(doctrine, str):
        doctrine = builtin_doctrine(doctrine)
    return Sketch(
        name=name,
        doctrine=doctrine,
        objects=tuple(SketchObject(n, s) for n, s in objects.items()),
        generators=tuple(Generator(n, tuple(sig)) for n, sig in (generators or {}).items()),
        extremal=tuple(extremal),
    )


@pytest.fixture
def sketch_factory():
    """Build a sketch from a doctrine name, {object: sort} and {generator: signature}."""
    return _sketch


@pytest.fixture
def free_mill():
    """Free MILL sketch on two linear objects."""
    return _sketch("MILL", {"A": "a", "B": "a"}, name="Free")


@pytest.fixture
def one_object_mill():
    """Free MILL sketch on a single object."""
    return _sketch("MILL", {"A": "a"}, name="One")


@pytest.fixture
def arrows():
    """MILL sketch with two parallel generators A -> A."""
    return _sketch(
        "MILL",
        {"A": "a"},
        {"f": [("A", N), ("A", P)], "g": [("A", N), ("A", P)]},
        name="Arrows",
    )


@pytest.fixture
def cart():
    """Free IL sketch on two nonlinear objects."""
    return _sketch("IL", {"X": "x", "Y": "x"}, name="Cart")


@pytest.fixture
def lnl():
    """DILL sketch with a nonlinear generator h : Y -> X."""
    return _sketch(
        "DILL",
        {"A": "a", "B": "a", "X": "x", "Y": "x"},
        {"h": [("Y", N), ("X", P)]},
        name="Lnl",
    )


@pytest.fixture
def kleisli():
    """Free DILLK sketch on one linear object."""
    return _sketch("DILLK", {"A": "a", "B": "a"}, name="Kl")


@pytest.fixture
def lifted():
    """DILLK sketch whose object X is the U-lift of A, witnessed by e."""
    inst = ConeInstance(cone="U", assignment=(("a", "A"),), vertex="X", witnesses=(("p0", "e"),))
    return _sketch(
        "DILLK",
        {"A": "a", "X": "x"},
        {"e": [("A", P), ("X", N)]},
        extremal=[inst],
        name="Lifted",
    )


@pytest.fixture
def rigged():
    """DILLK sketch claiming V is the U-lift of A although nothing reaches X from V."""
    inst = ConeInstance(cone="U", assignment=(("a", "A"),), vertex="V", witnesses=(("p0", "r"),))
    return _sketch(
        "DILLK",
        {"A": "a", "V": "x", "X": "x"},
        {"r": [("A", P), ("V", N)], "e": [("A", P), ("X", N)]},
        extremal=[inst],
        name="Rigged",
    )


@pytest.fixture
def A():
    return Gen("A")


@pytest.fixture
def B():
    return Gen("B")


@pytest.fixture
def write_workspace(tmp_path):
    """Write workspace text to a file under tmp_path and return its path."""

    def write(text: str, name: str = "workspace.dtr") -> Path:
        path = tmp_path / name
        path.write_text(text)
        return path

    return write


@pytest.fixture
def temp_config_dir(tmp_path):
    """Create a temporary directory with a test configuration file."""
    config = {
        "rewrite": {"eta_depth": 2, "node_budget": 500, "fuel": 200, "strategy": "outermost"},
        "search": {"max_depth": 4, "max_cut_depth": 1, "max_nodes": 5000},
        "enumeration": {"hom_size": 3, "max_derivations": 1000},
        "probe": {"expansion_bound": 1, "node_bound": 3},
        "closure": {"trials": 100, "seed": 7, "exhaustive_length": 4},
        "app": {"log_level": "DEBUG", "report_format": "text"},
    }

    config_path = tmp_path / "configuration.yaml"
    with open(config_path, "w") as f:
        yaml.dump(config, f)

    return tmp_path


@pytest.fixture
def corpus_dir():
    return CORPUS_DIR
