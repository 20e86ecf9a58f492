"""Tests that the bundled corpus loads, checks and matches its manifest."""

import pytest
import yaml
from click.testing import CliRunner

from doctrina.calculus import Checker, render_sequent
from doctrina.cli import main
from doctrina.translate import push_sketch, translate_derivation, translate_sequent
from doctrina.workspace import load_workspace

from .conftest import CORPUS_DIR

CORPUS_FILES = sorted(path.name for path in CORPUS_DIR.glob("*.dtr"))


@pytest.fixture(scope="module")
def manifest():
    with open(CORPUS_DIR / "manifest.yaml") as f:
        return yaml.safe_load(f)


_loaded = {}


def corpus_workspace(name):
    if name not in _loaded:
        _loaded[name] = load_workspace(CORPUS_DIR / name)
    return _loaded[name]


def split_ref(ref):
    file, item = ref.split(":")
    return file, item


class TestCorpusFiles:
    """Every corpus file loads cleanly."""

    @pytest.mark.parametrize("name", CORPUS_FILES)
    def test_no_problems(self, name):
        """Files load without validation problems."""
        ws = corpus_workspace(name)
        assert ws.valid, [str(p) for p in ws.problems]

    @pytest.mark.parametrize("name", CORPUS_FILES)
    def test_proofs_check(self, name):
        """Every proof elaborates and checks."""
        ws = corpus_workspace(name)
        failed = {n: str(r.error) for n, r in ws.proofs.items() if not r.ok}
        assert failed == {}

    @pytest.mark.parametrize("name", CORPUS_FILES)
    def test_rejections_hold(self, name):
        """Every rejection fails with its expected code."""
        ws = corpus_workspace(name)
        assert [(r.name, r.actual) for r in ws.rejects if not r.satisfied] == []

    @pytest.mark.parametrize("name", CORPUS_FILES)
    def test_check_command(self, name):
        """The check command passes on every file, expectations included."""
        result = CliRunner().invoke(main, ["check", str(CORPUS_DIR / name)])
        assert result.exit_code == 0, result.output


class TestManifest:
    """The manifest names real items and their conclusions."""

    def test_rules_reference_proofs(self, manifest):
        """Rule entries point at proofs that check."""
        for rule, refs in manifest["rules"].items():
            for ref in refs:
                file, proof = split_ref(ref)
                assert corpus_workspace(file).proof(proof).ok, (rule, ref)

    def test_rejections_reference_rejects(self, manifest):
        """Rejection entries point at satisfied rejections."""
        for ref in manifest["rejections"].values():
            file, name = split_ref(ref)
            (record,) = [r for r in corpus_workspace(file).rejects if r.name == name]
            assert record.satisfied

    def test_conclusions(self, manifest):
        """Conclusions render as listed."""
        for file, proofs in manifest["conclusions"].items():
            ws = corpus_workspace(file)
            for proof, expected in proofs.items():
                record = ws.proof(proof)
                rendered = render_sequent(ws.checker(record.sketch), record.conclusion)
                assert rendered == expected, (file, proof)


class TestCorpusMaps:
    """Maps in the corpus translate the corpus proofs."""

    @pytest.mark.parametrize("map_name", ["ToCLLX", "ToDILL"])
    def test_translate_sketch(self, map_name):
        """Images conclude the translated sequents."""
        ws = corpus_workspace("maps.dtr")
        m = ws.map(map_name)
        source = ws.sketch("M")
        target = push_sketch(m, source)
        checker = Checker(target)
        for name, d in ws.proofs_in("M").items():
            image = translate_derivation(m, source, d, target)
            assert checker.check(image) == translate_sequent(m, ws.proof(name).conclusion), name
