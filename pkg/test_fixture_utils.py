import json

import pytest

from errors import MalformedInput, UnknownFixture, ValidationFailed
from fixture_utils import (
    CATALOG_PATH,
    CatalogSource,
    FileSource,
    corpus,
    get_lattice_source,
    load_fixture,
    matrix_from_reference,
    oracle_path,
    resolve_lattice,
)
from lattice import Lattice, is_definite, signature


class TestCatalogSource:
    def test_named_fixtures(self):
        assert load_fixture("U").rows == [[0, 1], [1, 0]]
        assert load_fixture("rank5-a").rows[4] == [0, 0, 0, 0, -2]

    def test_k3_blocks(self):
        lat = load_fixture("K3[2]")
        assert lat.rank == 23
        assert signature(lat) == (3, 20)

    def test_unknown(self):
        with pytest.raises(UnknownFixture) as e:
            load_fixture("E9")
        assert "U" in e.value.details["known"]

    @pytest.mark.parametrize("name", CatalogSource().list_names())
    def test_fixture_round_trip(self, name):
        lat = CatalogSource().load(name)
        again = Lattice.from_dict(json.loads(json.dumps(lat.to_dict())))
        assert again.gram == lat.gram
        assert again.name == lat.name
        assert again.to_dict() == lat.to_dict()
        assert signature(again) == signature(lat)

    def test_bb_tag_means_signature(self):
        catalog = CatalogSource()
        for name in catalog.tagged("bb"):
            lat = catalog.load(name)
            assert signature(lat) == (3, lat.rank - 3)

    def test_describe(self):
        entries = {d["name"]: d for d in CatalogSource().describe()}
        assert entries["rank5-a"]["description"] == "diag(1,1,1,-1,-2)"
        assert "corpus" in entries["rank5-a"]["tags"]

    def test_fingerprint(self):
        hashes = CatalogSource().fingerprint("U")
        assert list(hashes) == [str(CATALOG_PATH)]

    def test_corpus_is_indefinite(self):
        lattices = corpus()
        assert len(lattices) >= 20
        assert not any(is_definite(lat) for lat in lattices)

    def test_custom_catalog(self, tmp_path):
        path = tmp_path / "catalog.json"
        path.write_text(json.dumps({"tiny": {"gram": [[2]], "tags": ["mine"]}}))
        catalog = CatalogSource(path)
        assert catalog.tagged("mine") == ["tiny"]
        assert catalog.load("tiny").rows == [[2]]

    def test_catalog_must_be_object(self, tmp_path):
        path = tmp_path / "catalog.json"
        path.write_text("[]")
        with pytest.raises(ValidationFailed):
            CatalogSource(path).list_names()


class TestFileSource:
    def test_gram_file(self, tmp_path):
        path = tmp_path / "mine.json"
        path.write_text(json.dumps({"gram": [[0, 1], [1, 0]], "labels": ["e", "f"]}))
        lat = FileSource(path).load()
        assert lat.name == "mine"
        assert lat.labels == ("e", "f")

    def test_blocks_file(self, tmp_path):
        path = tmp_path / "blocks.json"
        path.write_text(json.dumps({"name": "UU", "blocks": ["U", "U"]}))
        assert FileSource(path).load().rank == 4

    def test_missing_gram(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text(json.dumps({"name": "nothing"}))
        with pytest.raises(ValidationFailed) as e:
            FileSource(path).load()
        assert e.value.details["path"] == "$.gram"

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"gram": [[1, 0], [0, 1]')
        with pytest.raises(MalformedInput) as e:
            FileSource(path).load()
        assert e.value.details["line"] == 1

    def test_file_wins_over_catalog(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        (tmp_path / "U").write_text(json.dumps({"gram": [[2]]}))
        source, name = get_lattice_source("U")
        assert isinstance(source, FileSource)
        assert source.load(name).rows == [[2]]

    def test_resolve_hashes_file(self, tmp_path):
        path = tmp_path / "mine.json"
        path.write_text(json.dumps({"gram": [[0, 1], [1, 0]]}))
        lat, hashes = resolve_lattice(str(path))
        assert lat.rank == 2
        assert list(hashes) == [str(path)]


class TestReferences:
    def test_bundled_oracle(self):
        assert oracle_path("k3n2").name == "k3n2.json"

    def test_unknown_oracle(self):
        with pytest.raises(UnknownFixture):
            oracle_path("enriques")

    def test_inline_matrix(self):
        assert matrix_from_reference("[[1, 2], [3, 4]]").tolist() == [[1, 2], [3, 4]]

    def test_matrix_file(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"matrix": [["1/2", 0], [0, 1]]}))
        M = matrix_from_reference(str(path))
        assert M[0, 0] * 2 == 1
