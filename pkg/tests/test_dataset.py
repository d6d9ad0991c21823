import numpy as np
import pytest

from cloudsketch import procedural
from cloudsketch.dataset import (build_contour_dataset, build_search_index,
                                 load_manifest, load_search_index)
from cloudsketch.errors import CloudSketchError, StaleIndexError
from cloudsketch.imageproc import decode_png_sketch, trace_contours


@pytest.fixture(scope="module")
def tiny_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("tiny_corpus")
    procedural.write_demo_corpus(root, categories=("ball", "mug"), scale=0.6)
    return root


def build_tiny(corpus, out, **kw):
    return build_contour_dataset(corpus, out, n_views=6, canvas=128, **kw)


class TestBuildContourDataset:
    def test_entry_count_law(self, tiny_corpus, tmp_path):
        manifest = build_tiny(tiny_corpus, tmp_path / "ds")
        assert len(manifest.entries) == 2 * 6
        assert manifest.n_models == 2
        for e in manifest.entries:
            assert manifest.resolve(e.image_path).exists()

    def test_single_model_single_view_echoes_params(self, tmp_path):
        corpus = tmp_path / "corpus1"
        procedural.write_demo_corpus(corpus, categories=("ball",), scale=0.6)
        manifest = build_contour_dataset(corpus, tmp_path / "ds1", n_views=1,
                                         canvas=96, threshold=100, median_k=5, stroke=2)
        assert len(manifest.entries) == 1
        reloaded = load_manifest(manifest.path)
        assert reloaded.canvas == 96
        assert reloaded.threshold == 100
        assert reloaded.median_k == 5
        assert reloaded.stroke == 2
        assert reloaded.n_views == 1

    def test_categories_from_directories(self, tiny_corpus, tmp_path):
        manifest = build_tiny(tiny_corpus, tmp_path / "ds")
        assert {e.category for e in manifest.entries} == {"ball", "mug"}

    def test_unparseable_mesh_rejected_with_warning(self, tiny_corpus, tmp_path, caplog):
        import shutil
        corpus = tmp_path / "corrupt_corpus"
        shutil.copytree(tiny_corpus, corpus)
        bad = corpus / "junk" / "broken.off"
        bad.parent.mkdir()
        bad.write_text("OFF\nnot a mesh\n")
        with caplog.at_level("WARNING"):
            manifest = build_tiny(corpus, tmp_path / "ds_rej")
        assert len(manifest.rejects) == 1
        assert manifest.rejects[0][0] == "junk/broken.off"
        assert manifest.n_models == 2
        assert any("skipping" in r.message for r in caplog.records)
        reloaded = load_manifest(manifest.path)
        assert reloaded.rejects == manifest.rejects

    def test_empty_corpus_rejected(self, tmp_path):
        (tmp_path / "nothing").mkdir()
        with pytest.raises(CloudSketchError):
            build_tiny(tmp_path / "nothing", tmp_path / "out")

    def test_rebuild_is_byte_identical(self, tiny_corpus, tmp_path):
        m1 = build_tiny(tiny_corpus, tmp_path / "a")
        m2 = build_tiny(tiny_corpus, tmp_path / "b")
        assert m1.path.read_text().replace(str(tmp_path / "a"), "") \
            == m2.path.read_text().replace(str(tmp_path / "b"), "")
        for e1, e2 in zip(m1.entries, m2.entries):
            assert m1.resolve(e1.image_path).read_bytes() == m2.resolve(e2.image_path).read_bytes()

    def test_every_image_retraces_to_a_contour(self, tiny_corpus, tmp_path):
        manifest = build_tiny(tiny_corpus, tmp_path / "ds")
        for e in manifest.entries:
            sketch = decode_png_sketch(manifest.resolve(e.image_path).read_bytes())
            assert len(trace_contours(sketch)) >= 1


class TestSearchIndexPipeline:
    def test_rebuild_byte_identical(self, tiny_corpus, tmp_path):
        manifest = build_tiny(tiny_corpus, tmp_path / "ds")
        p1 = tmp_path / "i1.skbof"
        p2 = tmp_path / "i2.skbof"
        build_search_index(manifest, p1, vocab_k=32, train_size=4000, seed=7)
        build_search_index(manifest, p2, vocab_k=32, train_size=4000, seed=7)
        assert p1.read_bytes() == p2.read_bytes()

    def test_self_query_rank1_through_pipeline(self, tiny_corpus, tmp_path):
        from cloudsketch.retrieval import query
        manifest = build_tiny(tiny_corpus, tmp_path / "ds")
        index, vocab = build_search_index(manifest, tmp_path / "i.skbof",
                                          vocab_k=32, train_size=4000)
        for e in manifest.entries:
            sketch = decode_png_sketch(manifest.resolve(e.image_path).read_bytes())
            hits = query(index, vocab, sketch, topk=2)
            assert hits[0].model_id == e.model_id
            assert hits[0].similarity >= 0.999

    def test_stale_manifest_detected(self, tiny_corpus, tmp_path):
        manifest = build_tiny(tiny_corpus, tmp_path / "ds")
        path = tmp_path / "i.skbof"
        build_search_index(manifest, path, vocab_k=32, train_size=4000)
        loaded = load_search_index(path)
        assert loaded[2] is not None
        manifest.path.write_text(manifest.path.read_text() + "# tampered\n")
        with pytest.raises(StaleIndexError):
            load_search_index(path)
        index, vocab, _ = load_search_index(path, verify_manifest=False)
        assert index.n_images == 12

    def test_roundtrip_preserves_scores(self, tiny_corpus, tmp_path):
        from cloudsketch.retrieval import query
        manifest = build_tiny(tiny_corpus, tmp_path / "ds")
        path = tmp_path / "i.skbof"
        index, vocab = build_search_index(manifest, path, vocab_k=32, train_size=4000)
        loaded_index, loaded_vocab, _ = load_search_index(path)
        e = manifest.entries[0]
        sketch = decode_png_sketch(manifest.resolve(e.image_path).read_bytes())
        a = query(index, vocab, sketch)
        b = query(loaded_index, loaded_vocab, sketch)
        assert [(h.model_id, h.view_index) for h in a] == [(h.model_id, h.view_index) for h in b]
        assert np.abs(np.array([h.similarity for h in a])
                      - np.array([h.similarity for h in b])).max() < 1e-9
