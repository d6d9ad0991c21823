"""Shared fixtures: procedural mesh corpora, datasets, and search indexes.

The acceptance corpus (5 categories x 102 views at 512px) is expensive and
session-scoped; service/CLI tests use a smaller corpus.
"""

from __future__ import annotations

import time
from types import SimpleNamespace

import numpy as np
import pytest

from cloudsketch import dataset, procedural
from cloudsketch.geometry import normalize_unit

DATASET_SCALE = 1.3    # tessellation density of corpus meshes
ICP_SCALE = 2.2        # denser variants for alignment-recovery trials


def normalized_mesh(name: str, scale: float):
    mesh = procedural.GENERATORS[name](scale)
    verts, _ = normalize_unit(mesh.vertices)
    return mesh.with_vertices(verts)


@pytest.fixture(scope="session")
def icp_meshes():
    """Dense, rotation-identifiable shapes for alignment recovery trials."""
    return {name: normalized_mesh(name, ICP_SCALE) for name in ("mug", "chair", "table")}


@pytest.fixture(scope="session")
def acceptance_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus5")
    procedural.write_demo_corpus(root, categories=procedural.DEMO_CATEGORIES,
                                 scale=DATASET_SCALE)
    return root


@pytest.fixture(scope="session")
def acceptance_dataset(acceptance_corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("dataset5")
    t0 = time.perf_counter()
    manifest = dataset.build_contour_dataset(acceptance_corpus, out, n_views=102,
                                             canvas=512)
    build_seconds = time.perf_counter() - t0
    return SimpleNamespace(manifest=manifest, out_dir=out, corpus=acceptance_corpus,
                           build_seconds=build_seconds)


@pytest.fixture(scope="session")
def acceptance_index(acceptance_dataset, tmp_path_factory):
    path = tmp_path_factory.mktemp("index5") / "index.skbof"
    t0 = time.perf_counter()
    index, vocab = dataset.build_search_index(acceptance_dataset.manifest, path,
                                              vocab_k=256, seed=0)
    build_seconds = time.perf_counter() - t0
    return SimpleNamespace(index=index, vocab=vocab, path=path,
                           manifest=acceptance_dataset.manifest,
                           build_seconds=build_seconds)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus3")
    procedural.write_demo_corpus(root, categories=("ball", "mug", "chair"),
                                 scale=DATASET_SCALE)
    return root


@pytest.fixture(scope="session")
def small_index(small_corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("dataset3")
    manifest = dataset.build_contour_dataset(small_corpus, out, n_views=10, canvas=256)
    path = out / "index.skbof"
    index, vocab = dataset.build_search_index(manifest, path, vocab_k=64,
                                              train_size=8000, seed=0)
    return SimpleNamespace(index=index, vocab=vocab, path=path, manifest=manifest,
                           out_dir=out, corpus=small_corpus)
