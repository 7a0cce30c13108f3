"""Anchor selection, deep/fusion distances, and the kernel backends."""

import numpy as np
import pytest

from kfid import _fusion_py, kernels
from kfid.distance import (
    AnchorSet,
    deep_distance,
    deep_distance_matrix,
    fuse,
    fuse_dataset,
    load_anchors,
    save_anchors,
    select_anchors,
)
from kfid.errors import DataError, FormatError
from kfid.features import FeatureMatrix, SyntheticSpec, generate_synthetic
from kfid.rng import PortableRng


def synthetic_matrix(seed=1, n_key=6, n_ordinary=4, dim=3):
    spec = SyntheticSpec(
        n_key=n_key,
        n_ordinary=n_ordinary,
        dim=dim,
        separation=2.0,
        noise_scale=1.0,
        seed=seed,
    )
    return generate_synthetic(spec, video="v")


def naive_fused(data, anchors):
    """Triple-loop oracle for the fusion matrix."""
    n, d = data.shape
    k = anchors.shape[0]
    out = np.zeros((n, 2 * d))
    for i in range(n):
        for c in range(d):
            out[i, c] = data[i, c]
            total = 0.0
            for j in range(k):
                total += abs(data[i, c] - anchors[j, c])
            out[i, d + c] = total / k
    return out


def test_anchor_set_validation():
    with pytest.raises(DataError):
        AnchorSet(np.zeros(3), ("a",), 0, 1)  # 1-D
    with pytest.raises(DataError):
        AnchorSet(np.zeros((2, 3)), ("a", "b"), 0, 3)  # k mismatch
    with pytest.raises(DataError):
        AnchorSet(np.zeros((2, 3)), ("a",), 0, 2)  # id count
    with pytest.raises(DataError):
        AnchorSet(np.array([[np.inf, 0.0]]), ("a",), 0, 1)


def test_select_anchors_from_key_frames_only():
    m, labels = synthetic_matrix()
    anchors = select_anchors(m, labels, k=3, seed=0)
    assert anchors.k == 3
    assert anchors.vectors.shape == (3, 3)
    key_ids = {fid for fid, label in zip(m.frame_ids, labels) if label == 1}
    assert set(anchors.source_frame_ids) <= key_ids
    # canonical: source ids ascend with row order
    assert list(anchors.source_frame_ids) == sorted(anchors.source_frame_ids)
    rows = {tuple(v) for v in anchors.vectors}
    key_rows = {tuple(m.data[i]) for i, l in enumerate(labels) if l == 1}
    assert rows <= key_rows


def test_select_anchors_is_seeded():
    m, labels = synthetic_matrix(n_key=8)
    a1 = select_anchors(m, labels, k=4, seed=1)
    a2 = select_anchors(m, labels, k=4, seed=1)
    a3 = select_anchors(m, labels, k=4, seed=2)
    assert a1.source_frame_ids == a2.source_frame_ids
    assert np.array_equal(a1.vectors, a2.vectors)
    assert a1.source_frame_ids != a3.source_frame_ids


def test_select_anchors_errors():
    m, labels = synthetic_matrix(n_key=2)
    with pytest.raises(DataError):
        select_anchors(m, labels, k=5, seed=0)  # not enough key frames
    with pytest.raises(DataError):
        select_anchors(m, labels[:-1], k=1, seed=0)  # misaligned labels
    with pytest.raises(ValueError):
        select_anchors(m, labels, k=0, seed=0)


def test_deep_distance_matrix_and_average():
    anchors = AnchorSet(
        np.array([[0.0, 0.0], [2.0, 4.0]]), ("a/000000", "a/000001"), 0, 2
    )
    frame = np.array([1.0, 1.0])
    md = deep_distance_matrix(frame, anchors)
    assert np.array_equal(md, np.array([[1.0, 1.0], [1.0, 3.0]]))
    assert np.array_equal(deep_distance(md), np.array([1.0, 2.0]))


def test_anchor_own_row_is_zero_and_kept():
    m, labels = synthetic_matrix()
    anchors = select_anchors(m, labels, k=2, seed=0)
    # find the row that is itself an anchor
    row_index = m.frame_ids.index(anchors.source_frame_ids[0])
    md = deep_distance_matrix(m.data[row_index], anchors)
    assert np.all(md[0] == 0.0)
    # the zero row participates in the K-average (divide by 2, not 1)
    assert np.array_equal(deep_distance(md), md[1] / 2.0)


def test_deep_distance_validation():
    anchors = AnchorSet(np.zeros((2, 3)), ("a", "b"), 0, 2)
    with pytest.raises(DataError):
        deep_distance_matrix(np.zeros(4), anchors)
    with pytest.raises(DataError):
        deep_distance(np.zeros((0, 3)))
    with pytest.raises(DataError):
        deep_distance(np.zeros(3))


def test_fuse_concatenates():
    fused = fuse(np.array([1.0, 2.0]), np.array([0.5, 0.25]))
    assert np.array_equal(fused, np.array([1.0, 2.0, 0.5, 0.25]))
    with pytest.raises(DataError):
        fuse(np.zeros(2), np.zeros(3))


def test_fuse_dataset_matches_naive_oracle():
    rng = PortableRng(400)
    for _ in range(50):
        n = 1 + rng.next_below(8)
        d = 1 + rng.next_below(5)
        k = 1 + rng.next_below(4)
        data = np.array(
            [[rng.next_gaussian() for _ in range(d)] for _ in range(n)]
        )
        anchors_data = np.array(
            [[rng.next_gaussian() for _ in range(d)] for _ in range(k)]
        )
        m = FeatureMatrix.from_rows("v", data)
        anchors = AnchorSet(anchors_data, tuple(f"a/{i:06d}" for i in range(k)), 0, k)
        fused = fuse_dataset(m, anchors)
        expected = naive_fused(data, anchors_data)
        assert fused.data.shape == (n, 2 * d)
        assert np.allclose(fused.data, expected, rtol=1e-12, atol=1e-12)
        assert fused.frame_ids == m.frame_ids
        assert fused.video == m.video


def test_fuse_dataset_dimension_mismatch():
    m, labels = synthetic_matrix(dim=3)
    anchors = AnchorSet(np.zeros((2, 4)), ("a", "b"), 0, 2)
    with pytest.raises(DataError):
        fuse_dataset(m, anchors)


def test_backends_are_bit_identical():
    if kernels.BACKEND != "compiled":
        pytest.skip("compiled kernel not available")
    rng = PortableRng(77)
    for _ in range(20):
        n = 1 + rng.next_below(12)
        d = 1 + rng.next_below(9)
        k = 1 + rng.next_below(6)
        data = np.array([[rng.next_gaussian() for _ in range(d)] for _ in range(n)])
        anchors = np.array([[rng.next_gaussian() for _ in range(d)] for _ in range(k)])
        compiled = kernels.fused_matrix(data, anchors)
        fallback = _fusion_py.fused_matrix(
            np.ascontiguousarray(data), np.ascontiguousarray(anchors)
        )
        assert compiled.tobytes() == fallback.tobytes()


def test_kernel_wrapper_validation():
    with pytest.raises(DataError):
        kernels.fused_matrix(np.zeros((2, 3)), np.zeros((0, 3)))
    with pytest.raises(DataError):
        kernels.fused_matrix(np.zeros((2, 3)), np.zeros((2, 4)))
    with pytest.raises(DataError):
        kernels.fused_matrix(np.zeros(3), np.zeros((1, 3)))


def test_anchor_save_load_round_trip(tmp_path):
    m, labels = synthetic_matrix(n_key=6)
    anchors = select_anchors(m, labels, k=4, seed=9)
    path = tmp_path / "anchors.kff"
    save_anchors(anchors, path)
    loaded = load_anchors(path)
    assert loaded.seed == 9
    assert loaded.k == 4
    assert loaded.source_frame_ids == anchors.source_frame_ids
    # synthetic data is float32-quantized, so vectors survive bit-exactly
    assert loaded.vectors.tobytes() == anchors.vectors.tobytes()


def test_anchor_sidecar_errors(tmp_path):
    m, labels = synthetic_matrix(n_key=6)
    anchors = select_anchors(m, labels, k=2, seed=0)
    path = tmp_path / "anchors.kff"
    save_anchors(anchors, path)
    meta = tmp_path / "anchors.kff.meta"

    meta.unlink()
    with pytest.raises(DataError):
        load_anchors(path)

    meta.write_text("seed=0\n")  # k missing
    with pytest.raises(FormatError):
        load_anchors(path)

    meta.write_text("seed=0\nk=2\nsource=a\n")  # source count mismatch
    with pytest.raises(FormatError):
        load_anchors(path)

    meta.write_text("seed=0\nk=2\nbogus line\n")
    with pytest.raises(FormatError):
        load_anchors(path)

    meta.write_text("seed=0\nk=2\nmystery=3\nsource=a\nsource=b\n")
    with pytest.raises(FormatError):
        load_anchors(path)
