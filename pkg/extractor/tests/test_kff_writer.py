"""The emitted container must be byte-compatible with the downstream reader."""

import numpy as np
import pytest

pytest.importorskip("kfextract")
pytest.importorskip("kfid")

from kfextract.errors import DataError
from kfextract.kff import write_features
from kfid.features import FeatureMatrix, load_features, save_features


@pytest.mark.parametrize("video", ["v", "GH010063", "θ-camera"])
def test_bytes_match_downstream_writer(tmp_path, video):
    rng = np.random.default_rng(11)
    data = rng.standard_normal((4, 6))
    ours = tmp_path / "ours.kff"
    theirs = tmp_path / "theirs.kff"
    write_features(ours, video, data)
    save_features(FeatureMatrix.from_rows(video, data), theirs)
    assert ours.read_bytes() == theirs.read_bytes()


def test_output_parses_downstream(tmp_path):
    data = np.arange(12, dtype=np.float64).reshape(3, 4)
    path = tmp_path / "m.kff"
    write_features(path, "clip", data)
    loaded = load_features(path)
    assert loaded.video == "clip"
    assert loaded.data.shape == (3, 4)
    assert np.array_equal(loaded.data, data)


def test_writer_is_deterministic(tmp_path):
    data = np.random.default_rng(5).standard_normal((7, 3))
    write_features(tmp_path / "a.kff", "v", data)
    write_features(tmp_path / "b.kff", "v", data)
    assert (tmp_path / "a.kff").read_bytes() == (tmp_path / "b.kff").read_bytes()


def test_writer_rejects_bad_input(tmp_path):
    path = tmp_path / "m.kff"
    with pytest.raises(DataError):
        write_features(path, "v", np.zeros(3))
    with pytest.raises(DataError):
        write_features(path, "v", np.zeros((0, 3)))
    with pytest.raises(DataError):
        write_features(path, "v", np.zeros((3, 0)))
    with pytest.raises(DataError):
        write_features(path, "", np.zeros((2, 2)))
    bad = np.zeros((2, 2))
    bad[0, 0] = np.nan
    with pytest.raises(DataError):
        write_features(path, "v", bad)
