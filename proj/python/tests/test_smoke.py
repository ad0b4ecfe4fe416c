import numpy as np
import pytest

import dqdetect


def test_standard_table_at_quality_50():
    q = dqdetect.standard_qmatrix(50)
    assert len(q) == 64
    assert q[0] == 16 and q[63] == 99


def test_encode_decode_roundtrip():
    img = dqdetect.procedural_image(64, 48, seed=1)
    assert img.shape == (48, 64) and img.dtype == np.uint8
    q = dqdetect.standard_qmatrix(90)
    data = dqdetect.encode(img, q)
    assert data[:2] == b"\xff\xd8"
    assert dqdetect.qmatrix(data) == q
    out = dqdetect.decode_pixels(data)
    assert out.shape == img.shape
    assert np.abs(out.astype(int) - img.astype(int)).max() < 40


def test_coefficients_and_features():
    img = dqdetect.procedural_image(64, 64, seed=2)
    data = dqdetect.recompress(dqdetect.encode(img, [4] * 64), [2] * 64)
    coeffs = dqdetect.decode_coefficients(data)
    assert coeffs.shape == (8, 8, 8, 8)
    ac = coeffs.reshape(64, 64)[:, 1:]
    assert (ac % 2 == 0).mean() >= 0.99
    feat = dqdetect.build_feature(data, b=20)
    assert feat.shape == (64, 41, 2)
    assert (feat[:, :, 0].sum(axis=1) == 64).all()
    assert (feat[:, :, 1] == 2).all()
    assert dqdetect.build_feature(data, b=20, with_q_factors=False).shape == (64, 41, 1)


def test_pools_and_forgery():
    assert len(dqdetect.pool("desk:20", 3)) == 20
    case = dqdetect.make_forgery(size=512, kind="copymove", pool="desk:8", region=256, seed=4)
    assert case["mask"].shape == (64, 64)
    assert case["mask"].sum() == 32 * 32
    assert case["provenance"]["manipulation"] == "copymove"
    assert dqdetect.decode_pixels(case["forged"]).shape == (512, 512)


def test_metrics_schema():
    m = dqdetect.metrics([1, 1, 0, 0], [1, 0, 0, 0])
    assert m["counts"]["tp"] == 1
    assert m["rates"]["tpr"] == 0.5
    assert m["derived"]["accuracy"] == 0.75


def test_errors_are_typed():
    with pytest.raises(dqdetect.JpegError):
        dqdetect.decode_coefficients(b"not a jpeg")
    with pytest.raises(ValueError):
        dqdetect.encode(np.zeros((8, 8), np.uint8), [1] * 10)
