"""JPEG double-compression detection and tamper localization."""

from ._core import (
    Classifier,
    CheckpointError,
    JpegError,
    PoolError,
    __version__,
    build_feature,
    decode_coefficients,
    decode_pixels,
    encode,
    make_forgery,
    metrics,
    pool,
    procedural_image,
    qmatrix,
    recompress,
    standard_qmatrix,
)

__all__ = [
    "Classifier",
    "CheckpointError",
    "JpegError",
    "PoolError",
    "__version__",
    "build_feature",
    "decode_coefficients",
    "decode_pixels",
    "encode",
    "make_forgery",
    "metrics",
    "pool",
    "procedural_image",
    "qmatrix",
    "recompress",
    "standard_qmatrix",
]
