import numpy as np
import pytest

from windowingress.pnm import PnmError, decode_pnm, encode_pnm, read_pnm, write_pnm


@pytest.mark.parametrize("shape", [(3, 5), (4, 2, 3), (1, 1), (1, 1, 3)])
def test_round_trip_is_bit_exact(tmp_path, shape):
    img = np.random.default_rng(0).integers(0, 256, shape, dtype=np.uint8)
    path = tmp_path / "img.pnm"
    write_pnm(path, img)
    back = read_pnm(path)
    assert back.dtype == np.uint8 and np.array_equal(back, img)


def test_header_comments_are_skipped():
    data = b"P5\n# a comment\n2 1\n# another\n255\n\x01\x02"
    assert decode_pnm(data).tolist() == [[1, 2]]


def test_magic_selects_channels():
    assert encode_pnm(np.zeros((2, 2), np.uint8)).startswith(b"P5")
    assert encode_pnm(np.zeros((2, 2, 3), np.uint8)).startswith(b"P6")


@pytest.mark.parametrize("data", [
    b"",
    b"P6\n4 4\n255\n" + bytes(10),
    b"P3\n1 1\n255\n0 0 0",
    b"P5\n1 1\n65535\n\x00\x00",
    b"P5\nx 1\n255\n\x00",
    b"P5\n0 1\n255\n",
    b"P5\n1 1",
])
def test_malformed_input_rejected(data):
    with pytest.raises(PnmError):
        decode_pnm(data)


def test_missing_file(tmp_path):
    with pytest.raises(PnmError):
        read_pnm(tmp_path / "nope.ppm")


def test_encode_rejects_bad_arrays():
    with pytest.raises(PnmError):
        encode_pnm(np.zeros((2, 2), np.float64))
    with pytest.raises(PnmError):
        encode_pnm(np.zeros((2, 2, 4), np.uint8))
