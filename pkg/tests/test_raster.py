import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from echoscaffold.raster import (
    MaxvalError,
    RectOutOfBoundsError,
    RoiRect,
    TruncatedPayloadError,
    UnsupportedFormatError,
    crop,
    encode_pgm,
    extract_roi,
    load_image,
    save_image,
)

images = arrays(np.uint8, st.tuples(st.integers(1, 20), st.integers(1, 20)))


def test_load_2x2_pgm(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 128, 7]))
    img = load_image(p)
    assert img.shape == (2, 2)
    assert img.ravel().tolist() == [0, 255, 128, 7]


def test_header_comments_and_spacing(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5 # made by hand\n3  1\n# maxval next\n255 " + bytes([1, 2, 3]))
    assert load_image(p).tolist() == [[1, 2, 3]]


def test_payload_byte_that_looks_like_whitespace(tmp_path):
    # first pixel is 0x0A; exactly one whitespace byte separates header and payload
    p = tmp_path / "ws.pgm"
    p.write_bytes(b"P5\n2 1\n255\n" + bytes([10, 32]))
    assert load_image(p).tolist() == [[10, 32]]


def test_truncated_payload(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5\n496 369\n255\n" + bytes(100))
    with pytest.raises(TruncatedPayloadError):
        load_image(p)


def test_maxval_not_255(tmp_path):
    p = tmp_path / "m.pgm"
    p.write_bytes(b"P5\n2 1\n65535\n" + bytes(4))
    with pytest.raises(MaxvalError):
        load_image(p)


@pytest.mark.parametrize("payload", [b"P2\n1 1\n255\n0\n", b"BM\x00\x00", b"P6\n1 1\n255\n\x00\x00\x00"])
def test_unsupported_format(tmp_path, payload):
    p = tmp_path / "u.img"
    p.write_bytes(payload)
    with pytest.raises(UnsupportedFormatError):
        load_image(p)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "nope.pgm")


def test_save_constant_128(tmp_path):
    p = tmp_path / "k.pgm"
    save_image(np.full((4, 4), 128, np.uint8), p)
    data = p.read_bytes()
    assert data.endswith(b"\n" + b"\x80" * 16)
    assert data[-16:] == b"\x80" * 16
    assert data.startswith(b"P5")


def test_save_single_black_pixel(tmp_path):
    p = tmp_path / "one.pgm"
    save_image(np.zeros((1, 1), np.uint8), p)
    assert p.read_bytes() == b"P5\n1 1\n255\n\x00"


def test_resave_reproduces_payload(tmp_path):
    src = tmp_path / "src.pgm"
    src.write_bytes(b"P5\n3 2\n255\n" + bytes([9, 8, 7, 6, 5, 4]))
    dst = tmp_path / "dst.pgm"
    save_image(load_image(src), dst)
    assert load_image(dst).tobytes() == bytes([9, 8, 7, 6, 5, 4])


@settings(max_examples=50, deadline=None)
@given(images)
def test_round_trip_property(tmp_path_factory, img):
    p = tmp_path_factory.mktemp("rt") / "x.pgm"
    save_image(img, p)
    np.testing.assert_array_equal(load_image(p), img)


def test_round_trip_seeded_random(tmp_path, rng):
    for n in range(10):
        img = rng.integers(0, 256, size=(rng.integers(1, 60), rng.integers(1, 60)), dtype=np.uint8)
        save_image(img, tmp_path / f"{n}.pgm")
        np.testing.assert_array_equal(load_image(tmp_path / f"{n}.pgm"), img)


def test_png_round_trip(tmp_path, rng):
    pytest.importorskip("PIL")
    img = rng.integers(0, 256, size=(7, 11), dtype=np.uint8)
    save_image(img, tmp_path / "x.png")
    np.testing.assert_array_equal(load_image(tmp_path / "x.png"), img)


def test_png_rejects_color(tmp_path):
    Image = pytest.importorskip("PIL.Image")
    Image.new("RGB", (3, 3)).save(tmp_path / "c.png")
    with pytest.raises(UnsupportedFormatError):
        load_image(tmp_path / "c.png")


def test_encode_rejects_out_of_range():
    with pytest.raises(ValueError):
        encode_pgm(np.array([[256]]))


def test_crop_369x200_window():
    img = np.zeros((369, 496), np.uint8)
    out = crop(img, RoiRect(0, 0, 369, 200))
    assert out.shape == (200, 369)


def test_crop_full_is_identity(rng):
    img = rng.integers(0, 256, (13, 17), dtype=np.uint8)
    np.testing.assert_array_equal(crop(img, RoiRect.full(img)), img)


def test_crop_offset():
    ramp = np.arange(100, dtype=np.uint8).reshape(10, 10)
    out = crop(ramp, RoiRect(2, 3, 4, 5))
    assert out.shape == (5, 4)
    assert out[0, 0] == ramp[3, 2]
    for j in range(5):
        for i in range(4):
            assert out[j, i] == ramp[3 + j, 2 + i]


def test_crop_out_of_bounds():
    with pytest.raises(RectOutOfBoundsError):
        crop(np.zeros((10, 10), np.uint8), RoiRect(5, 5, 6, 2))
    with pytest.raises(RectOutOfBoundsError):
        crop(np.zeros((10, 10), np.uint8), RoiRect(-1, 0, 2, 2))


def test_rect_needs_positive_size():
    with pytest.raises(ValueError):
        RoiRect(0, 0, 0, 3)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_crop_composition(data):
    h = data.draw(st.integers(2, 30))
    w = data.draw(st.integers(2, 30))
    img = np.arange(h * w, dtype=np.int64).reshape(h, w) % 251
    img = img.astype(np.uint8)
    ax, ay = data.draw(st.integers(0, w - 1)), data.draw(st.integers(0, h - 1))
    a = RoiRect(ax, ay, data.draw(st.integers(1, w - ax)), data.draw(st.integers(1, h - ay)))
    bx, by = data.draw(st.integers(0, a.w - 1)), data.draw(st.integers(0, a.h - 1))
    b = RoiRect(bx, by, data.draw(st.integers(1, a.w - bx)), data.draw(st.integers(1, a.h - by)))
    np.testing.assert_array_equal(crop(crop(img, a), b), crop(img, a.offset(b)))


@pytest.mark.parametrize("w,h,n", [(135, 58, 7830), (75, 42, 3150)])
def test_roi_sizes(w, h, n):
    img = np.zeros((200, 369), np.uint8)
    assert extract_roi(img, RoiRect(10, 10, w, h)).size == n


def test_roi_single_pixel():
    img = np.arange(12, dtype=np.uint8).reshape(3, 4) + 40
    assert extract_roi(img, RoiRect(0, 0, 1, 1)).tolist() == [40]


def test_roi_full_equals_pixels(rng):
    img = rng.integers(0, 256, (9, 14), dtype=np.uint8)
    np.testing.assert_array_equal(extract_roi(img, RoiRect.full(img)), img.ravel())


def test_centered_in():
    outer = RoiRect(10, 20, 135, 58)
    inner = RoiRect(0, 0, 75, 42).centered_in(outer)
    assert (inner.x, inner.y) == (40, 28)
