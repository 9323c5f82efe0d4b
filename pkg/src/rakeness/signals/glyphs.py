"""Small images of rotated, offset alphanumeric glyphs and their statistics."""
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..exceptions import InvalidInputError, NumericError
from ..waveforms import make_rng

SIZE = 24
SUBGRID = 6
GLYPH_SCALE = 2
MAX_ROTATION = 30.0
MAX_OFFSET = 4
MAX_ATTEMPTS = 100
CENTRAL_SUBGRIDS = (5, 6, 9, 10)
LABELS = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ"

# 5x7 dot-matrix font, one string of 5 columns per row
_FONT = {
    "0": ("01110", "10001", "10011", "10101", "11001", "10001", "01110"),
    "1": ("00100", "01100", "00100", "00100", "00100", "00100", "01110"),
    "2": ("01110", "10001", "00001", "00010", "00100", "01000", "11111"),
    "3": ("11111", "00010", "00100", "00010", "00001", "10001", "01110"),
    "4": ("00010", "00110", "01010", "10010", "11111", "00010", "00010"),
    "5": ("11111", "10000", "11110", "00001", "00001", "10001", "01110"),
    "6": ("00110", "01000", "10000", "11110", "10001", "10001", "01110"),
    "7": ("11111", "00001", "00010", "00100", "01000", "01000", "01000"),
    "8": ("01110", "10001", "10001", "01110", "10001", "10001", "01110"),
    "9": ("01110", "10001", "10001", "01111", "00001", "00010", "01100"),
    "A": ("01110", "10001", "10001", "11111", "10001", "10001", "10001"),
    "B": ("11110", "10001", "10001", "11110", "10001", "10001", "11110"),
    "C": ("01110", "10001", "10000", "10000", "10000", "10001", "01110"),
    "D": ("11100", "10010", "10001", "10001", "10001", "10010", "11100"),
    "E": ("11111", "10000", "10000", "11110", "10000", "10000", "11111"),
    "F": ("11111", "10000", "10000", "11110", "10000", "10000", "10000"),
    "G": ("01110", "10001", "10000", "10111", "10001", "10001", "01111"),
    "H": ("10001", "10001", "10001", "11111", "10001", "10001", "10001"),
    "I": ("01110", "00100", "00100", "00100", "00100", "00100", "01110"),
    "J": ("00111", "00010", "00010", "00010", "00010", "10010", "01100"),
    "K": ("10001", "10010", "10100", "11000", "10100", "10010", "10001"),
    "L": ("10000", "10000", "10000", "10000", "10000", "10000", "11111"),
    "M": ("10001", "11011", "10101", "10101", "10001", "10001", "10001"),
    "N": ("10001", "10001", "11001", "10101", "10011", "10001", "10001"),
    "O": ("01110", "10001", "10001", "10001", "10001", "10001", "01110"),
    "P": ("11110", "10001", "10001", "11110", "10000", "10000", "10000"),
    "Q": ("01110", "10001", "10001", "10001", "10101", "10010", "01101"),
    "R": ("11110", "10001", "10001", "11110", "10100", "10010", "10001"),
    "S": ("01111", "10000", "10000", "01110", "00001", "00001", "11110"),
    "T": ("11111", "00100", "00100", "00100", "00100", "00100", "00100"),
    "U": ("10001", "10001", "10001", "10001", "10001", "10001", "01110"),
    "V": ("10001", "10001", "10001", "10001", "10001", "01010", "00100"),
    "W": ("10001", "10001", "10001", "10101", "10101", "10101", "01010"),
    "X": ("10001", "10001", "01010", "00100", "01010", "10001", "10001"),
    "Y": ("10001", "10001", "10001", "01010", "00100", "00100", "00100"),
    "Z": ("11111", "00001", "00010", "00100", "01000", "10000", "11111"),
}


class PlacementError(InvalidInputError):
    """No unclipped placement found for a glyph."""


@dataclass(frozen=True)
class GlyphImage:
    pixels: np.ndarray
    label: str
    rotation: float
    offset: tuple

    @property
    def vector(self):
        return self.pixels.ravel()


def glyph_bitmap(label):
    """Font bitmap of ``label`` upscaled by ``GLYPH_SCALE`` (14 x 10 pixels)."""
    try:
        rows = _FONT[str(label).upper()]
    except KeyError:
        raise InvalidInputError(f"no glyph for {label!r}") from None
    bits = np.array([[c == "1" for c in row] for row in rows], dtype=float)
    return np.kron(bits, np.ones((GLYPH_SCALE, GLYPH_SCALE)))


def _draw(label, rotation_deg, offset, pad):
    """Glyph on a ``(SIZE + 2 pad)`` canvas centred on the inner frame."""
    bmp = glyph_bitmap(label)
    big = SIZE + 2 * pad
    canvas = np.zeros((big, big))
    h, w = bmp.shape
    top, left = (big - h) // 2, (big - w) // 2
    canvas[top : top + h, left : left + w] = bmp
    centre = np.array([top + (h - 1) / 2.0, left + (w - 1) / 2.0])
    a = np.deg2rad(rotation_deg)
    # output -> input map: rotate about the glyph centre, then shift
    rot = np.array([[np.cos(a), np.sin(a)], [-np.sin(a), np.cos(a)]])
    shift = np.array([offset[1], offset[0]], dtype=float)
    origin = centre - rot @ (centre + shift)
    out = ndimage.affine_transform(canvas, rot, offset=origin, order=1, mode="constant", cval=0.0)
    return np.clip(out, 0.0, 1.0)


def render_glyph(label, rotation_deg=0.0, offset=(0, 0)):
    """24 x 24 image of ``label`` rotated about its centre and shifted by ``offset = (dx, dy)``.

    Bilinear interpolation of the rotated bitmap produces the grey levels.

    Raises
    ------
    PlacementError
        If part of the glyph would fall outside the frame.
    """
    pad = SIZE
    full = _draw(label, rotation_deg, offset, pad)
    inner = full[pad : pad + SIZE, pad : pad + SIZE]
    if full.sum() - inner.sum() > 1e-9:
        raise PlacementError(f"glyph {label!r} clipped at rotation {rotation_deg}, offset {offset}")
    return GlyphImage(pixels=inner.copy(), label=str(label).upper(), rotation=float(rotation_deg), offset=tuple(offset))


def random_glyph(seed=None, stream=0):
    """Random label, rotation in +-30 degrees and integer offset in [-4, 4]^2, never clipped."""
    rng = make_rng(seed, stream)
    label = LABELS[int(rng.integers(len(LABELS)))]
    for _ in range(MAX_ATTEMPTS):
        rot = float(rng.uniform(-MAX_ROTATION, MAX_ROTATION))
        off = tuple(int(v) for v in rng.integers(-MAX_OFFSET, MAX_OFFSET + 1, size=2))
        try:
            return render_glyph(label, rot, off)
        except PlacementError:
            continue
    raise PlacementError(f"no unclipped placement for {label!r} after {MAX_ATTEMPTS} attempts")


def glyph_corpus(n, seed=0):
    """``n`` random glyph images as an ``(n, 576)`` array plus their labels."""
    images = [random_glyph(seed, stream=i) for i in range(n)]
    return np.array([g.vector for g in images]), [g.label for g in images]


def subgrid_vectors(images, subgrid_index):
    """Row-major 36-vectors of one 6 x 6 subgrid (subgrids numbered row-major 0..15)."""
    if not 0 <= subgrid_index < (SIZE // SUBGRID) ** 2:
        raise InvalidInputError(f"subgrid index {subgrid_index} outside 0..15")
    X = np.asarray(images, dtype=float).reshape(-1, SIZE, SIZE)
    r, c = divmod(subgrid_index, SIZE // SUBGRID)
    return X[:, r * SUBGRID : (r + 1) * SUBGRID, c * SUBGRID : (c + 1) * SUBGRID].reshape(len(X), -1)


def subgrid_indices(subgrid_index):
    """Flat pixel indices (into the 576-vector) of a subgrid, row-major."""
    idx = np.arange(SIZE * SIZE).reshape(1, SIZE, SIZE)
    return subgrid_vectors(idx, subgrid_index)[0].astype(int)


def subgrid_correlation(images, subgrid_index):
    """Trace-normalized empirical correlation ``E[a a^T]`` of a subgrid."""
    V = subgrid_vectors(images, subgrid_index)
    if V.shape[0] < 2:
        raise InvalidInputError("need at least two images")
    A = V.T @ V / V.shape[0]
    A = 0.5 * (A + A.T)
    tr = np.trace(A)
    if tr <= 0:
        raise NumericError("subgrid is empty in every image")
    return A / tr


def bright_pixel_count(images, threshold=0.1):
    return (np.asarray(images).reshape(len(images), -1) > threshold).sum(axis=1)
