"""Range-Doppler map formation, threshold masking and image normalization.

Processing chain: orthonormal FFT over fast time (range) per chirp, keep the
one-sided positive-beat half, orthonormal FFT over slow time (Doppler) per
range bin, fftshift so the center Doppler row is zero velocity, magnitude in
dB. Threshold masking floors cells below a dB level; to_image/from_image map
dB grids to unit-interval pixels and back.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import InvalidArgument, ShapeError
from .radar import ComplexFrame, RadarConfig

DB_EPSILON = 1e-12  # added to magnitudes before log so zero stays finite
ZERO_MAGNITUDE_DB = 20.0 * np.log10(DB_EPSILON)  # -240 dB

# Normalization window shared by every experiment: the -90 dB ground-truth
# floor maps to pixel 0 and the hottest expected returns sit below -40 dB.
DEFAULT_FLOOR_DB = -90.0
DEFAULT_CEILING_DB = -40.0


class Window(Enum):
    RECT = "rect"
    HANN = "hann"


def _window(kind: Window, n: int) -> np.ndarray:
    if kind is Window.HANN:
        return np.hanning(n)
    return np.ones(n)


@dataclass
class RangeDopplerMap:
    """dB-magnitude grid over (Doppler bin, range bin).

    threshold_db is the floor actually applied, or None for a raw map.
    """

    values_db: np.ndarray  # (doppler_bins, range_bins)
    threshold_db: float | None
    config: RadarConfig | None
    antenna_id: int

    def __post_init__(self):
        self.values_db = np.asarray(self.values_db, dtype=np.float64)
        if self.values_db.ndim != 2:
            raise ShapeError("values_db must be 2-D (doppler_bins, range_bins)")
        if self.config is not None:
            expected = (self.config.chirps_per_frame, self.config.samples_per_chirp // 2)
            if self.values_db.shape != expected:
                raise ShapeError(f"map shape {self.values_db.shape} != expected {expected}")
        if not np.all(np.isfinite(self.values_db)):
            raise InvalidArgument("map contains non-finite values")

    @property
    def doppler_bins(self) -> int:
        return self.values_db.shape[0]

    @property
    def range_bins(self) -> int:
        return self.values_db.shape[1]

    @property
    def zero_velocity_bin(self) -> int:
        return self.doppler_bins // 2

    def peak_cell(self) -> tuple[int, int]:
        """(doppler_bin, range_bin) of the global maximum."""
        flat = int(np.argmax(self.values_db))
        return np.unravel_index(flat, self.values_db.shape)


@dataclass
class ImageGrid:
    """Unit-interval image with the dB window used to produce it."""

    pixels: np.ndarray
    source_floor_db: float | None = None
    source_ceiling_db: float | None = None
    config: RadarConfig | None = None
    antenna_id: int = 0
    threshold_db: float | None = None

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels)
        if self.pixels.ndim != 2:
            raise ShapeError("pixels must be 2-D")

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape


def range_doppler(
    frame: ComplexFrame,
    antenna_id: int,
    window: Window = Window.HANN,
    one_sided: bool = True,
) -> RangeDopplerMap:
    """2D-FFT one antenna channel into a dB range-Doppler map.

    Both FFTs use 1/sqrt(N) normalization so Parseval holds exactly on the
    two-sided map (one_sided=False). The default keeps only non-negative
    beat frequencies, halving the range axis.
    """
    config = frame.config
    if antenna_id < 0 or antenna_id >= config.n_antennas:
        raise InvalidArgument(f"antenna_id {antenna_id} out of range (n_antennas={config.n_antennas})")
    x = frame.data[:, :, antenna_id]
    w_fast = _window(window, config.samples_per_chirp)
    w_slow = _window(window, config.chirps_per_frame)

    spectrum = np.fft.fft(x * w_fast[None, :], axis=1, norm="ortho")
    if one_sided:
        spectrum = spectrum[:, : config.samples_per_chirp // 2]
    spectrum = np.fft.fft(spectrum * w_slow[:, None], axis=0, norm="ortho")
    spectrum = np.fft.fftshift(spectrum, axes=0)

    values_db = 20.0 * np.log10(np.abs(spectrum) + DB_EPSILON)
    return RangeDopplerMap(
        values_db=values_db,
        threshold_db=None,
        config=config if one_sided else None,
        antenna_id=antenna_id,
    )


def threshold_mask(rdm: RangeDopplerMap, threshold_db: float) -> RangeDopplerMap:
    """Floor every cell below threshold_db at threshold_db."""
    if not np.isfinite(threshold_db):
        raise InvalidArgument("threshold_db must be finite")
    return RangeDopplerMap(
        values_db=np.maximum(rdm.values_db, threshold_db),
        threshold_db=float(threshold_db),
        config=rdm.config,
        antenna_id=rdm.antenna_id,
    )


def to_image(
    rdm: RangeDopplerMap,
    floor_db: float = DEFAULT_FLOOR_DB,
    ceiling_db: float = DEFAULT_CEILING_DB,
) -> ImageGrid:
    """Affinely map [floor_db, ceiling_db] to [0, 1], clamping outside."""
    if ceiling_db <= floor_db:
        raise InvalidArgument(f"ceiling_db ({ceiling_db}) must exceed floor_db ({floor_db})")
    pixels = np.clip((rdm.values_db - floor_db) / (ceiling_db - floor_db), 0.0, 1.0)
    return ImageGrid(
        pixels=pixels,
        source_floor_db=float(floor_db),
        source_ceiling_db=float(ceiling_db),
        config=rdm.config,
        antenna_id=rdm.antenna_id,
        threshold_db=rdm.threshold_db,
    )


def from_image(img: ImageGrid) -> RangeDopplerMap:
    """Exact affine inverse of to_image on unclamped cells."""
    if img.source_floor_db is None or img.source_ceiling_db is None:
        raise InvalidArgument("image carries no floor/ceiling metadata")
    span = img.source_ceiling_db - img.source_floor_db
    values_db = img.source_floor_db + np.asarray(img.pixels, dtype=np.float64) * span
    return RangeDopplerMap(
        values_db=values_db,
        threshold_db=img.threshold_db,
        config=img.config,
        antenna_id=img.antenna_id,
    )


# ---------------------------------------------------------------------------
# Persistence: RDM1 binary maps and PGM/PNG image export
# ---------------------------------------------------------------------------

_RDM1_MAGIC = b"RDM1"
_RDM1_HEADER = struct.Struct("<4sIIfi12x")  # magic, doppler, range, threshold, antenna; 32 bytes
assert _RDM1_HEADER.size == 32


def save_rdm(rdm: RangeDopplerMap, path) -> None:
    """Write the map as a 32-byte header plus little-endian float32 grid."""
    threshold = float("nan") if rdm.threshold_db is None else float(rdm.threshold_db)
    header = _RDM1_HEADER.pack(
        _RDM1_MAGIC, rdm.doppler_bins, rdm.range_bins, threshold, rdm.antenna_id
    )
    grid = rdm.values_db.astype("<f4").tobytes()
    Path(path).write_bytes(header + grid)


def load_rdm(path, config: RadarConfig | None = None) -> RangeDopplerMap:
    raw = Path(path).read_bytes()
    if len(raw) < _RDM1_HEADER.size:
        raise InvalidArgument(f"{path}: truncated RDM file")
    magic, n_dopp, n_range, threshold, antenna_id = _RDM1_HEADER.unpack_from(raw)
    if magic != _RDM1_MAGIC:
        raise InvalidArgument(f"{path}: bad magic {magic!r}")
    expected = _RDM1_HEADER.size + 4 * n_dopp * n_range
    if len(raw) != expected:
        raise InvalidArgument(f"{path}: expected {expected} bytes, found {len(raw)}")
    grid = np.frombuffer(raw, dtype="<f4", offset=_RDM1_HEADER.size).reshape(n_dopp, n_range)
    return RangeDopplerMap(
        values_db=grid.astype(np.float64),
        threshold_db=None if np.isnan(threshold) else float(threshold),
        config=config,
        antenna_id=antenna_id,
    )


def image_to_bytes(img: ImageGrid) -> np.ndarray:
    return np.round(np.clip(img.pixels, 0.0, 1.0) * 255.0).astype(np.uint8)


def save_pgm(img: ImageGrid, path) -> None:
    """Binary PGM (P5), maxval 255."""
    data = image_to_bytes(img)
    h, w = data.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode() + data.tobytes())


def load_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5":
        raise InvalidArgument(f"{path}: not a binary PGM")
    w, h = (int(v) for v in parts[1].split())
    maxval = int(parts[2])
    pixels = np.frombuffer(parts[3], dtype=np.uint8, count=w * h).reshape(h, w)
    return pixels.astype(np.float64) / maxval


def save_png(img: ImageGrid, path) -> None:
    from PIL import Image

    Image.fromarray(image_to_bytes(img), mode="L").save(Path(path), format="PNG")
