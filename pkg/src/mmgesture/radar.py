"""FMCW radar front-end simulation for hand-gesture captures.

Synthesizes raw dechirped IQ frames for point-scatterer hand trajectories,
standing in for a physical 57.5-63.5 GHz sensor. The beat model is the ideal
stop-and-hop approximation: per chirp a complex exponential at the beat
frequency set by target range, with a chirp-to-chirp phase increment set by
radial velocity, plus circular complex Gaussian receiver noise whose level
and spectral tilt differ per antenna.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np

from .errors import InvalidArgument

SPEED_OF_LIGHT = 3.0e8  # m/s

# Complex noise std that puts the median Hann-windowed RDM noise cell near
# -90 dB at unit power scale and snr_db = 0 (see rdm.range_doppler).
BASE_NOISE_STD = 1.0e-4

# Wall-clock spacing between successive frames of a trajectory.
DEFAULT_FRAME_INTERVAL_S = 0.012


class GestureLabel(IntEnum):
    """Four-way hand gesture classes."""

    LEFT = 1
    RIGHT = 2
    AWAY = 3
    TOWARD = 4


@dataclass(frozen=True)
class RadarConfig:
    """Chirp/frame geometry of the simulated FMCW sensor."""

    f_low: float = 57.5e9
    f_high: float = 63.5e9
    samples_per_chirp: int = 64
    chirps_per_frame: int = 32
    chirp_duration: float = 200e-6
    sample_rate: float = 320e3
    max_range: float = 0.8
    n_antennas: int = 3

    def __post_init__(self):
        if self.f_high <= self.f_low:
            raise InvalidArgument(f"f_high ({self.f_high}) must exceed f_low ({self.f_low})")
        for name in ("samples_per_chirp", "chirps_per_frame"):
            n = getattr(self, name)
            if n < 2 or (n & (n - 1)) != 0:
                raise InvalidArgument(f"{name} must be a power of two >= 2, got {n}")
        if self.sample_rate * self.chirp_duration < self.samples_per_chirp:
            raise InvalidArgument(
                "sample_rate * chirp_duration must cover samples_per_chirp "
                f"({self.sample_rate * self.chirp_duration:.1f} < {self.samples_per_chirp})"
            )
        if self.max_range <= 0:
            raise InvalidArgument("max_range must be positive")
        if self.n_antennas < 1:
            raise InvalidArgument("n_antennas must be >= 1")

    @property
    def bandwidth(self) -> float:
        return self.f_high - self.f_low

    @property
    def center_frequency(self) -> float:
        return 0.5 * (self.f_low + self.f_high)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.center_frequency

    def beat_frequency(self, radial_range: float) -> float:
        """Beat frequency (Hz) of a scatterer at the given range."""
        return 2.0 * radial_range * self.bandwidth / (SPEED_OF_LIGHT * self.chirp_duration)

    @property
    def range_bin_spacing(self) -> float:
        """Range (m) covered by one FFT bin of the fast-time axis."""
        df = self.sample_rate / self.samples_per_chirp
        return df * SPEED_OF_LIGHT * self.chirp_duration / (2.0 * self.bandwidth)

    @property
    def velocity_bin_spacing(self) -> float:
        """Radial velocity (m/s) covered by one Doppler bin."""
        return self.wavelength / (2.0 * self.chirps_per_frame * self.chirp_duration)

    @property
    def max_unambiguous_velocity(self) -> float:
        return self.wavelength / (4.0 * self.chirp_duration)


_CONFIG_FIELD_TYPES = {
    "f_low": float,
    "f_high": float,
    "samples_per_chirp": int,
    "chirps_per_frame": int,
    "chirp_duration": float,
    "sample_rate": float,
    "max_range": float,
    "n_antennas": int,
}


def load_radar_config(path) -> RadarConfig:
    """Read a RadarConfig from a plain-text ``key=value`` file.

    Blank lines and lines starting with ``#`` are ignored. Unknown keys are
    rejected so typos cannot silently fall back to defaults.
    """
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidArgument(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_FIELD_TYPES:
            raise InvalidArgument(f"{path}:{lineno}: unknown radar config key {key!r}")
        try:
            values[key] = _CONFIG_FIELD_TYPES[key](val.strip())
        except ValueError as exc:
            raise InvalidArgument(f"{path}:{lineno}: bad value for {key}: {val.strip()!r}") from exc
    return RadarConfig(**values)


def save_radar_config(config: RadarConfig, path) -> None:
    lines = [f"{k}={getattr(config, k)}" for k in _CONFIG_FIELD_TYPES]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass
class ScattererTrack:
    """Hand-centroid trajectory for one gesture capture.

    positions[i] = (radial range m, cross-range m) at frame i. Radial range is
    the line-of-sight distance used by the beat model; cross-range is lateral
    bookkeeping that never reaches the RDM (a single radar has no angle axis)
    but makes Left/Right tracks mirrored and testable.
    """

    gesture: GestureLabel
    positions: np.ndarray  # (n_frames, 2)
    radial_velocities: np.ndarray  # (n_frames,)
    amplitudes: np.ndarray  # (n_frames,)
    seed: int

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        self.radial_velocities = np.asarray(self.radial_velocities, dtype=np.float64)
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.float64)
        n = len(self.positions)
        if self.radial_velocities.shape != (n,) or self.amplitudes.shape != (n,):
            raise InvalidArgument("positions, radial_velocities and amplitudes must share length")
        if np.any(self.amplitudes < 0):
            raise InvalidArgument("amplitudes must be >= 0")

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class AntennaNoiseProfile:
    """Receiver-noise character of one antenna."""

    antenna_id: int
    noise_power_scale: float  # linear power multiplier
    spectral_tilt: float  # dB per range-frequency bin
    seed_offset: int

    def __post_init__(self):
        if self.noise_power_scale < 0:
            raise InvalidArgument("noise_power_scale must be >= 0")
        if self.antenna_id < 0:
            raise InvalidArgument("antenna_id must be >= 0")


@dataclass
class ComplexFrame:
    """Raw dechirped IQ cube for one frame: [chirp][sample][antenna]."""

    data: np.ndarray
    config: RadarConfig

    def __post_init__(self):
        expected = (
            self.config.chirps_per_frame,
            self.config.samples_per_chirp,
            self.config.n_antennas,
        )
        if self.data.shape != expected:
            raise InvalidArgument(f"frame shape {self.data.shape} != config shape {expected}")
        if not np.all(np.isfinite(self.data.view(np.float64))):
            raise InvalidArgument("frame contains non-finite values")


def antenna_noise_profile(antenna_id: int, seed: int, config: RadarConfig | None = None) -> AntennaNoiseProfile:
    """Draw a reproducible noise profile for one antenna.

    Power scales are log-uniform in [0.5, 2.0]; the tilt shapes the noise
    spectrum across range bins by a few dB end to end.
    """
    if antenna_id < 0:
        raise InvalidArgument("antenna_id must be >= 0")
    if config is not None and antenna_id >= config.n_antennas:
        raise InvalidArgument(f"antenna_id {antenna_id} >= n_antennas {config.n_antennas}")
    rng = np.random.default_rng([seed, antenna_id])
    scale = math.exp(rng.uniform(math.log(0.5), math.log(2.0)))
    tilt = rng.uniform(-0.06, 0.06)
    offset = int(rng.integers(0, 2**31))
    return AntennaNoiseProfile(
        antenna_id=antenna_id,
        noise_power_scale=scale,
        spectral_tilt=tilt,
        seed_offset=offset,
    )


# Gesture kinematics. Toward/Away sweep the radial band, Left/Right arcs
# produce a sinusoidal radial-velocity signature (positive-then-negative for
# Left, mirrored for Right) whose magnitude stays well below the sweep band,
# so a single frame sampled during the arc's first half separates all four
# classes by signed Doppler.
SWEEP_SPEED_RANGE = (1.5, 2.4)  # m/s, Toward/Away
SWEEP_TRAVEL_RANGE = (0.28, 0.42)  # m before the hand stops
ARC_SPEED_RANGE = (0.55, 0.85)  # m/s peak radial speed, Left/Right
ARC_SWEEP_RANGE = (0.20, 0.35)  # m lateral travel, Left/Right
PEAK_DB_RANGE = (-82.0, -62.0)  # target RDM peak of the hand return


def gesture_trajectory(
    gesture: GestureLabel,
    config: RadarConfig,
    n_frames: int,
    seed: int,
    frame_interval: float = DEFAULT_FRAME_INTERVAL_S,
) -> ScattererTrack:
    """Generate a hand-centroid track for one gesture capture.

    Sign convention: positive radial velocity means range increasing
    (receding), so Toward tracks have negative mean radial velocity.
    """
    if n_frames < 2:
        raise InvalidArgument(f"n_frames must be >= 2, got {n_frames}")
    try:
        gesture = GestureLabel(gesture)
    except ValueError as exc:
        raise InvalidArgument(f"unknown gesture {gesture!r}") from exc

    rng = np.random.default_rng([int(seed), int(gesture)])
    dt = frame_interval
    idx = np.arange(n_frames, dtype=np.float64)

    if gesture in (GestureLabel.TOWARD, GestureLabel.AWAY):
        speed = rng.uniform(*SWEEP_SPEED_RANGE)
        travel = rng.uniform(*SWEEP_TRAVEL_RANGE)
        move_frames = min(n_frames - 1, max(1, int(travel / (speed * dt))))
        sign = 1.0 if gesture is GestureLabel.AWAY else -1.0
        v = np.where(idx < move_frames, sign * speed, 0.0)
        v += rng.normal(0.0, 0.02, size=n_frames)  # hand tremor
        if gesture is GestureLabel.TOWARD:
            r0 = rng.uniform(0.52, 0.72)
        else:
            r0 = rng.uniform(0.10, 0.26)
        cross0 = rng.uniform(-0.05, 0.05)
        cross = cross0 + np.cumsum(rng.normal(0.0, 0.002, size=n_frames)) - rng.normal(0.0, 0.002)
    else:
        peak_speed = rng.uniform(*ARC_SPEED_RANGE)
        sign = 1.0 if gesture is GestureLabel.LEFT else -1.0
        # Full sine period: Left recedes then approaches, Right mirrored.
        v = sign * peak_speed * np.sin(2.0 * np.pi * idx / (n_frames - 1))
        v += rng.normal(0.0, 0.02, size=n_frames)
        r0 = rng.uniform(0.30, 0.60)
        sweep = rng.uniform(*ARC_SWEEP_RANGE)
        # Left sweeps cross-range high-to-low, Right low-to-high.
        cross = sign * sweep * (0.5 - idx / (n_frames - 1))

    ranges = r0 + np.concatenate([[0.0], np.cumsum(v[:-1]) * dt])
    ranges = np.clip(ranges, 0.03, config.max_range * 0.97)

    peak_db = rng.uniform(*PEAK_DB_RANGE)
    base_amp = amplitude_for_peak_db(peak_db, config)
    amplitudes = base_amp * np.exp(rng.normal(0.0, 0.15, size=n_frames))

    positions = np.stack([ranges, cross], axis=1)
    return ScattererTrack(
        gesture=gesture,
        positions=positions,
        radial_velocities=v,
        amplitudes=amplitudes,
        seed=int(seed),
    )


def amplitude_for_peak_db(peak_db: float, config: RadarConfig) -> float:
    """Scatterer amplitude whose on-bin Hann-windowed RDM peak lands near peak_db.

    Coherent gain of the orthonormal 2D FFT with Hann windows on both axes is
    mean(w_r) * mean(w_d) * sqrt(N_s * N_c); off-bin scalloping can shave up
    to ~1.4 dB, which the jittered amplitudes dwarf anyway.
    """
    mean_wr = float(np.mean(np.hanning(config.samples_per_chirp)))
    mean_wd = float(np.mean(np.hanning(config.chirps_per_frame)))
    gain = mean_wr * mean_wd * math.sqrt(config.samples_per_chirp * config.chirps_per_frame)
    return 10.0 ** (peak_db / 20.0) / gain


def static_track(
    config: RadarConfig,
    n_frames: int,
    radial_range: float,
    velocity: float = 0.0,
    amplitude: float = 1.0,
    gesture: GestureLabel = GestureLabel.TOWARD,
    seed: int = 0,
) -> ScattererTrack:
    """Constant-state track: handy for oracles and for noise-only frames
    (amplitude 0)."""
    positions = np.stack(
        [np.full(n_frames, radial_range), np.zeros(n_frames)], axis=1
    )
    return ScattererTrack(
        gesture=gesture,
        positions=positions,
        radial_velocities=np.full(n_frames, velocity),
        amplitudes=np.full(n_frames, amplitude),
        seed=seed,
    )


def _scatterer_cluster(track: ScattererTrack, rng: np.random.Generator):
    """Split the hand blob into 1-3 point scatterers around the centroid."""
    k = int(rng.integers(1, 4))
    dr = rng.uniform(-0.03, 0.03, size=k)
    dv = rng.uniform(-0.12, 0.12, size=k)
    weights = rng.uniform(0.6, 1.0, size=k)
    weights /= weights.sum()
    phases = rng.uniform(0.0, 2.0 * np.pi, size=k)
    if k == 1:
        dr[:] = 0.0
        dv[:] = 0.0
    return dr, dv, weights, phases


def synthesize_frame(
    track: ScattererTrack,
    frame_idx: int,
    config: RadarConfig,
    profile: AntennaNoiseProfile,
    snr_db: float,
    seed: int,
    noise_scale: float = 1.0,
) -> ComplexFrame:
    """Build one dechirped IQ frame from the track state at frame_idx.

    snr_db moves the noise floor relative to the -90 dB reference (higher
    snr_db = quieter noise); noise_scale = 0 disables noise entirely, e.g.
    for ground-truth captures.
    """
    if frame_idx < 0 or frame_idx >= len(track):
        raise InvalidArgument(f"frame_idx {frame_idx} out of range for track of {len(track)} frames")
    if not math.isfinite(snr_db):
        raise InvalidArgument("snr_db must be finite")

    n_c = config.chirps_per_frame
    n_s = config.samples_per_chirp
    n_a = config.n_antennas

    r_c = float(track.positions[frame_idx, 0])
    v_c = float(track.radial_velocities[frame_idx])
    a_c = float(track.amplitudes[frame_idx])

    cluster_rng = np.random.default_rng([track.seed, 0x5CA7])
    dr, dv, weights, phases = _scatterer_cluster(track, cluster_rng)

    t = np.arange(n_s) / config.sample_rate  # fast time within a chirp
    m = np.arange(n_c)[:, None]  # chirp index

    signal = np.zeros((n_c, n_s), dtype=np.complex128)
    if a_c > 0.0:
        for j in range(len(weights)):
            rj = float(np.clip(r_c + dr[j], 0.01, config.max_range * 0.99))
            vj = v_c + dv[j]
            f_beat = config.beat_frequency(rj)
            # Approaching targets (v < 0) land on positive Doppler bins.
            dphi = -4.0 * np.pi * vj * config.center_frequency * config.chirp_duration / SPEED_OF_LIGHT
            signal += (a_c * weights[j]) * np.exp(
                1j * (2.0 * np.pi * f_beat * t[None, :] + dphi * m + phases[j])
            )

    data = np.empty((n_c, n_s, n_a), dtype=np.complex128)
    sigma = BASE_NOISE_STD * math.sqrt(profile.noise_power_scale) * 10.0 ** (-snr_db / 20.0) * noise_scale
    noise_rng = np.random.default_rng([int(seed), profile.seed_offset])
    ant_phase = np.exp(1j * 2.0 * np.pi * profile.antenna_id / max(1, n_a))
    for a in range(n_a):
        chan = signal * ant_phase
        if sigma > 0.0:
            white = noise_rng.normal(size=(n_c, n_s)) + 1j * noise_rng.normal(size=(n_c, n_s))
            white *= sigma / math.sqrt(2.0)
            chan = chan + _tilt_noise(white, profile.spectral_tilt)
        data[:, :, a] = chan
    return ComplexFrame(data=data, config=config)


def _tilt_noise(white: np.ndarray, tilt_db_per_bin: float) -> np.ndarray:
    """Shape white noise so its range spectrum slopes by tilt dB per bin.

    The gain curve is mirrored across the Nyquist bin and RMS-normalized so
    the total noise power is tilt-independent.
    """
    if tilt_db_per_bin == 0.0:
        return white
    n_s = white.shape[1]
    bins = np.minimum(np.arange(n_s), n_s - np.arange(n_s))
    gain = 10.0 ** (tilt_db_per_bin * bins / 20.0)
    gain /= math.sqrt(float(np.mean(gain**2)))
    spectrum = np.fft.fft(white, axis=1, norm="ortho") * gain[None, :]
    return np.fft.ifft(spectrum, axis=1, norm="ortho")
