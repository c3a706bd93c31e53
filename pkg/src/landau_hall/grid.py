"""Rectangular grids, sampled states and their on-disk container."""

from __future__ import annotations

import json
import math
import os
import struct
import tempfile
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import LandauError, ParameterError
from .params import PhysicalParams

MIN_POINTS = 16
CONTAINMENT = 8.0
EXPANDED = 10.0


class ContainmentWarning(UserWarning):
    """The grid was expanded because it did not hold the envelope."""


@dataclass(frozen=True)
class GridSpec:
    """Cell-centred-free uniform grid: ``x_i = x_min + i*h_x`` for ``i < n_x``."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    n_x: int
    n_y: int
    periodic_x: bool = True
    periodic_y: bool = True

    def __post_init__(self):
        if self.n_x < MIN_POINTS or self.n_y < MIN_POINTS:
            raise ParameterError(f"grid needs at least {MIN_POINTS} points per axis")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ParameterError("grid extents must be increasing")

    @property
    def h_x(self) -> float:
        return (self.x_max - self.x_min) / self.n_x

    @property
    def h_y(self) -> float:
        return (self.y_max - self.y_min) / self.n_y

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_x, self.n_y)

    @property
    def cell_area(self) -> float:
        return self.h_x * self.h_y

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.h_x * np.arange(self.n_x)

    @property
    def y(self) -> np.ndarray:
        return self.y_min + self.h_y * np.arange(self.n_y)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Broadcastable coordinate columns, ``X`` of shape (n_x, 1) and ``Y`` of shape (1, n_y)."""
        return self.x[:, None], self.y[None, :]

    def kx(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.n_x, d=self.h_x)

    def ky(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.n_y, d=self.h_y)

    @classmethod
    def centered(cls, center_x, center_y, width_x, width_y, n_x, n_y, periodic_x=True, periodic_y=True):
        return cls(
            center_x - width_x / 2, center_x + width_x / 2,
            center_y - width_y / 2, center_y + width_y / 2,
            n_x, n_y, periodic_x, periodic_y,
        )

    @classmethod
    def torus(cls, params: PhysicalParams, n_x: int = 512, n_y: int | None = None,
              center: tuple[float, float] = (0.0, 0.0)) -> "GridSpec":
        """Doubly periodic grid carrying exactly ``n_x`` flux quanta.

        Spacings are equal and satisfy ``h_x * L_y * m|w|/hbar = 2 pi``, so
        the y-plane waves ``exp(-i m w u y / hbar)`` of the x-confined
        families are grid Fourier modes whenever ``u`` is a multiple of
        ``h_x``; centring the grid on the envelope guarantees that.
        Symmetrically x-plane waves with ``delta_y`` a multiple of
        ``L_y / n_x`` are exact.
        """
        n_y = n_x if n_y is None else n_y
        h = math.sqrt(2.0 * math.pi / (n_y * params.inv_length_sq))
        return cls.centered(center[0], center[1], n_x * h, n_y * h, n_x, n_y, True, True)

    def contains(self, axis: str, center: float, margin: float) -> bool:
        lo, hi = (self.x_min, self.x_max) if axis == "x" else (self.y_min, self.y_max)
        return lo <= center - margin and center + margin <= hi

    def ensure_containment(self, axis: str, center: float, length: float) -> "GridSpec":
        """Return a grid holding ``center +- 8 length``; expand to ``+- 10 length`` with a warning otherwise."""
        if self.contains(axis, center, CONTAINMENT * length):
            return self
        half = EXPANDED * length
        warnings.warn(
            f"grid does not contain the envelope center {center:.4g} +- {CONTAINMENT:g} "
            f"magnetic lengths along {axis}; expanding to +- {EXPANDED:g}",
            ContainmentWarning,
            stacklevel=3,
        )
        if axis == "x":
            lo, hi = min(self.x_min, center - half), max(self.x_max, center + half)
            return replace(self, x_min=lo, x_max=hi)
        lo, hi = min(self.y_min, center - half), max(self.y_max, center + half)
        return replace(self, y_min=lo, y_max=hi)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SampledState:
    """Complex amplitudes on a grid at time ``t``.

    ``ky_offset`` records a gauge: the physical wavefunction is
    ``amplitudes * exp(i * ky_offset * y)``. It is 0 for states in the
    scalar-potential gauge and grows as ``q E t / hbar`` inside the
    evolver, which carries the electric field as a vector potential so
    that y-delocalised states stay periodic.
    """

    grid: GridSpec
    t: float
    amplitudes: np.ndarray
    params: PhysicalParams | None = None
    ky_offset: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != self.grid.shape:
            raise ParameterError(
                f"amplitudes shape {self.amplitudes.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.amplitudes)):
            raise ParameterError("sampled state contains NaN or Inf")

    def with_amplitudes(self, amplitudes: np.ndarray) -> "SampledState":
        return SampledState(self.grid, self.t, amplitudes, self.params, self.ky_offset, dict(self.meta))

    def norm(self) -> float:
        return float(math.sqrt(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.cell_area))

    def physical_amplitudes(self) -> np.ndarray:
        if self.ky_offset == 0.0:
            return self.amplitudes
        return self.amplitudes * np.exp(1j * self.ky_offset * self.grid.y)[None, :]

    def probability(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def inner(a: np.ndarray, b: np.ndarray, grid: GridSpec) -> complex:
    """Discrete <a, b> (antilinear in ``a``)."""
    return complex(np.vdot(a, b) * grid.cell_area)


def window_norm(a: np.ndarray, grid: GridSpec) -> float:
    return float(math.sqrt(np.sum(np.abs(a) ** 2) * grid.cell_area))


# -- container ---------------------------------------------------------------

MAGIC = b"LANDAU-STATE\x00v1\n"
FORMAT_VERSION = 1


def write_state(path, state: SampledState) -> None:
    """Write ``state`` as MAGIC, a length-prefixed JSON header and raw little-endian float64 pairs.

    The amplitudes are stored row-major (x index slowest) with real and
    imaginary parts interleaved. The write goes through a temporary file
    and an atomic rename.
    """
    header = {
        "format_version": FORMAT_VERSION,
        "grid": state.grid.to_dict(),
        "t": state.t,
        "ky_offset": state.ky_offset,
        "params": state.params.to_dict() if state.params is not None else None,
        "shape": list(state.grid.shape),
        "dtype": "<f8",
        "layout": "row-major, (re, im) interleaved",
        "meta": state.meta,
    }
    blob = json.dumps(header, sort_keys=True).encode()
    data = np.ascontiguousarray(state.amplitudes).view(np.float64).astype("<f8", copy=False)
    payload = MAGIC + struct.pack("<Q", len(blob)) + blob + data.tobytes()
    atomic_write_bytes(Path(path), payload)


def read_state(path) -> SampledState:
    raw = Path(path).read_bytes()
    if not raw.startswith(MAGIC):
        raise LandauError(f"{path}: not a sampled-state container")
    offset = len(MAGIC)
    (length,) = struct.unpack_from("<Q", raw, offset)
    offset += 8
    header = json.loads(raw[offset:offset + length])
    offset += length
    if header.get("format_version") != FORMAT_VERSION:
        raise LandauError(f"{path}: unsupported format version {header.get('format_version')}")
    grid = GridSpec(**header["grid"])
    values = np.frombuffer(raw, dtype="<f8", offset=offset)
    if values.size != 2 * grid.n_x * grid.n_y:
        raise LandauError(f"{path}: payload size does not match header")
    amplitudes = values.astype(np.float64).view(np.complex128).reshape(grid.shape)
    params = PhysicalParams(**header["params"]) if header["params"] is not None else None
    return SampledState(grid, header["t"], amplitudes.copy(), params, header["ky_offset"], header["meta"])


def atomic_write_bytes(path: Path, payload: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(Path(path), text.encode())
