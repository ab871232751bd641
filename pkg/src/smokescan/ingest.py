"""Frame loading, ROI cropping, downsampling, and the rolling median background.

Frames arrive as individual PNG/JPEG files whose lexicographic filename order
is temporal order. All pipeline images are float64 RGB in [0, 1]; the
background image at frame t is the per-pixel, per-channel median of the most
recent ``window`` frames (the current frame included).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
from PIL import Image

from smokescan import kernels

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")


class ConfigurationError(ValueError):
    """Raised before any frame is yielded when the setup is invalid."""


class FrameLoadError(RuntimeError):
    """A specific frame failed to load or decode."""

    def __init__(self, index: int, path: Path, reason: str):
        super().__init__(f"frame {index} ({path.name}): {reason}")
        self.index = index
        self.path = path


@dataclass(frozen=True)
class RoiSpec:
    """Detection window in source-pixel coordinates plus downsample divisor."""

    x: int
    y: int
    width: int
    height: int
    downsample: int = 1

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise ConfigurationError("ROI corner must be nonnegative")
        if self.width <= 0 or self.height <= 0:
            raise ConfigurationError("ROI dimensions must be positive")
        if self.downsample <= 0:
            raise ConfigurationError("downsample factor must be positive")
        if self.width % self.downsample or self.height % self.downsample:
            raise ConfigurationError(
                f"ROI {self.width}x{self.height} not divisible by "
                f"downsample factor {self.downsample}"
            )

    @property
    def out_width(self) -> int:
        return self.width // self.downsample

    @property
    def out_height(self) -> int:
        return self.height // self.downsample

    def validate_against(self, src_width: int, src_height: int) -> None:
        if self.x + self.width > src_width or self.y + self.height > src_height:
            raise ConfigurationError(
                f"ROI ({self.x},{self.y},{self.width},{self.height}) outside "
                f"source image {src_width}x{src_height}"
            )


@dataclass(frozen=True)
class FrameBuffer:
    """One RGB frame with unit-range pixels, tagged with its sequence index."""

    pixels: np.ndarray  # (H, W, 3) float64 in [0, 1]
    index: int

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def to_unit_range(image: np.ndarray) -> np.ndarray:
    """Convert an 8-bit image to float64 in [0, 1] (divide by 255)."""
    return np.asarray(image, dtype=np.float64) / 255.0


def downsample(image: np.ndarray, factor: int, method: str = "block_mean") -> np.ndarray:
    """Shrink an image by an integer factor.

    ``block_mean`` averages each factor-by-factor block; ``nearest`` keeps the
    top-left pixel of each block. Dimensions must be divisible by the factor.
    """
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape[:2]
    if h % factor or w % factor:
        raise ValueError(f"image {w}x{h} not divisible by factor {factor}")
    if factor == 1:
        return img.copy()
    if method == "nearest":
        return img[::factor, ::factor].copy()
    if method != "block_mean":
        raise ValueError(f"unknown downsample method {method!r}")
    if img.ndim == 2:
        return img.reshape(h // factor, factor, w // factor, factor).mean(axis=(1, 3))
    return img.reshape(h // factor, factor, w // factor, factor, img.shape[2]).mean(
        axis=(1, 3)
    )


def list_frame_files(directory: Path) -> list[Path]:
    files = sorted(
        p
        for p in Path(directory).iterdir()
        if p.suffix.lower() in IMAGE_EXTENSIONS and p.is_file()
    )
    return files


def load_frame(
    path: Path, index: int, roi: RoiSpec, downsample_method: str = "block_mean"
) -> FrameBuffer:
    """Load one file, crop the ROI, downsample and normalize it."""
    try:
        with Image.open(path) as im:
            im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except Exception as exc:
        raise FrameLoadError(index, path, str(exc)) from exc
    roi.validate_against(arr.shape[1], arr.shape[0])
    crop = arr[roi.y : roi.y + roi.height, roi.x : roi.x + roi.width]
    pixels = downsample(to_unit_range(crop), roi.downsample, downsample_method)
    return FrameBuffer(pixels=pixels, index=index)


def load_sequence(
    directory: Path,
    roi: RoiSpec,
    start: int = 0,
    end: Optional[int] = None,
    downsample_method: str = "block_mean",
) -> Iterator[FrameBuffer]:
    """Yield ROI-cropped, downsampled, unit-range frames in index order.

    Frame index is the position in the lexicographically sorted file list.
    A missing or corrupt file raises FrameLoadError carrying its index; the
    ROI is validated against the first frame before any frame is yielded.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ConfigurationError(f"not a directory: {directory}")
    files = list_frame_files(directory)
    if not files:
        raise ConfigurationError(f"no image files in {directory}")
    if end is None:
        end = len(files)
    if start < 0 or start > end:
        raise ConfigurationError(f"bad frame range [{start}, {end})")
    end = min(end, len(files))

    # Validate the ROI eagerly so a bad window fails before iteration.
    with Image.open(files[0]) as im:
        roi.validate_against(im.size[0], im.size[1])

    for index in range(start, end):
        yield load_frame(files[index], index, roi, downsample_method)


class BackgroundModel:
    """Rolling per-pixel median over the most recent ``capacity`` frames.

    The window is FIFO in frame order; the background is defined only once
    the window is full. Even-sized windows use the mean of the two central
    order statistics. ``background`` returns an immutable snapshot safe to
    hand to parallel downstream stages.
    """

    def __init__(self, capacity: int = 60):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._window: deque[np.ndarray] = deque()
        self._shape: Optional[tuple] = None
        self._cached: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self._window)

    @property
    def ready(self) -> bool:
        return len(self._window) >= self.capacity

    def update(self, frame: FrameBuffer) -> None:
        pixels = frame.pixels
        if self._shape is None:
            self._shape = pixels.shape
        elif pixels.shape != self._shape:
            raise ValueError(
                f"frame shape {pixels.shape} does not match model {self._shape}"
            )
        self._window.append(pixels)
        if len(self._window) > self.capacity:
            self._window.popleft()
        self._cached = None

    def background(self) -> np.ndarray:
        if not self.ready:
            raise RuntimeError(
                f"background undefined: window holds {len(self._window)} of "
                f"{self.capacity} frames"
            )
        if self._cached is None:
            stack = np.stack(self._window, axis=0)
            med = kernels.median_stack(stack)
            med.setflags(write=False)
            self._cached = med
        return self._cached
