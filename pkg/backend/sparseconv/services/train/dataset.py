"""
Seeded synthetic classification data: oriented sinusoidal gratings.
"""
from dataclasses import dataclass

import numpy as np

from sparseconv.errors import ModelInputError


@dataclass(frozen=True)
class Dataset:
    images: np.ndarray  # (n, 1, size, size) float32
    labels: np.ndarray  # (n,) int64
    classes: int

    def __len__(self) -> int:
        return self.labels.shape[0]


def synth_dataset(seed: int, n_samples: int, classes: int = 4, *,
                  size: int = 12, period: float = 4.0, noise: float = 0.3,
                  constant: bool = False) -> Dataset:
    """
    Class k is a grating at angle k*pi/classes with random phase plus
    Gaussian noise; the phase makes the classes not linearly separable in
    pixel space. ``constant`` returns the same flat image for every label.
    """
    if n_samples < 1 or classes < 2 or size < 3:
        raise ModelInputError("need n_samples >= 1, classes >= 2 and size >= 3")
    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(n_samples) % classes).astype(np.int64)

    if constant:
        images = np.full((n_samples, 1, size, size), 0.5, dtype=np.float32)
        return Dataset(images, labels, classes)

    coords = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    theta = labels * np.pi / classes
    phase = rng.uniform(0.0, 2.0 * np.pi, size=n_samples)
    projection = np.cos(theta)[:, None, None] * xx + np.sin(theta)[:, None, None] * yy
    waves = np.sin(2.0 * np.pi * projection / period + phase[:, None, None])
    waves += noise * rng.standard_normal(waves.shape)
    return Dataset(waves[:, None].astype(np.float32), labels, classes)
