"""Deterministic point-set generators for demos and benchmarks."""

import numpy as np

KINDS = ("circle", "noisy_circle", "star", "from_file")


def _circle(n_points, radius=0.4, center=(0.5, 0.5)):
    ang = 2.0 * np.pi * np.arange(n_points) / n_points
    return np.array(center) + radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)


def _star(n_points, spikes=5, outer=0.45, inner=0.18, center=(0.5, 0.5)):
    """Closed star polyline sampled uniformly by arc length."""
    k = 2 * spikes
    ang = 2.0 * np.pi * np.arange(k) / k + np.pi / 2.0
    radii = np.where(np.arange(k) % 2 == 0, outer, inner)
    verts = np.array(center) + radii[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    verts = np.vstack([verts, verts[0]])
    seg = np.diff(verts, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]
    s = total * np.arange(n_points) / n_points
    i = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(seg) - 1)
    frac = (s - cum[i]) / seg_len[i]
    return verts[i] + frac[:, None] * seg[i]


def generate_shape(kind: str, n_points: int, noise_sigma: float = 0.0,
                   rng_seed: int = 0, path=None) -> np.ndarray:
    """Point set for the named shape; deterministic given rng_seed."""
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    if kind == "circle":
        pts = _circle(n_points)
    elif kind == "noisy_circle":
        pts = _circle(n_points)
        if noise_sigma == 0.0:
            noise_sigma = 0.01
    elif kind == "star":
        pts = _star(n_points)
    elif kind == "from_file":
        from .textio import read_points

        if path is None:
            raise ValueError("kind 'from_file' requires a path")
        return read_points(path)
    else:
        raise ValueError(f"unknown shape kind {kind!r}; expected one of {KINDS}")
    if noise_sigma > 0.0:
        rng = np.random.default_rng(rng_seed)
        pts = pts + rng.normal(0.0, noise_sigma, size=pts.shape)
    return pts
