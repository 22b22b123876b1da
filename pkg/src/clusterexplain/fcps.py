"""Seeded generators for FCPS-like labeled benchmark shapes.

These reproduce the qualitative geometry of the nine Fundamental Clustering
Problems Suite datasets, not their exact point lists. Output is raw
(unstandardized) coordinates with 1-based labels.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import Dataset, split_sizes
from .errors import InvalidSpec


class FcpsShape(enum.Enum):
    ATOM = "Atom"
    CHAINLINK = "Chainlink"
    ENGYTIME = "EngyTime"
    HEPTA = "Hepta"
    LSUN = "Lsun"
    TARGET = "Target"
    TETRA = "Tetra"
    TWODIAMONDS = "TwoDiamonds"
    WINGNUT = "WingNut"

    @classmethod
    def parse(cls, name) -> "FcpsShape":
        if isinstance(name, cls):
            return name
        key = str(name).lower().replace("-like", "").replace("_", "")
        for s in cls:
            if s.value.lower() == key:
                return s
        raise InvalidSpec(f"unknown shape {name!r}; choose from {[s.value for s in cls]}")

    @property
    def dim(self) -> int:
        return _CATALOG[self][0]

    @property
    def n_clusters(self) -> int:
        return _CATALOG[self][1]

    @property
    def default_n(self) -> int:
        return 800 if self.dim == 2 else 600


_CATALOG = {
    FcpsShape.ATOM: (3, 2),
    FcpsShape.CHAINLINK: (3, 2),
    FcpsShape.ENGYTIME: (2, 2),
    FcpsShape.HEPTA: (3, 7),
    FcpsShape.LSUN: (2, 3),
    FcpsShape.TARGET: (2, 2),
    FcpsShape.TETRA: (3, 4),
    FcpsShape.TWODIAMONDS: (2, 2),
    FcpsShape.WINGNUT: (2, 2),
}


@dataclass(frozen=True)
class GenSpec:
    shape: FcpsShape
    n: Optional[int] = None
    seed: int = 0
    noise: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "shape", FcpsShape.parse(self.shape))
        if self.n is None:
            object.__setattr__(self, "n", self.shape.default_n)
        if int(self.n) < 2 * self.shape.n_clusters:
            raise InvalidSpec(f"{self.shape.value} needs n >= {2 * self.shape.n_clusters}, got {self.n}")
        if not self.noise >= 0:
            raise InvalidSpec("noise must be non-negative")
        if int(self.seed) < 0:
            raise InvalidSpec("seed must be non-negative")


def shape_catalog() -> list:
    """``(shape, dimensionality, true cluster count)`` for all nine shapes."""
    return [(s, s.dim, s.n_clusters) for s in FcpsShape]


def _balanced(n, c):
    return split_sizes(n, [1.0 / c] * c)


def _ball(rng, m, dim, radius=1.0):
    v = rng.standard_normal((m, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * radius * rng.uniform(size=(m, 1)) ** (1.0 / dim)


def _sphere(rng, m, r_in, r_out):
    v = rng.standard_normal((m, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = (rng.uniform(r_in ** 3, r_out ** 3, size=(m, 1))) ** (1.0 / 3.0)
    return v * r


def _two_diamonds(rng, n):
    parts = []
    for centre, m in zip((-1.5, 1.5), _balanced(n, 2)):
        a, b = rng.uniform(-1, 1, size=(2, m))
        parts.append(np.column_stack([centre + (a + b) / 2, (a - b) / 2]))
    return parts


def _wingnut(rng, n):
    # Two 2 x 2 rectangles either side of a gap at x1 = 0, each denser
    # towards the gap; x2 has the same distribution in both.
    parts = []
    for side, m in zip((-1, 1), _balanced(n, 2)):
        depth = 2.0 * (1.0 - np.sqrt(1.0 - rng.uniform(size=m)))
        parts.append(np.column_stack([side * (0.2 + depth), rng.uniform(0, 2, size=m)]))
    return parts


def _engytime(rng, n):
    m1, m2 = _balanced(n, 2)
    a = rng.multivariate_normal([-1.0, -1.5], [[1.0, 0.2], [0.2, 0.6]], size=m1)
    b = rng.multivariate_normal([1.0, 1.5], [[0.6, -0.2], [-0.2, 1.0]], size=m2)
    return [a, b]


def _lsun(rng, n):
    m1, m2, m3 = _balanced(n, 3)
    # L: a 4 x 1 horizontal bar and a 1 x 4 vertical bar sharing a corner.
    horiz = rng.uniform(size=m1) < 4.0 / 7.0
    u, v = rng.uniform(size=(2, m1))
    L = np.where(horiz[:, None], np.column_stack([4 * u, v]), np.column_stack([u, 1 + 3 * v]))
    b2 = rng.standard_normal((m2, 2)) * [0.5, 0.3] + [3.5, 3.0]
    b3 = rng.standard_normal((m3, 2)) * [0.3, 0.5] + [6.0, 5.0]
    return [L, b2, b3]


def _target(rng, n):
    # Ring (with outliers) outnumbers the core 3:1.
    core_n, ring_n = split_sizes(n, [0.25, 0.75])
    core = rng.standard_normal((core_n, 2)) * 0.3
    n_out = max(4, ring_n // 20)
    n_ann = ring_n - n_out
    theta = rng.uniform(0, 2 * np.pi, size=n_ann)
    r = rng.uniform(2.0, 2.5, size=n_ann)
    annulus = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    corners = np.array([[-4.0, -4.0], [-4.0, 4.0], [4.0, -4.0], [4.0, 4.0]])
    outliers = corners[np.arange(n_out) % 4] + rng.standard_normal((n_out, 2)) * 0.3
    return [core, np.vstack([annulus, outliers])]


def _atom(rng, n):
    # Shell outnumbers the core 3:1, as for Target.
    core_n, shell_n = split_sizes(n, [0.25, 0.75])
    return [_ball(rng, core_n, 3, 0.3), _sphere(rng, shell_n, 2.5, 3.0)]


def _rotation(a, b, c):
    """Rotation by Euler angles (degrees) about x1, then x2, then x3."""
    a, b, c = np.radians([a, b, c])
    rx = np.array([[1, 0, 0], [0, np.cos(a), -np.sin(a)], [0, np.sin(a), np.cos(a)]])
    ry = np.array([[np.cos(b), 0, np.sin(b)], [0, 1, 0], [-np.sin(b), 0, np.cos(b)]])
    rz = np.array([[np.cos(c), -np.sin(c), 0], [np.sin(c), np.cos(c), 0], [0, 0, 1]])
    return rz @ ry @ rx


# Tilts the Hepta frame off the coordinate axes so every single coordinate
# separates every outer blob from the centre one.
_TILT = _rotation(45.0, 20.0, 45.0)


def _torus(rng, m, radius=1.0, tube=0.1):
    theta = rng.uniform(0, 2 * np.pi, size=m)
    phi = rng.uniform(0, 2 * np.pi, size=m)
    rho = tube * np.sqrt(rng.uniform(size=m))
    ring = radius + rho * np.cos(phi)
    return np.column_stack([ring * np.cos(theta), ring * np.sin(theta), rho * np.sin(phi)])


def _chainlink(rng, n):
    m1, m2 = _balanced(n, 2)
    a = _torus(rng, m1)
    b = _torus(rng, m2)
    # Second ring in the x1-x3 plane, threaded through the first.
    b = np.column_stack([b[:, 0] + 1.0, b[:, 2], b[:, 1]])
    return [a, b]


def _hepta(rng, n):
    centres = np.vstack([np.zeros(3), 3 * np.eye(3), -3 * np.eye(3)]) @ _TILT.T
    return [c + 0.3 * rng.standard_normal((m, 3)) for c, m in zip(centres, _balanced(n, 7))]


def _tetra(rng, n):
    vertices = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    vertices /= np.sqrt(3.0)  # unit circumradius
    return [v + 0.15 * rng.standard_normal((m, 3)) for v, m in zip(vertices, _balanced(n, 4))]


_GENERATORS = {
    FcpsShape.ATOM: _atom,
    FcpsShape.CHAINLINK: _chainlink,
    FcpsShape.ENGYTIME: _engytime,
    FcpsShape.HEPTA: _hepta,
    FcpsShape.LSUN: _lsun,
    FcpsShape.TARGET: _target,
    FcpsShape.TETRA: _tetra,
    FcpsShape.TWODIAMONDS: _two_diamonds,
    FcpsShape.WINGNUT: _wingnut,
}


def generate(spec: GenSpec) -> Dataset:
    """Sample a labeled dataset; rows are shuffled, labels run 1..C."""
    rng = np.random.default_rng(spec.seed)
    parts = _GENERATORS[spec.shape](rng, int(spec.n))
    X = np.vstack(parts)
    y = np.concatenate([np.full(len(p), c + 1) for c, p in enumerate(parts)])
    order = rng.permutation(len(X))
    if spec.noise > 0:
        X = X + spec.noise * rng.standard_normal(X.shape)
    names = [f"X{k + 1}" for k in range(X.shape[1])]
    return Dataset(X[order], names, labels=y[order])
