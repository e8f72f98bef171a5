"""Synthetic data: a teacher ReLU network and the grid-of-disks mixture.

Samplers take a ``numpy.random.Generator``; helpers that take an integer seed
split it into independent substreams with ``SeedSequence``.
"""
import csv
from dataclasses import dataclass, field

import numpy as np

from .losses import Dataset
from .model import sphere_directions


def substreams(seed, count):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


@dataclass
class TeacherNetwork:
    """y = sum_j theta2[j] * max(theta1[:, j] . x, 0), no 1/m0 factor; x ~ N(0, I_d)."""

    theta1: np.ndarray  # (d, m0)
    theta2: np.ndarray  # (m0,)

    @property
    def d(self):
        return self.theta1.shape[0]

    @property
    def m0(self):
        return self.theta1.shape[1]

    def __call__(self, X):
        return np.maximum(np.atleast_2d(X) @ self.theta1, 0.0) @ self.theta2

    def sample(self, n, rng):
        X = rng.standard_normal((n, self.d))
        return Dataset(X, self(X))


def make_teacher(d, m0, seed, weight_law="sphere_sign"):
    """Teacher with unit input directions and output weights drawn from ``weight_law``.

    ``sphere_sign``: outputs uniform in {-1, +1}; ``sphere_gauss``: outputs N(0, 1);
    ``sphere_plus``: all outputs +1.
    """
    if m0 < 1:
        raise ValueError("teacher needs m0 >= 1")
    r_in, r_out = substreams(seed, 2)
    theta1 = sphere_directions(r_in, m0, d).T.copy()
    if weight_law == "sphere_sign":
        theta2 = r_out.choice(np.array([-1.0, 1.0]), size=m0)
    elif weight_law == "sphere_gauss":
        theta2 = r_out.standard_normal(m0)
    elif weight_law == "sphere_plus":
        theta2 = np.ones(m0)
    else:
        raise ValueError(f"unknown weight law {weight_law!r}")
    return TeacherNetwork(theta1, theta2)


def sample_teacher(teacher, n, seed):
    if n < 1:
        raise ValueError("n must be >= 1")
    return teacher.sample(n, np.random.default_rng(seed))


@dataclass
class ClusterDistribution:
    """k^2 disks of radius 1/(3k-1) on a grid of step 3/(3k-1) inside [-1/2, 1/2]^2.

    Coordinates beyond the second are uniform on [-1/2, 1/2]. ``labels[c]`` is
    the class of cluster ``c`` (row-major over the grid).
    """

    k: int
    d: int
    labels: np.ndarray
    bias: bool = False  # append a constant 1 coordinate to every input
    centers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.k < 1 or self.d < 2:
            raise ValueError("need k >= 1 and d >= 2")
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if self.labels.shape != (self.k * self.k,):
            raise ValueError("need one label per cluster")
        ticks = -0.5 + self.radius + self.step * np.arange(self.k)
        gx, gy = np.meshgrid(ticks, ticks, indexing="ij")
        self.centers = np.column_stack([gx.ravel(), gy.ravel()])

    @property
    def radius(self):
        return 1.0 / (3 * self.k - 1)

    @property
    def step(self):
        return 3.0 / (3 * self.k - 1)

    @property
    def n_clusters(self):
        return self.k * self.k

    @property
    def input_dim(self):
        return self.d + int(self.bias)

    def sample_with_clusters(self, n, rng):
        c = rng.integers(0, self.n_clusters, size=n)
        # uniform in a disk: sqrt of a uniform radius fraction
        rad = self.radius * np.sqrt(rng.random(n))
        ang = 2.0 * np.pi * rng.random(n)
        X = np.empty((n, self.d))
        X[:, 0] = self.centers[c, 0] + rad * np.cos(ang)
        X[:, 1] = self.centers[c, 1] + rad * np.sin(ang)
        if self.d > 2:
            X[:, 2:] = rng.random((n, self.d - 2)) - 0.5
        if self.bias:
            X = np.column_stack([X, np.ones(n)])
        return Dataset(X, self.labels[c]), c

    def sample(self, n, rng):
        return self.sample_with_clusters(n, rng)[0]


def make_clusters(k, d, seed, bias=False):
    """Cluster mixture whose classes are fair coin flips per cluster."""
    rng = np.random.default_rng(seed)
    labels = rng.choice(np.array([-1.0, 1.0]), size=k * k)
    return ClusterDistribution(k, d, labels, bias=bias)


def sample_clusters(dist, n, seed):
    if n < 1:
        raise ValueError("n must be >= 1")
    return dist.sample(n, np.random.default_rng(seed))


class FiniteDistribution:
    """Cycles through a fixed dataset in order, ``batch`` rows at a time."""

    def __init__(self, ds):
        self.ds = ds
        self._pos = 0

    def sample(self, n, rng=None):
        idx = (self._pos + np.arange(n)) % self.ds.n
        self._pos = int((self._pos + n) % self.ds.n)
        return self.ds.subset(idx)


def write_dataset_csv(ds, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x_{k + 1}" for k in range(ds.d)] + ["y"])
        for x, y in zip(ds.xs, ds.ys):
            w.writerow([repr(float(v)) for v in x] + [repr(float(y))])


def read_dataset_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[-1] != "y" or any(h != f"x_{k + 1}" for k, h in enumerate(header[:-1])):
        raise ValueError(f"unexpected dataset header {header}")
    arr = np.array(body, dtype=np.float64).reshape(len(body), len(header))
    return Dataset(arr[:, :-1], arr[:, -1])
