"""Discretize integral kernels into operators between quadrature-weighted spaces.

A kernel ``G(x2; x1)`` maps source functions on one interval to fields on
another. On quadrature grids with weights ``w1`` (source) and ``w2``
(receiver) the stored matrix entry is ``sqrt(w2_j) G(x2_j; x1_k) sqrt(w1_k)``:
the matrix in orthonormal-basis coordinates of the two weighted spaces, whose
squared Hilbert-Schmidt norm is exactly the double quadrature of ``|G|^2``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .operators import OperatorMatrix
from .spaces import SpaceHandle, as_matrix

RULES = ("midpoint", "trapezoid")
FILE_MAGIC = "KERNEL v1"


class KernelFileError(ValueError):
    """Base class for kernel-sample file problems."""


class MalformedHeaderError(KernelFileError):
    pass


class ShapeMismatchError(KernelFileError):
    pass


class OverlapError(ValueError):
    """Source and receiver intervals touch or overlap for a singular kernel."""


@dataclass(frozen=True)
class GridSpec:
    lower: float
    upper: float
    points: int
    rule: str = "midpoint"

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ValueError("grid bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"grid lower bound {self.lower} must be below upper bound {self.upper}")
        if self.rule not in RULES:
            raise ValueError(f"unknown quadrature rule {self.rule!r}; choose from {', '.join(RULES)}")
        if int(self.points) != self.points or self.points < 1:
            raise ValueError(f"points must be a positive integer, got {self.points}")
        if self.rule == "trapezoid" and self.points < 2:
            raise ValueError("trapezoid rule needs at least 2 points")
        object.__setattr__(self, "points", int(self.points))
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))

    def nodes(self) -> np.ndarray:
        if self.rule == "midpoint":
            h = (self.upper - self.lower) / self.points
            return self.lower + h * (np.arange(self.points) + 0.5)
        return np.linspace(self.lower, self.upper, self.points)

    def weights(self) -> np.ndarray:
        if self.rule == "midpoint":
            return np.full(self.points, (self.upper - self.lower) / self.points)
        h = (self.upper - self.lower) / (self.points - 1)
        w = np.full(self.points, h)
        w[0] = w[-1] = h / 2
        return w


@dataclass(frozen=True)
class Helmholtz1D:
    wavenumber: float

    def __post_init__(self):
        if not (np.isfinite(self.wavenumber) and self.wavenumber > 0):
            raise ValueError(f"wavenumber must be positive and finite, got {self.wavenumber}")


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Kernel samples ``G(row node j; col node k)`` on two grids."""

    samples: np.ndarray
    row_grid: GridSpec
    col_grid: GridSpec

    def __post_init__(self):
        s = as_matrix(self.samples, "samples").copy()
        if s.shape != (self.row_grid.points, self.col_grid.points):
            raise ShapeMismatchError(f"samples of shape {s.shape} do not match grids of "
                                     f"{self.row_grid.points} x {self.col_grid.points} points")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)


KernelSpec = Helmholtz1D | Tabulated


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    op: OperatorMatrix
    source_space: SpaceHandle
    receiver_space: SpaceHandle
    source_grid: GridSpec
    receiver_grid: GridSpec

    def to_nodes(self, shifted, side: str) -> np.ndarray:
        """Convert shifted coordinates back to function values at grid nodes."""
        grid = self.source_grid if side == "source" else self.receiver_grid
        root_w = np.sqrt(grid.weights())
        shifted = np.asarray(shifted)
        return shifted / (root_w[:, None] if shifted.ndim == 2 else root_w)


def make_weighted_space(grid: GridSpec) -> SpaceHandle:
    """Space of nodal samples with the grid's quadrature weights as inner-product weights."""
    return SpaceHandle.weighted(grid.weights())


def helmholtz1d(k: float, x2: float, x1: float) -> complex:
    """``exp(i k |x2 - x1|) / |x2 - x1|``."""
    r = abs(x2 - x1)
    if r == 0:
        raise ValueError("Helmholtz kernel is singular at coincident points")
    return complex(np.exp(1j * k * r) / r)


def _helmholtz_matrix(k, x2, x1):
    r = np.abs(x2[:, None] - x1[None, :])
    return np.exp(1j * k * r) / r


def _disjoint(a: GridSpec, b: GridSpec) -> bool:
    return a.upper < b.lower or b.upper < a.lower


def discretize(kernel: KernelSpec, source: GridSpec | None = None,
               receiver: GridSpec | None = None) -> DiscretizedOperator:
    """Operator matrix of ``kernel`` between quadrature-weighted spaces.

    Applying the operator to ``sqrt(w1) * f`` gives ``sqrt(w2) * g`` where ``g``
    is the quadrature of ``int G(x2; x1) f(x1) dx1`` at the receiver nodes.
    Tabulated kernels carry their own grids; explicit grids must agree with
    the sample shape.
    """
    if isinstance(kernel, Helmholtz1D):
        if source is None or receiver is None:
            raise ValueError("Helmholtz kernel needs source and receiver grids")
        if not _disjoint(source, receiver):
            raise OverlapError(f"source [{source.lower}, {source.upper}] and receiver "
                               f"[{receiver.lower}, {receiver.upper}] must be separated by a gap")
        g = _helmholtz_matrix(kernel.wavenumber, receiver.nodes(), source.nodes())
    elif isinstance(kernel, Tabulated):
        source = kernel.col_grid if source is None else source
        receiver = kernel.row_grid if receiver is None else receiver
        if kernel.samples.shape != (receiver.points, source.points):
            raise ShapeMismatchError(f"samples of shape {kernel.samples.shape} do not match "
                                     f"{receiver.points} receiver x {source.points} source points")
        g = kernel.samples
    else:
        raise TypeError(f"unsupported kernel {type(kernel).__name__}")
    w1, w2 = source.weights(), receiver.weights()
    elements = np.sqrt(w2)[:, None] * g * np.sqrt(w1)[None, :]
    src_space, rcv_space = make_weighted_space(source), make_weighted_space(receiver)
    return DiscretizedOperator(OperatorMatrix(src_space, rcv_space, elements), src_space,
                               rcv_space, source, receiver)


def write_kernel_samples(path, kernel: Tabulated) -> None:
    rows, cols = kernel.samples.shape
    lines = [FILE_MAGIC, f"rows {rows} cols {cols}"]
    for tag, grid in (("rowgrid", kernel.row_grid), ("colgrid", kernel.col_grid)):
        lines.append(f"{tag} {grid.lower!r} {grid.upper!r} {grid.rule}")
    lines.extend(f"{float(z.real)!r} {float(z.imag)!r}" for z in kernel.samples.ravel())
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_grid(line: str | None, tag: str, points: int) -> GridSpec:
    parts = (line or "").split()
    if len(parts) != 4 or parts[0] != tag:
        raise MalformedHeaderError(f"expected '{tag} <lower> <upper> <rule>', got {line!r}")
    try:
        return GridSpec(float(parts[1]), float(parts[2]), points, parts[3])
    except ValueError as exc:
        raise MalformedHeaderError(f"bad {tag} line {line!r}: {exc}") from None


def load_kernel_samples(path) -> Tabulated:
    """Read a tabulated kernel.

    Raises ``FileNotFoundError`` for a missing file, :class:`MalformedHeaderError`
    for a bad or truncated header and :class:`ShapeMismatchError` when the sample
    count disagrees with ``rows * cols``.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"kernel file not found: {path}")
    with open(path, encoding="ascii") as fh:
        lines = fh.read().splitlines()
    header = lines[:4] + [None] * (4 - len(lines[:4]))
    if header[0] is None or header[0].strip() != FILE_MAGIC:
        raise MalformedHeaderError(f"first line must be {FILE_MAGIC!r}, got {header[0]!r}")
    dims = (header[1] or "").split()
    if len(dims) != 4 or dims[0] != "rows" or dims[2] != "cols":
        raise MalformedHeaderError(f"expected 'rows <m> cols <n>', got {header[1]!r}")
    try:
        rows, cols = int(dims[1]), int(dims[3])
    except ValueError:
        raise MalformedHeaderError(f"non-integer dimensions in {header[1]!r}") from None
    if rows < 1 or cols < 1:
        raise MalformedHeaderError(f"dimensions must be positive, got {rows} x {cols}")
    row_grid = _parse_grid(header[2], "rowgrid", rows)
    col_grid = _parse_grid(header[3], "colgrid", cols)

    body = [ln for ln in lines[4:] if ln.strip()]
    if len(body) != rows * cols:
        raise ShapeMismatchError(f"header declares {rows} x {cols} = {rows * cols} samples, "
                                 f"file has {len(body)}")
    samples = np.empty(rows * cols, dtype=np.complex128)
    for i, ln in enumerate(body):
        parts = ln.split()
        if len(parts) != 2:
            raise KernelFileError(f"sample line {i + 5} must hold 're im', got {ln!r}")
        try:
            samples[i] = complex(float(parts[0]), float(parts[1]))
        except ValueError:
            raise KernelFileError(f"sample line {i + 5} is not numeric: {ln!r}") from None
    if not np.all(np.isfinite(samples)):
        raise KernelFileError("kernel samples must be finite")
    return Tabulated(samples.reshape(rows, cols), row_grid, col_grid)
