"""Nonnegative finite Radon measures on the line: density plus atoms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResolutionError


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``n_cells`` cells on ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells < 1 or not self.x_max > self.x_min:
            raise DomainError("grid needs x_max > x_min and at least one cell")

    @classmethod
    def covering(cls, a, b, dx):
        """Smallest grid with step ``dx`` whose edges are multiples of ``dx``
        and which contains ``[a, b]``."""
        i0 = math.floor(a / dx + 1e-9)
        i1 = math.ceil(b / dx - 1e-9)
        return cls(i0 * dx, i1 * dx, i1 - i0)

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def centers(self):
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def edges(self):
        return self.x_min + np.arange(self.n_cells + 1) * self.dx

    def cell_index(self, x):
        """Index of the cell containing ``x`` (clipped to the grid)."""
        i = np.floor((np.asarray(x, dtype=float) - self.x_min) / self.dx).astype(int)
        return np.clip(i, 0, self.n_cells - 1)

    def edge_index(self, x):
        """Index of the cell edge nearest to ``x``."""
        return np.rint((np.asarray(x, dtype=float) - self.x_min) / self.dx).astype(int)

    def zeros(self):
        return np.zeros(self.n_cells)


def shift_cell_averages(values, dx, a):
    """Translate piecewise-constant cell averages by ``a`` (conservative remap).

    Mass leaving the array is lost; callers check support first.
    """
    prim = np.concatenate(([0.0], np.cumsum(values) * dx))
    edges = np.arange(values.size + 1) * dx
    # F_new(x) = F_old(x - a), F_old linear inside each cell
    shifted = np.interp(edges - a, edges, prim, left=0.0, right=prim[-1])
    return np.diff(shifted) / dx


@dataclass(frozen=True)
class RadonMeasure:
    """Density (cell averages on ``grid``) plus atoms ``(x_l, c_l)``."""

    grid: Grid | None = None
    density: np.ndarray | None = None
    atoms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        atoms = tuple((float(x), float(c)) for x, c in self.atoms)
        if any(c < 0 for _, c in atoms):
            raise DomainError("atom masses must be nonnegative")
        xs = [x for x, _ in atoms]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise DomainError("atom locations must be strictly increasing")
        object.__setattr__(self, "atoms", atoms)
        if self.density is not None:
            if self.grid is None:
                raise DomainError("a density needs a grid")
            d = np.asarray(self.density, dtype=float)
            if d.shape != (self.grid.n_cells,):
                raise DomainError("density does not match the grid")
            if np.any(d < 0):
                raise DomainError("density must be nonnegative")
            d.setflags(write=False)
            object.__setattr__(self, "density", d)

    @classmethod
    def dirac(cls, x=0.0, c=1.0, grid=None):
        return cls(grid=grid, atoms=((x, c),))

    @property
    def singular_mass(self):
        return sum(c for _, c in self.atoms)

    @property
    def regular_mass(self):
        if self.density is None:
            return 0.0
        return float(np.sum(self.density) * self.grid.dx)

    def density_on(self, grid):
        """Density as an array on ``grid`` (zeros when absent)."""
        if self.density is None:
            return grid.zeros()
        if grid != self.grid:
            raise DomainError("density lives on a different grid")
        return np.array(self.density)

    def with_grid(self, grid):
        """Same atoms, density remapped to ``grid`` by exact cell overlap."""
        if self.density is None:
            return RadonMeasure(grid, None, self.atoms)
        if grid == self.grid:
            return self
        src = self.grid
        prim = np.concatenate(([0.0], np.cumsum(self.density) * src.dx))
        nz = np.nonzero(self.density)[0]
        if nz.size and (src.edges[nz[0]] < grid.x_min - 1e-12 or src.edges[nz[-1] + 1] > grid.x_max + 1e-12):
            raise DomainError("density support exceeds the target grid")
        vals = np.interp(grid.edges, src.edges, prim, left=0.0, right=prim[-1])
        return RadonMeasure(grid, np.diff(vals) / grid.dx, self.atoms)

    def regular_only(self):
        return RadonMeasure(self.grid, self.density, ())

    def to_config(self):
        out = {"atoms": [[x, c] for x, c in self.atoms]}
        if self.density is None:
            out["density"] = {"kind": "zero"}
        else:
            g = self.grid
            out["density"] = {
                "kind": "samples",
                "x_min": g.x_min,
                "x_max": g.x_max,
                "values": self.density.tolist(),
            }
        return out


def total_mass(m):
    """``int density dx + sum c_l`` (midpoint rule)."""
    return m.regular_mass + m.singular_mass


def translate(m, a):
    """The translated measure ``T_a m``: every atom and the density move by ``a``."""
    atoms = tuple((x + a, c) for x, c in m.atoms)
    if m.density is None or a == 0:
        return RadonMeasure(m.grid, m.density, atoms)
    g = m.grid
    nz = np.nonzero(m.density)[0]
    if nz.size:
        lo = g.x_min + nz[0] * g.dx + a
        hi = g.x_min + (nz[-1] + 1) * g.dx + a
        if lo < g.x_min - 1e-12 or hi > g.x_max + 1e-12:
            raise DomainError("translated density leaves the grid; extend the domain")
    dens = shift_cell_averages(np.asarray(m.density), g.dx, a)
    return RadonMeasure(g, np.maximum(dens, 0.0), atoms)


def pair(m, rho):
    """``<m, rho> = int density rho dx + sum c_l rho(x_l)``."""
    total = sum(c * float(rho(x)) for x, c in m.atoms)
    if m.density is not None:
        g = m.grid
        lo, hi = rho.support
        if lo < g.x_min - 1e-12 or hi > g.x_max + 1e-12:
            raise DomainError("test function support leaves the grid")
        total += float(np.sum(m.density * rho(g.centers)) * g.dx)
    return total


def window_mass(m, a, b):
    """``m([a, b])`` with the density integrated by exact cell overlap."""
    out = sum(c for x, c in m.atoms if a <= x <= b)
    if m.density is not None:
        g = m.grid
        prim = np.concatenate(([0.0], np.cumsum(m.density) * g.dx))
        fa, fb = np.interp([a, b], g.edges, prim)
        out += float(fb - fa)
    return out


def dirac_regularize(m, n, grid, min_cells=4):
    """Replace each atom ``(x_l, c_l)`` by a pulse of width ``2/n`` and mass
    ``c_l`` and return the resulting density on ``grid``.

    Pulse edges are snapped to cell edges and the height is set from the
    snapped width, so the discrete mass of every pulse is exactly ``c_l``.
    """
    if n < 1:
        raise DomainError("level n must be a positive integer")
    dx = grid.dx
    if 2.0 / n < min_cells * dx * (1 - 1e-12):
        raise ResolutionError(
            f"pulse width 2/n = {2.0 / n:.3g} spans fewer than {min_cells} cells of size {dx:.3g}"
        )
    out = m.with_grid(grid).density_on(grid)
    for x, c in m.atoms:
        i0 = int(grid.edge_index(x - 1.0 / n))
        i1 = int(grid.edge_index(x + 1.0 / n))
        if i0 < 0 or i1 > grid.n_cells:
            raise DomainError("pulse leaves the grid")
        i1 = max(i1, i0 + 1)
        out[i0:i1] += c / ((i1 - i0) * dx)
    return out


def indicator(grid, a, b, height=1.0):
    """Cell averages of ``height * chi_[a, b]`` by exact overlap."""
    e = grid.edges
    overlap = np.clip(np.minimum(e[1:], b) - np.maximum(e[:-1], a), 0.0, None)
    return height * overlap / grid.dx


# --- test functions -------------------------------------------------------------

def _bump(s):
    """``(1 - s^2)^3`` on [-1, 1]; C^2 with compact support."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1
    return np.where(inside, (1 - s * s) ** 3, 0.0)


def _bump_d(s):
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1
    return np.where(inside, -6 * s * (1 - s * s) ** 2, 0.0)


@dataclass(frozen=True)
class TestFunction:
    """Smooth nonnegative bump supported on ``[a, b]``; ``rho(x)`` and ``rho.dx(x)``."""

    a: float
    b: float
    amplitude: float = 1.0
    plateau: float = 0.0  # flat top of this half-width (fraction of support)

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if not self.b > self.a:
            raise DomainError("test function needs b > a")
        if not 0 <= self.plateau < 1:
            raise DomainError("plateau fraction must lie in [0, 1)")

    @property
    def support(self):
        return (self.a, self.b)

    def _s(self, x):
        c, h = 0.5 * (self.a + self.b), 0.5 * (self.b - self.a)
        r = (np.asarray(x, dtype=float) - c) / h
        w = 1 - self.plateau
        core = np.clip(np.abs(r) - self.plateau, 0.0, None) / w
        return np.sign(r) * core, h * w

    def __call__(self, x):
        s, _ = self._s(x)
        return self.amplitude * _bump(s)

    def dx(self, x):
        s, scale = self._s(x)
        return self.amplitude * _bump_d(s) / scale

    @property
    def c1_norm(self):
        """``sup |rho| + sup |rho'|``."""
        h = 0.5 * (self.b - self.a) * (1 - self.plateau)
        return self.amplitude * (1 + 96 / (25 * math.sqrt(5)) / h)


@dataclass(frozen=True)
class SpaceTimeTest:
    """``zeta(x, t) = rho(x) * tau(t)`` with ``tau`` a C^1 bump on ``[t0, t1]``.

    When ``t0 == 0`` the time profile is a half bump with ``tau(0) = 1`` and
    ``tau'(0) = 0``, so the initial-data term is exercised.
    """

    rho: TestFunction
    t0: float
    t1: float

    __test__ = False

    def tau(self, t):
        t = np.asarray(t, dtype=float)
        if self.t0 == 0.0:
            return _bump(t / self.t1)
        mid, h = 0.5 * (self.t0 + self.t1), 0.5 * (self.t1 - self.t0)
        return _bump((t - mid) / h)

    def tau_dt(self, t):
        t = np.asarray(t, dtype=float)
        if self.t0 == 0.0:
            return _bump_d(t / self.t1) / self.t1
        mid, h = 0.5 * (self.t0 + self.t1), 0.5 * (self.t1 - self.t0)
        return _bump_d((t - mid) / h) / h

    def __call__(self, x, t):
        return self.rho(x) * self.tau(t)

    def dx(self, x, t):
        return self.rho.dx(x) * self.tau(t)

    def dt(self, x, t):
        return self.rho(x) * self.tau_dt(t)

    def nu(self, x, t, cphi):
        """``zeta_t + C_phi zeta_x``, the derivative along atom trajectories."""
        return self.dt(x, t) + cphi * self.dx(x, t)

    @property
    def c1_norm(self):
        hx = 0.5 * (self.rho.b - self.rho.a) * (1 - self.rho.plateau)
        ht = self.t1 if self.t0 == 0.0 else 0.5 * (self.t1 - self.t0)
        k = 96 / (25 * math.sqrt(5))  # sup |d/ds (1 - s^2)^3|
        return self.rho.amplitude * (1 + k / hx + k / ht)


# --- configuration ------------------------------------------------------------

def from_config(spec, grid=None):
    """Build a measure from ``{"atoms": [[x, c], ...], "density": {...}}``.

    Density kinds: ``zero``; ``indicator`` with ``a``, ``b``, ``height``;
    ``samples`` with ``x_min``, ``x_max``, ``values``.
    """
    atoms = tuple(tuple(a) for a in spec.get("atoms", []))
    dens = spec.get("density", {"kind": "zero"})
    kind = dens.get("kind", "zero")
    if kind == "zero":
        return RadonMeasure(grid, None, atoms)
    if kind == "indicator":
        if grid is None:
            raise DomainError("indicator density needs a grid")
        return RadonMeasure(grid, indicator(grid, dens["a"], dens["b"], dens.get("height", 1.0)), atoms)
    if kind == "samples":
        vals = np.asarray(dens["values"], dtype=float)
        g = Grid(dens["x_min"], dens["x_max"], vals.size)
        m = RadonMeasure(g, vals, atoms)
        return m.with_grid(grid) if grid is not None else m
    raise DomainError(f"unknown density kind {kind!r}")


def parse_datum(text):
    """Parse ``dirac:x:c`` (repeatable with ``+``) and ``indicator:a:b[:h]``.

    Returns a ``{"atoms", "density"}`` dict suitable for :func:`from_config`.
    """
    atoms, density = [], {"kind": "zero"}
    for part in text.split("+"):
        name, *args = part.split(":")
        vals = [float(v) for v in args]
        if name == "dirac":
            x, c = (vals + [0.0, 1.0][len(vals):])[:2]
            atoms.append([x, c])
        elif name == "indicator":
            density = {"kind": "indicator", "a": vals[0], "b": vals[1], "height": vals[2] if len(vals) > 2 else 1.0}
        else:
            raise DomainError(f"cannot parse datum {part!r}")
    atoms.sort()
    return {"atoms": atoms, "density": density}
