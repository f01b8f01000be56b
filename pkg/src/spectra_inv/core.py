"""Shared numerical groundwork: uniform grids on [0, pi], Simpson quadrature,
sampled functions, boundary angles, and potential presets.

Everything downstream (the eigensolver, the cubic-nonlinearity shooting code
and the eigenvalue-placement optimizer) works on the types defined here.

Conventions
-----------
* The domain is the interval [0, pi], discretized by uniform grids with
  n >= 16 panels (n + 1 nodes).
* Functions are represented by their samples at the grid nodes.  L2 inner
  products use composite Simpson weights (exact for cubics per panel pair).
* Between nodes a potential is evaluated through per-panel cubic
  coefficients: a C2 spline through the samples for smooth data, or exact
  panel constants for step presets.
* All containers are immutable after construction (arrays are frozen), so
  every operation here is pure and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline, PPoly

PI = math.pi

#: Coarsest grid any solver in this package accepts.
MIN_INTERVALS = 16

PRESET_NAMES = ("zero", "constant", "cosine", "piecewise_step", "random_fourier")


class GridMismatchError(ValueError):
    """Two grid functions do not live on the same grid."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform partition 0 = x_0 < x_1 < ... < x_n = pi.

    Attributes
    ----------
    n : int
        Number of panels (>= 16).
    nodes : np.ndarray
        The n + 1 node coordinates, spacing pi / n.
    """

    n: int
    nodes: np.ndarray

    @property
    def h(self) -> float:
        """Panel width pi / n."""
        return PI / self.n

    def same_as(self, other: "Grid") -> bool:
        return self.n == other.n and bool(np.array_equal(self.nodes, other.nodes))


def make_grid(n: int) -> Grid:
    """Build the uniform grid with ``n`` panels on [0, pi].

    Grids coarser than 16 panels are rejected: none of the solvers in this
    package gives usable accuracy below that.
    """
    if not isinstance(n, (int, np.integer)):
        raise TypeError(f"grid size must be an integer, got {type(n).__name__}")
    if n < MIN_INTERVALS:
        raise ValueError(f"grid too coarse: n={n} < {MIN_INTERVALS}")
    nodes = np.linspace(0.0, PI, int(n) + 1)
    return Grid(int(n), _frozen(nodes))


@dataclass(frozen=True)
class GridFunction:
    """Real function sampled at the nodes of a :class:`Grid`.

    ``values`` must be finite and have length ``grid.n + 1``.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(np.asarray(self.values, dtype=np.float64))
        if vals.shape != (self.grid.n + 1,):
            raise ValueError(
                f"expected {self.grid.n + 1} samples, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function samples must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=np.float64))

    # -- small amount of vector-space sugar used by the optimizer and tests --

    def _coerce(self, other):
        if isinstance(other, GridFunction):
            if not self.grid.same_as(other.grid):
                raise GridMismatchError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other):
        return GridFunction(self.grid, self._coerce(other) - self.values)

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)


@lru_cache(maxsize=64)
def _simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights on n uniform panels of width h.

    Even n: plain composite Simpson.  Odd n: Simpson on the first n - 3
    panels plus the 3/8 rule on the last three.  Both pieces integrate
    cubics exactly.
    """
    w = np.zeros(n + 1)
    if n % 2 == 0:
        m = n
    else:
        m = n - 3
        w[m:] += np.array([1.0, 3.0, 3.0, 1.0]) * (3.0 * h / 8.0)
    if m > 0:
        ws = np.zeros(m + 1)
        ws[0] = ws[-1] = 1.0
        ws[1:-1:2] = 4.0
        ws[2:-1:2] = 2.0
        w[: m + 1] += ws * (h / 3.0)
    return _frozen(w)


def simpson_weights(grid: Grid) -> np.ndarray:
    return _simpson_weights(grid.n, grid.h)


def l2_inner(f: GridFunction, g: GridFunction) -> float:
    """Approximate the L2(0, pi) scalar product of two sampled functions.

    Composite-Simpson quadrature of the pointwise product; symmetric and
    bilinear by construction.  Raises :class:`GridMismatchError` if the
    arguments live on different grids.
    """
    if not f.grid.same_as(g.grid):
        raise GridMismatchError("l2_inner requires both functions on one grid")
    w = simpson_weights(f.grid)
    return float(np.dot(w, f.values * g.values))


def l2_norm(f: GridFunction) -> float:
    """L2(0, pi) norm, sqrt(l2_inner(f, f))."""
    w = simpson_weights(f.grid)
    return float(math.sqrt(max(0.0, np.dot(w, f.values * f.values))))


def sup_norm(f: GridFunction) -> float:
    return float(np.max(np.abs(f.values)))


# ---------------------------------------------------------------------------
# boundary angles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryAngle:
    """Angle alpha in [0, pi) parameterizing the separated conditions

        u(0) cos(alpha) + u'(0) sin(alpha) = 0,
        u(pi) cos(alpha) + u'(pi) sin(alpha) = 0.

    The same angle applies at both endpoints.  alpha = 0 is Dirichlet,
    alpha = pi/2 is Neumann.
    """

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 <= a < PI) or not math.isfinite(a):
            raise ValueError(f"boundary angle must lie in [0, pi), got {a!r}")
        object.__setattr__(self, "alpha", a)

    @property
    def beta(self) -> float:
        """Polar-phase value beta = (-alpha) mod pi in [0, pi).

        The boundary-compatible initial ray is (u, u')(0) ~ (sin beta,
        cos beta); the terminal condition reads theta(pi) = beta (mod pi).
        """
        return (-self.alpha) % PI

    def ray(self) -> tuple[float, float]:
        """Unit initial data (u(0), u'(0)) with positive sign near x = 0."""
        b = self.beta
        return (math.sin(b), math.cos(b))


DIRICHLET = BoundaryAngle(0.0)
NEUMANN = BoundaryAngle(PI / 2.0)


def as_angle(alpha) -> BoundaryAngle:
    """Accept either a BoundaryAngle or a float in radians."""
    if isinstance(alpha, BoundaryAngle):
        return alpha
    return BoundaryAngle(float(alpha))


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Potential:
    """A real potential q sampled on a grid.

    ``preset`` records machine-readable provenance (name, params) for presets
    so the same potential can be regenerated exactly on a refined grid;
    ``panel_override`` carries exact per-panel cubic coefficients for presets
    with jumps, where a global spline would ring.
    """

    f: GridFunction
    label: str
    seed: int | None = None
    preset: tuple | None = None
    panel_override: np.ndarray | None = field(default=None, repr=False)

    @property
    def grid(self) -> Grid:
        return self.f.grid

    @property
    def values(self) -> np.ndarray:
        return self.f.values

    @cached_property
    def panel_coeffs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Per-panel cubic coefficients (c0, c1, c2, c3) with local
        coordinate t = x - x_i on panel i:  q(x) = c0 + t(c1 + t(c2 + t c3)).
        """
        if self.panel_override is not None:
            c = np.asarray(self.panel_override, dtype=np.float64)
        else:
            cs = CubicSpline(self.grid.nodes, self.f.values)
            # CubicSpline stores highest degree first
            c = cs.c[::-1]
        return tuple(_frozen(row) for row in c)

    @cached_property
    def _ppoly(self) -> PPoly:
        c0, c1, c2, c3 = self.panel_coeffs
        return PPoly(np.vstack([c3, c2, c1, c0]), self.grid.nodes)

    def __call__(self, x):
        """Evaluate the interpolated potential at arbitrary points."""
        return self._ppoly(np.clip(x, 0.0, PI))

    def min_value(self) -> float:
        return float(np.min(self.f.values))

    def max_value(self) -> float:
        return float(np.max(self.f.values))

    def shifted(self, c: float) -> "Potential":
        """The potential q + c."""
        return potential_from_values(
            self.grid, self.f.values + c, label=f"{self.label}+{c:g}"
        )


def potential_from_values(
    grid: Grid, values, label: str = "custom", seed: int | None = None
) -> Potential:
    return Potential(GridFunction(grid, np.asarray(values, dtype=np.float64)), label, seed)


def _random_fourier_coeffs(bound: float, modes: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(modes)
    # scale so the exact L2 norm of sum c_l sin(l x) equals the bound
    norm = math.sqrt(PI / 2.0 * float(np.sum(c * c)))
    if norm == 0.0:  # pragma: no cover - measure zero
        c = np.ones(modes)
        norm = math.sqrt(PI / 2.0 * modes)
    return c * (bound / norm)


def preset_potential(
    name: str, params, grid: Grid, seed: int | None = None
) -> Potential:
    """Construct one of the named potential families.

    ==================  =========================  =============================
    name                params                     definition
    ==================  =========================  =============================
    zero                []                         q = 0
    constant            [c]                        q = c
    cosine              [a, w]                     q = a cos(w x)
    piecewise_step      [v1, ..., vm]              m equal-width levels, jumps
                                                   snapped to grid nodes
    random_fourier      [bound, modes]             seeded sine series with
                                                   ||q||_L2 = bound exactly
    ==================  =========================  =============================

    The result is deterministic for fixed (name, params, seed).
    """
    params = list(params)
    x = grid.nodes
    if name == "zero":
        if params:
            raise ValueError("zero takes no parameters")
        vals = np.zeros_like(x)
        label = "zero"
    elif name == "constant":
        if len(params) != 1:
            raise ValueError("constant takes exactly one parameter [c]")
        vals = np.full_like(x, float(params[0]))
        label = f"constant({params[0]:g})"
    elif name == "cosine":
        if len(params) != 2:
            raise ValueError("cosine takes [amplitude, frequency]")
        a, w = float(params[0]), float(params[1])
        vals = a * np.cos(w * x)
        label = f"cosine({a:g},{w:g})"
    elif name == "piecewise_step":
        if len(params) < 1:
            raise ValueError("piecewise_step needs at least one level")
        levels = np.asarray([float(p) for p in params])
        m = len(levels)
        edges = np.rint(np.arange(m + 1) * grid.n / m).astype(int)
        panel_level = np.empty(grid.n)
        for j in range(m):
            panel_level[edges[j] : edges[j + 1]] = levels[j]
        vals = np.append(panel_level, panel_level[-1])  # right-continuous samples
        override = np.zeros((4, grid.n))
        override[0] = panel_level
        label = "piecewise_step(" + ",".join(f"{v:g}" for v in levels) + ")"
        return Potential(
            GridFunction(grid, vals),
            label,
            seed,
            preset=(name, tuple(params)),
            panel_override=override,
        )
    elif name == "random_fourier":
        if len(params) != 2:
            raise ValueError("random_fourier takes [l2_bound, n_modes]")
        if seed is None:
            raise ValueError("random_fourier requires a seed")
        bound, modes = float(params[0]), int(params[1])
        if bound <= 0 or modes < 1:
            raise ValueError("random_fourier needs l2_bound > 0 and n_modes >= 1")
        c = _random_fourier_coeffs(bound, modes, int(seed))
        vals = np.zeros_like(x)
        for l, cl in enumerate(c, start=1):
            vals += cl * np.sin(l * x)
        label = f"random_fourier({bound:g},{modes},seed={seed})"
    else:
        raise ValueError(f"unknown preset {name!r}; valid: {PRESET_NAMES}")
    return Potential(GridFunction(grid, vals), label, seed, preset=(name, tuple(params)))


def resample_potential(p: Potential, grid: Grid) -> Potential:
    """The same potential represented on another grid.

    Presets are regenerated exactly from their provenance; other potentials
    are re-sampled through their cubic interpolant.
    """
    if p.grid.same_as(grid):
        return p
    if p.preset is not None:
        name, params = p.preset
        return preset_potential(name, list(params), grid, p.seed)
    return potential_from_values(grid, p(grid.nodes), label=p.label, seed=p.seed)


# ---------------------------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------------------------

CSV_HEADER = "x,value"


def save_csv(f: GridFunction | Potential, path) -> None:
    """Write samples as ``x,value`` rows in full double precision."""
    gf = f.f if isinstance(f, Potential) else f
    lines = [CSV_HEADER]
    for x, v in zip(gf.grid.nodes, gf.values):
        lines.append(f"{x:.17g},{v:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read an ``x,value`` CSV written by :func:`save_csv`."""
    path = Path(path)
    raw = path.read_text(encoding="utf-8").strip().splitlines()
    if not raw or raw[0].strip().lower() != CSV_HEADER:
        raise ValueError(f"{path}: expected header '{CSV_HEADER}'")
    xs, vs = [], []
    for i, line in enumerate(raw[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"{path}:{i}: expected two comma-separated fields")
        xs.append(float(parts[0]))
        vs.append(float(parts[1]))
    x = np.asarray(xs)
    v = np.asarray(vs)
    if len(x) < 2 or np.any(np.diff(x) <= 0):
        raise ValueError(f"{path}: x column must be strictly increasing")
    return x, v


def grid_function_from_csv(path, grid: Grid) -> GridFunction:
    """Load a CSV onto ``grid``; linear interpolation if the grids differ."""
    x, v = load_csv(path)
    if len(x) == grid.n + 1 and np.allclose(x, grid.nodes, rtol=0.0, atol=1e-12):
        return GridFunction(grid, v)
    return GridFunction(grid, np.interp(grid.nodes, x, v))


def potential_from_csv(path, grid: Grid, label: str | None = None) -> Potential:
    gf = grid_function_from_csv(path, grid)
    return Potential(gf, label or f"csv:{Path(path).name}")
