# This file is part of climabm, a spatial agent-based model of a
# climate-exposed economy.
#
# climabm is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License version 3
# as published by the Free Software Foundation.
#
# climabm is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with climabm.  If not, see <https://www.gnu.org/licenses/>.
"""
climabm hazard:

Gridded return-period hazard data (flood depth in meters), per-step
stochastic sampling of event intensities and intensity to damage-ratio
conversion through piecewise-linear impact curves.

Hazard grid file format (whitespace separated, `#` starts a comment):

    width height n_rps
    rp_1 rp_2 ... rp_n
    <height rows of width depths for rp_1>
    ...
    <height rows of width depths for rp_n>

Impact curve file format: one `intensity damage_ratio` pair per line.

Cells are addressed as `(x, y)` with `x` the column and `y` the row;
rasters are stored as numpy arrays indexed `[y, x]`.
"""
from dataclasses import dataclass, field

import numpy as np

from climabm.logging import make_logger, logged

__all__ = [
    "DEFAULT_RETURN_PERIODS", "DEFAULT_DT_YEARS", "HazardDataError",
    "ImpactCurveError", "HazardGrid", "ImpactCurve", "HazardField",
    "HazardSchedule", "load_hazard_dataset", "write_hazard_dataset",
    "load_impact_curve", "damage_ratio", "interpolate_return_period",
    "sample_step_hazard", "neighborhood_peak", "normalized_field",
    "synthetic_flood_grid",
]

DEFAULT_RETURN_PERIODS = (2, 5, 10, 25, 50, 100, 250, 500, 1000)
DEFAULT_DT_YEARS = 0.25
REFERENCE_RETURN_PERIOD = 100

logger = make_logger("hazard")


class HazardDataError(ValueError):
    """Raised for malformed or inconsistent hazard grid data."""


class ImpactCurveError(ValueError):
    """Raised for malformed or invalid impact curves."""


@dataclass(frozen=True, eq=False)
class HazardGrid:
    """
    Per-cell intensity rasters indexed by return period.

    `layers` has shape `(len(return_periods), height, width)`. Use
    `HazardGrid.from_layers` to build a validated instance.
    """
    width: int
    height: int
    return_periods: tuple
    layers: np.ndarray
    max_intensity: float

    @classmethod
    def from_layers(cls, return_periods, layers):
        return_periods = tuple(float(rp) for rp in return_periods)
        layers = np.array(layers, dtype=float)
        if layers.ndim != 3:
            raise HazardDataError(
                "layers must be 3-dimensional (n_rps, height, width), "
                "got shape {}".format(layers.shape))
        if layers.shape[0] != len(return_periods):
            raise HazardDataError(
                "mismatched dimensions: {} return periods but {} layers".format(
                    len(return_periods), layers.shape[0]))
        _validate_return_periods(return_periods)
        _validate_layers(return_periods, layers)
        layers.setflags(write=False)
        return cls(
            width=int(layers.shape[2]),
            height=int(layers.shape[1]),
            return_periods=return_periods,
            layers=layers,
            max_intensity=float(layers.max()) if layers.size else 0.0,
        )

    @classmethod
    def zeros(cls, width, height, return_periods=DEFAULT_RETURN_PERIODS):
        return cls.from_layers(
            return_periods,
            np.zeros((len(return_periods), height, width)))

    def zeros_like(self):
        """A grid with the same shape and return periods and no hazard."""
        return HazardGrid.zeros(self.width, self.height, self.return_periods)

    @property
    def shape(self):
        return (self.height, self.width)

    def in_bounds(self, cell):
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def cell_curve(self, cell):
        """The `(return_period, intensity)` knots of one cell."""
        x, y = cell
        return [
            (rp, float(self.layers[k, y, x]))
            for k, rp in enumerate(self.return_periods)
        ]

    def reference_layer(self, return_period=REFERENCE_RETURN_PERIOD):
        """
        The layer whose return period is closest to `return_period`
        in log space (the exact layer when present).
        """
        distances = np.abs(np.log(self.return_periods) - np.log(return_period))
        return self.layers[int(np.argmin(distances))]


def _validate_return_periods(return_periods):
    if not return_periods:
        raise HazardDataError("at least one return period is required")
    for index, rp in enumerate(return_periods):
        if not np.isfinite(rp) or rp <= 0:
            raise HazardDataError(
                "return period #{} must be positive, got {}".format(index + 1, rp))
        if index and rp <= return_periods[index - 1]:
            raise HazardDataError(
                "return periods must be strictly increasing: {} follows {}".format(
                    rp, return_periods[index - 1]))


def _validate_layers(return_periods, layers):
    bad = np.argwhere(~np.isfinite(layers) | (layers < 0))
    if bad.size:
        k, y, x = (int(v) for v in bad[0])
        raise HazardDataError(
            "invalid intensity {} at cell (x={}, y={}) in layer RP{:g}; "
            "intensities must be finite and >= 0".format(
                layers[k, y, x], x, y, return_periods[k]))
    drops = np.argwhere(np.diff(layers, axis=0) < 0)
    if drops.size:
        k, y, x = (int(v) for v in drops[0])
        raise HazardDataError(
            "non-monotone intensity at cell (x={}, y={}): layer RP{:g} has "
            "{:g} m but layer RP{:g} has {:g} m".format(
                x, y,
                return_periods[k], layers[k, y, x],
                return_periods[k + 1], layers[k + 1, y, x]))


def _tokens(path):
    """Yields `(line_number, token)` pairs with comments removed."""
    with open(path, "r") as fin:
        for number, line in enumerate(fin, start=1):
            for token in line.split("#", 1)[0].split():
                yield number, token


def _number(kind, line, token):
    try:
        return kind(token)
    except ValueError:
        raise HazardDataError(
            "line {}: cannot parse '{}' as {}".format(
                line, token, "an integer" if kind is int else "a number"))


@logged("hazard")
def load_hazard_dataset(path):
    """
    Reads and validates a hazard grid file.

    Raises `HazardDataError` naming the offending line, layer or cell
    for malformed files, mismatched dimensions and non-monotone layers.
    """
    tokens = list(_tokens(path))
    if len(tokens) < 3:
        raise HazardDataError(
            "{}: header must be 'width height n_rps'".format(path))
    width, height, n_rps = (_number(int, line, tok) for line, tok in tokens[:3])
    if width <= 0 or height <= 0 or n_rps <= 0:
        raise HazardDataError(
            "line {}: width, height and n_rps must be positive, got {} {} {}".format(
                tokens[0][0], width, height, n_rps))
    rest = tokens[3:]
    if len(rest) < n_rps:
        raise HazardDataError(
            "{}: expected {} return periods, found {}".format(path, n_rps, len(rest)))
    return_periods = [_number(float, line, tok) for line, tok in rest[:n_rps]]
    _validate_return_periods(return_periods)

    values = rest[n_rps:]
    cells = width * height
    layers = np.empty((n_rps, height, width))
    for k, rp in enumerate(return_periods):
        block = values[k * cells:(k + 1) * cells]
        if len(block) < cells:
            raise HazardDataError(
                "mismatched dimensions: layer RP{:g} expected {} values "
                "({}x{}), found {}".format(rp, cells, width, height, len(block)))
        for index, (line, tok) in enumerate(block):
            y, x = divmod(index, width)
            layers[k, y, x] = _number(float, line, tok)
    if len(values) > n_rps * cells:
        line = values[n_rps * cells][0]
        raise HazardDataError(
            "mismatched dimensions: unexpected extra values starting at "
            "line {} (expected {} layers of {}x{})".format(line, n_rps, width, height))
    grid = HazardGrid.from_layers(return_periods, layers)
    logger.info(
        f"Loaded hazard grid {path}: {width}x{height}, RPs "
        f"{list(grid.return_periods)}, max intensity {grid.max_intensity}")
    return grid


def write_hazard_dataset(grid, path):
    """Writes `grid` in the hazard grid file format."""
    with open(path, "w") as fout:
        fout.write("{} {} {}\n".format(grid.width, grid.height, len(grid.return_periods)))
        fout.write(" ".join("{:g}".format(rp) for rp in grid.return_periods) + "\n")
        for k, rp in enumerate(grid.return_periods):
            fout.write("# RP{:g}\n".format(rp))
            for y in range(grid.height):
                fout.write(" ".join(repr(float(v)) for v in grid.layers[k, y]) + "\n")
    return path


@dataclass(frozen=True)
class ImpactCurve:
    """
    Piecewise-linear vulnerability function: `points` is a tuple of
    `(intensity_m, damage_ratio)` knots.
    """
    points: tuple

    def __post_init__(self):
        points = tuple((float(i), float(r)) for i, r in self.points)
        object.__setattr__(self, "points", points)
        if len(points) < 2:
            raise ImpactCurveError("an impact curve needs at least two knots")
        if points[0] != (0.0, 0.0):
            raise ImpactCurveError(
                "the first knot must be (0, 0), got {}".format(points[0]))
        for index in range(1, len(points)):
            (i0, r0), (i1, r1) = points[index - 1], points[index]
            if i1 <= i0:
                raise ImpactCurveError(
                    "knot intensities must be strictly increasing: "
                    "{} follows {}".format(i1, i0))
            if r1 < r0:
                raise ImpactCurveError(
                    "damage ratios must be non-decreasing: {} follows {}".format(r1, r0))
        for intensity, ratio in points:
            if not 0.0 <= ratio <= 1.0:
                raise ImpactCurveError(
                    "damage ratio {} at {} m outside [0, 1]".format(ratio, intensity))

    @classmethod
    def default(cls):
        """Linear from no damage at 0 m to total damage at 6 m."""
        return cls(((0.0, 0.0), (6.0, 1.0)))

    @property
    def intensities(self):
        return np.array([p[0] for p in self.points])

    @property
    def ratios(self):
        return np.array([p[1] for p in self.points])


@logged("hazard")
def load_impact_curve(path):
    """Reads an impact curve file of `intensity damage_ratio` lines."""
    points = []
    with open(path, "r") as fin:
        for number, line in enumerate(fin, start=1):
            fields = line.split("#", 1)[0].split()
            if not fields:
                continue
            if len(fields) != 2:
                raise ImpactCurveError(
                    "line {}: expected 'intensity damage_ratio', got {!r}".format(
                        number, line.strip()))
            try:
                points.append((float(fields[0]), float(fields[1])))
            except ValueError:
                raise ImpactCurveError(
                    "line {}: cannot parse {!r}".format(number, line.strip()))
    return ImpactCurve(tuple(points))


def damage_ratio(curve, intensity):
    """
    Damage ratio for `intensity` (scalar or array) by linear
    interpolation between knots, clamped to the last ratio above the
    final knot.
    """
    result = np.interp(intensity, curve.intensities, curve.ratios)
    if np.ndim(result) == 0:
        return float(result)
    return result


@dataclass
class HazardField:
    """Realized per-cell intensities (meters) for one step."""
    intensities: np.ndarray
    step_index: int = 0

    @classmethod
    def zeros(cls, grid, step_index=0):
        return cls(np.zeros(grid.shape), step_index)

    def at(self, cell):
        x, y = cell
        return float(self.intensities[y, x])


def _log_interp(return_periods, values, t_star):
    """
    Log-linear interpolation in return period. `values` has the return
    period on axis 0; `t_star` matches the trailing shape of `values`
    and is clamped to the knot range. Exact at knots.
    """
    rps = np.asarray(return_periods, dtype=float)
    t_star = np.clip(np.asarray(t_star, dtype=float), rps[0], rps[-1])
    if len(rps) == 1:
        return np.broadcast_to(values[0], t_star.shape).astype(float)
    log_rps = np.log(rps)
    log_t = np.log(t_star)
    index = np.clip(np.searchsorted(log_rps, log_t, side="right") - 1, 0, len(rps) - 2)
    lower = np.take_along_axis(values, index[np.newaxis, ...], axis=0)[0]
    upper = np.take_along_axis(values, index[np.newaxis, ...] + 1, axis=0)[0]
    fraction = (log_t - log_rps[index]) / (log_rps[index + 1] - log_rps[index])
    result = lower + fraction * (upper - lower)
    result = np.where(fraction <= 0.0, lower, result)
    return np.where(fraction >= 1.0, upper, result)


def interpolate_return_period(cell_curve, t_star):
    """
    Intensity at implied return period `t_star` from a cell's
    `(return_period, intensity)` knots; linear in ln(T) between
    adjacent knots, clamped to the knot range.
    """
    rps = [rp for rp, _ in cell_curve]
    values = np.array([intensity for _, intensity in cell_curve], dtype=float)
    return float(_log_interp(rps, values, np.float64(t_star)))


def sample_step_hazard(grid, dt_years=DEFAULT_DT_YEARS, rng=None, step_index=0):
    """
    Draws one step of per-cell event intensities.

    Each cell draws `u ~ Uniform(0, 1)` (row-major order). When
    `u > dt_years / min(RP)` there is no event; otherwise the implied
    return period `T* = dt_years / u` is clamped to the RP range and
    the cell's intensity is log-linearly interpolated at `T*`.
    """
    if dt_years <= 0:
        raise ValueError("dt_years must be positive, got {}".format(dt_years))
    rng = np.random.default_rng() if rng is None else rng
    u = rng.random(grid.shape)
    event = u <= dt_years / grid.return_periods[0]
    intensities = np.zeros(grid.shape)
    if event.any():
        with np.errstate(divide="ignore"):
            t_star = dt_years / u[event]
        intensities[event] = _log_interp(
            grid.return_periods, grid.layers[:, event], t_star)
    return HazardField(intensities, step_index)


def _window(center, radius, grid):
    x, y = center
    return (
        slice(max(0, y - radius), min(grid.height, y + radius + 1)),
        slice(max(0, x - radius), min(grid.width, x + radius + 1)),
    )


def neighborhood_peak(field, center, radius, grid):
    """
    Maximum intensity within Chebyshev distance `radius` of `center`,
    normalized by `grid.max_intensity` (0 for a hazard-free grid).
    """
    if radius < 1:
        raise ValueError("radius must be >= 1, got {}".format(radius))
    if not grid.in_bounds(center):
        raise ValueError("cell {} outside the {}x{} grid".format(
            center, grid.width, grid.height))
    if grid.max_intensity <= 0:
        return 0.0
    rows, cols = _window(center, radius, grid)
    return float(field.intensities[rows, cols].max()) / grid.max_intensity


def normalized_field(field, grid):
    """Per-cell intensity divided by `grid.max_intensity`."""
    if grid.max_intensity <= 0:
        return np.zeros(grid.shape)
    return field.intensities / grid.max_intensity


@dataclass
class HazardSchedule:
    """
    Ordered `(start_step, HazardGrid)` epochs. The grid in force at
    step `s` is the last epoch whose start step is `<= s`; the first
    epoch always applies from step 0.
    """
    epochs: list = field(default_factory=list)

    def __post_init__(self):
        if not self.epochs:
            raise HazardDataError("a hazard schedule needs at least one grid")
        self.epochs = sorted(self.epochs, key=lambda epoch: epoch[0])
        first = self.epochs[0][1]
        for start, grid in self.epochs:
            if grid.shape != first.shape:
                raise HazardDataError(
                    "mismatched dimensions: epoch starting at step {} is "
                    "{}x{}, expected {}x{}".format(
                        start, grid.width, grid.height, first.width, first.height))
        self.epochs[0] = (0, first)

    @classmethod
    def single(cls, grid):
        return cls([(0, grid)])

    @property
    def reference(self):
        return self.epochs[0][1]

    def grid_at(self, step):
        current = self.epochs[0][1]
        for start, grid in self.epochs:
            if start <= step:
                current = grid
        return current

    def zeroed(self):
        """The same schedule geometry with every epoch hazard-free."""
        return HazardSchedule([(start, grid.zeros_like()) for start, grid in self.epochs])


def synthetic_flood_grid(width, height, return_periods=DEFAULT_RETURN_PERIODS,
                         rng=None, n_hotspots=3, max_depth=6.0, dry_margin=0.25):
    """
    Builds a riverine-like hazard grid for desk experiments: depth
    decays with distance from `n_hotspots` random channel cells and
    grows with ln(RP), so layers are monotone by construction.
    """
    rng = np.random.default_rng() if rng is None else rng
    return_periods = tuple(sorted(float(rp) for rp in return_periods))
    ys, xs = np.mgrid[0:height, 0:width]
    distance = np.full((height, width), np.inf)
    for _ in range(max(1, n_hotspots)):
        hx, hy = rng.integers(0, width), rng.integers(0, height)
        distance = np.minimum(distance, np.hypot(xs - hx, ys - hy))
    scale = max(width, height) / 8.0
    exposure = np.exp(-distance / scale)
    growth = np.log1p(np.array(return_periods)) / np.log1p(return_periods[-1])
    layers = np.maximum(
        0.0,
        max_depth * growth[:, np.newaxis, np.newaxis] * exposure[np.newaxis] - dry_margin)
    return HazardGrid.from_layers(return_periods, layers)
