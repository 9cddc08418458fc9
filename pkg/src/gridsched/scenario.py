"""Monte-Carlo scenario generation and fast-forward reduction.

Six hourly series are uncertain: day-ahead price, real-time price,
ambient temperature, solar irradiance, wind speed, and non-HVAC load.
Each (series, slot) value is sampled independently as

    value = forecast * (1 + rel_std * z)

where z is a standard normal obtained by pushing a Latin Hypercube
sample through the inverse normal CDF.  Physically non-negative series
(irradiance, wind speed, load) are clamped at zero after sampling.

Randomness comes from numpy's PCG64 generator so scenario sets are
reproducible from (seed, n) alone; the inverse CDF is scipy's ``ndtri``
(machine-precision, far below the 1e-9 requirement).

Reduction is the greedy fast-forward algorithm under a transport
metric: iteratively keep the scenario that minimizes the probability-
weighted distance from every unkept scenario to its nearest kept one,
then fold each unkept scenario's probability into its nearest kept
neighbour.  Distances are weighted Euclidean norms over all (series,
slot) coordinates with each series divided by its mean scale first,
otherwise kW-scale loads would drown $/kWh-scale prices.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtri

from .errors import InvalidParameterError

SERIES_NAMES = ("price_da", "price_rt", "ambient", "irradiance", "wind_speed", "nonhvac_load")
_NONNEGATIVE = ("irradiance", "wind_speed", "nonhvac_load")

CSV_HEADER = [
    "scenario_id",
    "prob",
    "slot",
    "price_da",
    "price_rt",
    "ambient_c",
    "irradiance",
    "wind_mps",
    "load_kw",
]


def _series_array(values, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float)).copy()
    if arr.ndim != 1:
        raise InvalidParameterError(f"{name} must be one-dimensional")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ForecastSeries:
    """Point forecasts for the six uncertain hourly series."""

    price_da: np.ndarray
    price_rt: np.ndarray
    ambient: np.ndarray
    irradiance: np.ndarray
    wind_speed: np.ndarray
    nonhvac_load: np.ndarray

    def __post_init__(self):
        for name in SERIES_NAMES:
            object.__setattr__(self, name, _series_array(getattr(self, name), name))
        n = len(self.price_da)
        for name in SERIES_NAMES:
            if len(getattr(self, name)) != n:
                raise InvalidParameterError("all forecast series must share one length")
        for name in _NONNEGATIVE:
            if np.any(getattr(self, name) < 0.0):
                raise InvalidParameterError(f"{name} must be non-negative")

    @property
    def slots(self) -> int:
        return len(self.price_da)

    def stacked(self) -> np.ndarray:
        return np.stack([getattr(self, name) for name in SERIES_NAMES])


@dataclass(frozen=True)
class UncertaintySpec:
    """Relative standard deviation per series (fraction of the forecast)."""

    wind_speed: float = 0.10
    nonhvac_load: float = 0.03
    irradiance: float = 0.10
    ambient: float = 0.05
    price_da: float = 0.05
    price_rt: float = 0.15

    def __post_init__(self):
        for name in SERIES_NAMES:
            if getattr(self, name) < 0.0:
                raise InvalidParameterError(f"{name} relative std must be non-negative")

    def as_vector(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in SERIES_NAMES])


@dataclass(frozen=True)
class Scenario:
    """One realized draw of all six series plus its probability."""

    price_da: np.ndarray
    price_rt: np.ndarray
    ambient: np.ndarray
    irradiance: np.ndarray
    wind_speed: np.ndarray
    nonhvac_load: np.ndarray
    probability: float

    def __post_init__(self):
        for name in SERIES_NAMES:
            object.__setattr__(self, name, _series_array(getattr(self, name), name))
        if not 0.0 < self.probability <= 1.0:
            raise InvalidParameterError("probability must lie in (0, 1]")
        n = len(self.price_da)
        for name in SERIES_NAMES:
            if len(getattr(self, name)) != n:
                raise InvalidParameterError("all scenario series must share one length")

    @property
    def slots(self) -> int:
        return len(self.price_da)

    def stacked(self) -> np.ndarray:
        return np.stack([getattr(self, name) for name in SERIES_NAMES])


@dataclass(frozen=True)
class ScenarioSet:
    """Weighted scenario collection; probabilities sum to one."""

    scenarios: tuple[Scenario, ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        if not self.scenarios:
            raise InvalidParameterError("scenario set must be non-empty")
        total = sum(s.probability for s in self.scenarios)
        if abs(total - 1.0) > 1e-12:
            raise InvalidParameterError(f"probabilities sum to {total!r}, not 1")
        slots = self.scenarios[0].slots
        if any(s.slots != slots for s in self.scenarios):
            raise InvalidParameterError("scenarios must share one slot count")

    def __len__(self) -> int:
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)

    @property
    def slots(self) -> int:
        return self.scenarios[0].slots

    def probabilities(self) -> np.ndarray:
        return np.array([s.probability for s in self.scenarios])

    def data_matrix(self) -> np.ndarray:
        """(n_scenarios, 6, slots) value cube."""
        return np.stack([s.stacked() for s in self.scenarios])


def lhs_sample(n: int, dims: int, seed: int) -> np.ndarray:
    """Latin Hypercube sample in [0, 1): per dimension, one point per
    stratum [k/n, (k+1)/n) with a seeded uniform stratum-to-row
    permutation and a seeded uniform within-stratum offset."""
    if n < 1 or dims < 1:
        raise InvalidParameterError("n and dims must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    out = np.empty((n, dims))
    for d in range(dims):
        perm = rng.permutation(n)
        offsets = rng.random(n)
        out[:, d] = (perm + offsets) / n
    return out


def sample_scenarios(
    forecast: ForecastSeries, spec: UncertaintySpec, n: int, seed: int
) -> ScenarioSet:
    """Equal-probability LHS scenario set around the forecast."""
    if n < 1:
        raise InvalidParameterError("n must be at least 1")
    nh = forecast.slots
    u = lhs_sample(n, 6 * nh, seed)
    # endpoint guard: ndtri(0) would be -inf
    z = ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))
    rel = spec.as_vector()
    base = forecast.stacked()
    prob = 1.0 / n
    scenarios = []
    for s in range(n):
        zs = z[s].reshape(6, nh)
        values = base * (1.0 + rel[:, None] * zs)
        data = {}
        for i, name in enumerate(SERIES_NAMES):
            col = values[i]
            if name in _NONNEGATIVE:
                col = np.maximum(col, 0.0)
            data[name] = col
        scenarios.append(Scenario(probability=prob, **data))
    return ScenarioSet(scenarios=tuple(scenarios), seed=seed)


def series_scales(sset: ScenarioSet) -> np.ndarray:
    """Per-series normalization scale: probability-weighted mean magnitude.

    A proxy for the forecast mean (the forecast itself is not carried by
    the set); series with near-zero mean fall back to scale 1.
    """
    cube = sset.data_matrix()
    prob = sset.probabilities()
    means = np.abs(np.tensordot(prob, cube, axes=(0, 0))).mean(axis=1)
    return np.where(means > 1e-9, means, 1.0)


def scenario_distance(a: Scenario, b: Scenario, weights=None, scales=None) -> float:
    """Weighted Euclidean distance over all (series, slot) coordinates."""
    if a.slots != b.slots:
        raise InvalidParameterError("scenarios must share one slot count")
    w = np.ones(6) if weights is None else np.asarray(weights, dtype=float)
    s = np.ones(6) if scales is None else np.asarray(scales, dtype=float)
    diff = (a.stacked() - b.stacked()) / s[:, None]
    return float(np.sqrt(np.sum(w[:, None] * diff * diff)))


def _distance_matrix(sset: ScenarioSet, weights, scales) -> np.ndarray:
    w = np.ones(6) if weights is None else np.asarray(weights, dtype=float)
    cube = sset.data_matrix() / scales[None, :, None]
    flat = (cube * np.sqrt(w)[None, :, None]).reshape(len(sset), -1)
    sq = np.sum(flat * flat, axis=1)
    gram = flat @ flat.T
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * gram, 0.0)
    d = np.sqrt(d2)
    np.fill_diagonal(d, 0.0)
    return d


def reduce_fast_forward(sset: ScenarioSet, k: int, weights=None) -> ScenarioSet:
    """Greedy fast-forward selection of ``k`` scenarios with probability
    redistribution to nearest kept neighbours."""
    n = len(sset)
    if not 1 <= k <= n:
        raise InvalidParameterError(f"k must lie in [1, {n}]")
    if k == n:
        return sset
    scales = series_scales(sset)
    dist = _distance_matrix(sset, weights, scales)
    prob = sset.probabilities()

    selected: list[int] = []
    dmin = np.full(n, np.inf)
    active_prob = prob.copy()
    for _ in range(k):
        # score(u) = sum_j rho_j * min(dmin_j, d_ju) over unselected j
        cand = np.minimum(dmin[:, None], dist)
        scores = active_prob @ cand
        scores[selected] = np.inf
        u = int(np.argmin(scores))
        selected.append(u)
        dmin = np.minimum(dmin, dist[:, u])
        active_prob[u] = 0.0

    selected_sorted = sorted(selected)
    sel = np.array(selected_sorted)
    new_prob = prob[sel].copy()
    for j in range(n):
        if j in selected:
            continue
        nearest = int(np.argmin(dist[j, sel]))
        new_prob[nearest] += prob[j]

    out = [
        replace(sset.scenarios[idx], probability=float(p))
        for idx, p in zip(selected_sorted, new_prob)
    ]
    return ScenarioSet(scenarios=tuple(out), seed=sset.seed)


def kantorovich_distance(full: ScenarioSet, reduced: ScenarioSet, weights=None) -> float:
    """Transport distance sum_j rho_j * min_i d(xi_j, xi_i): the standard
    reduction quality measure (reduced must live on full's support)."""
    if len(reduced) < 1:
        raise InvalidParameterError("reduced set must be non-empty")
    scales = series_scales(full)
    w = np.ones(6) if weights is None else np.asarray(weights, dtype=float)
    cube_f = full.data_matrix() / scales[None, :, None]
    cube_r = reduced.data_matrix() / scales[None, :, None]
    flat_f = (cube_f * np.sqrt(w)[None, :, None]).reshape(len(full), -1)
    flat_r = (cube_r * np.sqrt(w)[None, :, None]).reshape(len(reduced), -1)
    sq_f = np.sum(flat_f * flat_f, axis=1)
    sq_r = np.sum(flat_r * flat_r, axis=1)
    d2 = np.maximum(sq_f[:, None] + sq_r[None, :] - 2.0 * flat_f @ flat_r.T, 0.0)
    dmin = np.sqrt(d2).min(axis=1)
    return float(full.probabilities() @ dmin)


def write_scenarios_csv(sset: ScenarioSet, fp) -> None:
    """One row per (scenario, slot).  Data columns carry 12 significant
    digits; probabilities carry 17 so that reloading conserves the exact
    probability sum."""
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for sid, sc in enumerate(sset.scenarios):
        prob = f"{sc.probability:.17g}"
        for t in range(sc.slots):
            writer.writerow(
                [
                    sid,
                    prob,
                    t + 1,
                    f"{sc.price_da[t]:.12g}",
                    f"{sc.price_rt[t]:.12g}",
                    f"{sc.ambient[t]:.12g}",
                    f"{sc.irradiance[t]:.12g}",
                    f"{sc.wind_speed[t]:.12g}",
                    f"{sc.nonhvac_load[t]:.12g}",
                ]
            )


def scenarios_to_csv_text(sset: ScenarioSet) -> str:
    buf = io.StringIO()
    write_scenarios_csv(sset, buf)
    return buf.getvalue()


def read_scenarios_csv(fp, seed: int = 0) -> ScenarioSet:
    reader = csv.reader(fp)
    header = next(reader, None)
    if header != CSV_HEADER:
        raise InvalidParameterError(f"unexpected scenario CSV header {header!r}")
    rows: dict[int, dict] = {}
    for row in reader:
        if not row:
            continue
        sid = int(row[0])
        rec = rows.setdefault(sid, {"prob": float(row[1]), "slots": [], "values": []})
        rec["slots"].append(int(row[2]))
        rec["values"].append([float(v) for v in row[3:9]])
    scenarios = []
    for sid in sorted(rows):
        rec = rows[sid]
        order = np.argsort(rec["slots"])
        vals = np.array(rec["values"])[order].T
        scenarios.append(
            Scenario(
                price_da=vals[0],
                price_rt=vals[1],
                ambient=vals[2],
                irradiance=vals[3],
                wind_speed=vals[4],
                nonhvac_load=vals[5],
                probability=rec["prob"],
            )
        )
    return ScenarioSet(scenarios=tuple(scenarios), seed=seed)
