"""
Monte Carlo - Trajectory sampling, threshold estimation and fault-count
importance sampling for memory experiments
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from decoder import decode_record
from noise_channels import (
    ChannelKind,
    ChannelMode,
    NoiseChannel,
    SignedSampleWeight,
    apply_channel,
)
from pauli_algebra import PauliString
from pfsr_state import PFSRState
from statistics_calculator import StatisticsCalculator
from surface_code import (
    ChannelNoise,
    FaultInjection,
    MemoryExperiment,
    MemoryMode,
    Operation,
    memory_experiment,
)

logger = logging.getLogger("pfsr_sim")

FIXED_K_TAG_OFFSET = 1000
CSV_COLUMNS = [
    "experiment_id", "d", "mode", "channel", "param", "k_or_total",
    "shots", "failures", "discards", "rate", "stderr",
]


class NoCrossingError(RuntimeError):
    """Logical-rate curves of consecutive distances never cross in the grid"""

    def __init__(self, message: str, curves: Optional[Dict[int, List[Tuple[float, float]]]] = None):
        super().__init__(message)
        self.curves = curves or {}


class FaultToleranceViolation(RuntimeError):
    """A kept failure was observed with fewer faults than the code can always handle"""


class EmptyWindowError(ValueError):
    """No fault count in the requested window has samples"""


class TrajectoryBudgetExceeded(RuntimeError):
    """More trajectories raised than the configured error budget allows"""


def trajectory_rng(seed: int, tag: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for trajectory ``index`` of stream ``tag``"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, tag, index])))


# ----------------------------------------------------------------------
# Results
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PointSpec:
    """Everything a worker needs to run trajectories of one (d, parameter) point"""
    d: int
    channel: Optional[NoiseChannel]
    basis: str = "Z"
    noise_model: MemoryMode = MemoryMode.PHENOMENOLOGICAL
    p_meas: Optional[float] = None
    epsilon: float = 0.0
    postselect: bool = False
    origin: str = "top_left"

    def experiment(self) -> MemoryExperiment:
        return memory_experiment(self.d, self.basis, self.noise_model, self.origin)

    @property
    def param(self) -> float:
        return self.channel.physical_rate if self.channel is not None else 0.0


@dataclass
class ExperimentResult:
    """One row of the results table"""
    experiment_id: str
    d: int
    mode: str
    channel: str
    param: float
    k_or_total: str
    shots: int
    failures: int
    discards: int
    rate: float
    stderr: float
    noise_model: str = MemoryMode.PHENOMENOLOGICAL.value
    epsilon: float = 0.0
    weight_variance: float = 0.0
    max_entries: int = 1
    mean_max_entries: float = 1.0
    truncation_fallbacks: int = 0
    trajectory_errors: int = 0

    def __post_init__(self):
        if self.failures > self.shots:
            raise ValueError("failures cannot exceed shots")

    @property
    def kept(self) -> int:
        return self.shots - self.discards - self.trajectory_errors

    def to_row(self) -> Dict:
        return asdict(self)


# One trajectory: (fail, discard, weight, max_entries, fallbacks, error)
Tally = Tuple[int, int, float, int, int, int]


def memory_chunk(spec: PointSpec, seed: int, tag: int, start: int, stop: int) -> List[Tally]:
    experiment = spec.experiment()
    rows = []
    for i in range(start, stop):
        rng = trajectory_rng(seed, tag, i)
        noise = ChannelNoise(spec.channel, spec.p_meas, spec.epsilon) if spec.channel is not None else None
        try:
            record = experiment.run(rng, noise, postselect=spec.postselect)
        except (ValueError, RuntimeError) as exc:
            logger.warning("Trajectory %d of stream %d failed: %s", i, tag, exc)
            rows.append((0, 0, 0.0, 0, 0, 1))
            continue
        fail = 0 if record.discarded else decode_record(record)
        rows.append((fail, int(record.discarded), record.weight, record.max_entries, record.truncation_fallbacks, 0))
    return rows


def _chunk_bounds(shots: int, workers: int, offset: int = 0) -> List[Tuple[int, int]]:
    size = max(1, math.ceil(shots / (4 * max(workers, 1))))
    end = offset + shots
    return [(start, min(start + size, end)) for start in range(offset, end, size)]


def run_chunks(
    worker: Callable,
    args: Tuple,
    shots: int,
    workers: int = 1,
    progress: bool = False,
    desc: str = "trajectories",
    offset: int = 0,
) -> List:
    """
    Run ``worker(*args, start, stop)`` over trajectory chunks and
    concatenate results in trajectory order.
    """
    chunks = _chunk_bounds(shots, workers, offset)
    rows: List = []
    if workers <= 1:
        for start, stop in tqdm(chunks, desc=desc, disable=not progress, leave=False):
            rows.extend(worker(*args, start, stop))
        return rows
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(worker, *args, start, stop) for start, stop in chunks]
        for future in tqdm(futures, desc=desc, disable=not progress, leave=False):
            rows.extend(future.result())
    return rows


def summarize_tallies(
    spec: PointSpec,
    tallies: Sequence[Tally],
    experiment_id: str = "",
    max_trajectory_errors: int = 0,
) -> ExperimentResult:
    data = np.asarray(tallies, dtype=float).reshape(-1, 6)
    fails, discards, weights, entries, fallbacks, errors = data.T
    error_count = int(errors.sum())
    if error_count > max_trajectory_errors:
        raise TrajectoryBudgetExceeded(f"{error_count} trajectory errors (budget {max_trajectory_errors})")
    kept_mask = (discards == 0) & (errors == 0)
    kept = int(kept_mask.sum())
    failures = int(fails[kept_mask].sum())

    quasi = spec.channel is not None and spec.channel.mode == ChannelMode.QUASIPROBABILITY
    if quasi:
        samples = fails[kept_mask] * weights[kept_mask]
        rate = StatisticsCalculator.signed_mean(fails[kept_mask], weights[kept_mask])
        stderr = StatisticsCalculator.sample_stderr(samples)
        weight_variance = float(weights[kept_mask].var(ddof=1)) if kept > 1 else 0.0
    else:
        rate = failures / kept if kept else 0.0
        stderr = StatisticsCalculator.binomial_stderr(failures, kept)
        weight_variance = 0.0

    ran = entries[errors == 0]
    return ExperimentResult(
        experiment_id=experiment_id,
        d=spec.d,
        mode=spec.channel.mode.value if spec.channel is not None else ChannelMode.EXACT.value,
        channel=spec.channel.kind.value if spec.channel is not None else "none",
        param=spec.param,
        k_or_total="total",
        shots=len(data),
        failures=failures,
        discards=int(discards.sum()),
        rate=rate,
        stderr=stderr,
        noise_model=spec.noise_model.value,
        epsilon=spec.epsilon,
        weight_variance=weight_variance,
        max_entries=int(ran.max()) if ran.size else 0,
        mean_max_entries=float(ran.mean()) if ran.size else 0.0,
        truncation_fallbacks=int(fallbacks.sum()),
        trajectory_errors=error_count,
    )


def estimate_rate(
    spec: PointSpec,
    shots: int,
    seed: int,
    tag: int = 0,
    workers: int = 1,
    experiment_id: str = "",
    max_trajectory_errors: int = 0,
    progress: bool = False,
) -> ExperimentResult:
    """
    Logical error rate of one point from independent memory trajectories

    Args:
        spec: Distance, channel and schedule of the point
        shots: Number of trajectories
        seed: Master seed; trajectory i uses the stream (seed, tag, i)
        tag: Stream tag separating grid points
        workers: Process count (results do not depend on it)
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    tallies = run_chunks(
        memory_chunk, (spec, seed, tag), shots, workers, progress,
        desc=f"d={spec.d} p={spec.param:.4g}",
    )
    result = summarize_tallies(spec, tallies, experiment_id, max_trajectory_errors)
    logger.info("d=%d param=%.5g rate=%.4g ± %.2g (%d kept)", spec.d, spec.param, result.rate, result.stderr, result.kept)
    return result


def results_frame(results: Iterable[ExperimentResult]) -> pd.DataFrame:
    rows = [r.to_row() for r in results]
    frame = pd.DataFrame(rows)
    if frame.empty:
        return pd.DataFrame(columns=CSV_COLUMNS)
    extra = [c for c in frame.columns if c not in CSV_COLUMNS]
    return frame[CSV_COLUMNS + extra]


# ----------------------------------------------------------------------
# Threshold estimation
# ----------------------------------------------------------------------

@dataclass
class ThresholdEstimate:
    threshold: float
    ci_low: float
    ci_high: float
    crossings: Dict[Tuple[int, int], float]
    bootstrap_misses: int = 0

    def describe(self) -> str:
        return f"{self.threshold:.5g} (95% CI {self.ci_low:.5g} – {self.ci_high:.5g})"


def _curves(data: pd.DataFrame) -> Dict[int, pd.DataFrame]:
    frame = data.copy()
    if "kept" not in frame.columns:
        errors = frame["trajectory_errors"] if "trajectory_errors" in frame.columns else 0
        frame["kept"] = frame["shots"] - frame["discards"] - errors
    return {int(d): group.sort_values("param") for d, group in frame.groupby("d")}


def _mean_crossing(grid: np.ndarray, rates: Dict[int, np.ndarray]) -> Tuple[Optional[float], Dict]:
    distances = sorted(rates)
    found = {}
    for small, large in zip(distances, distances[1:]):
        point = StatisticsCalculator.crossing_point(grid, rates[small], rates[large])
        if point is not None:
            found[(small, large)] = point
    if not found:
        return None, found
    return float(np.mean(list(found.values()))), found


def estimate_threshold(
    data: Union[pd.DataFrame, Sequence[ExperimentResult]],
    n_boot: int = 200,
    seed: int = 0,
    level: float = 0.95,
) -> ThresholdEstimate:
    """
    Mean crossing of consecutive-distance curves with a parametric
    bootstrap interval over the per-point binomial counts.
    """
    frame = data if isinstance(data, pd.DataFrame) else results_frame(data)
    curves = _curves(frame)
    if len(curves) < 2:
        raise ValueError("Threshold estimation needs at least two distances")
    grids = [tuple(np.round(c["param"].to_numpy(), 15)) for c in curves.values()]
    if len(set(grids)) != 1:
        raise ValueError("All distances must share the same parameter grid")
    grid = np.asarray(grids[0], dtype=float)
    rates = {d: c["rate"].to_numpy(dtype=float) for d, c in curves.items()}

    threshold, crossings = _mean_crossing(grid, rates)
    if threshold is None:
        diagnostics = {d: list(zip(grid.tolist(), r.tolist())) for d, r in rates.items()}
        raise NoCrossingError("Logical-rate curves do not cross inside the grid", diagnostics)

    rng = np.random.default_rng(seed)
    draws = []
    misses = 0
    for _ in range(n_boot):
        resampled = {}
        for d, c in curves.items():
            kept = c["kept"].to_numpy()
            failures = np.round(np.clip(c["rate"].to_numpy(dtype=float), 0.0, 1.0) * kept)
            resampled[d] = StatisticsCalculator.resample_rates(failures, kept, rng)
        value, _ = _mean_crossing(grid, resampled)
        if value is None:
            misses += 1
        else:
            draws.append(value)
    if misses:
        logger.warning("%d of %d bootstrap resamples had no crossing", misses, n_boot)
    low, high = StatisticsCalculator.percentile_interval(draws, level) if draws else (threshold, threshold)
    return ThresholdEstimate(threshold, low, high, crossings, misses)


# ----------------------------------------------------------------------
# Fault-count importance sampling
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class FaultLocation:
    index: int
    round: int
    role: str
    kind: ChannelKind
    qubit: Optional[int] = None
    stabilizer: Optional[int] = None


@dataclass
class FaultModel:
    """Ordered fault locations of a circuit with a uniform physical rate"""
    locations: List[FaultLocation]
    p: float = 0.0

    @property
    def n_locations(self) -> int:
        return len(self.locations)

    def counts(self) -> Dict[str, int]:
        tally: Dict[str, int] = {}
        for loc in self.locations:
            tally[loc.kind.value] = tally.get(loc.kind.value, 0) + 1
        return tally


def enumerate_faults(circuit: Union[MemoryExperiment, Sequence[Operation]], rounds: int = 1) -> FaultModel:
    """One location per noise site, rounds in order, sites in schedule order"""
    if isinstance(circuit, MemoryExperiment):
        operations, rounds = circuit.operations, circuit.d
    else:
        operations = list(circuit)
    sites = [op.site for op in operations if op.site is not None]
    locations = [
        FaultLocation(r * len(sites) + site.position, r, site.role.value, site.fault_kind, site.qubit, site.stabilizer)
        for r in range(rounds)
        for site in sites
    ]
    return FaultModel(locations)


def draw_faults(model: FaultModel, k: int, rng: np.random.Generator) -> Dict[int, str]:
    """Uniform k-subset of locations, each with a uniform nontrivial fault"""
    if not 0 <= k <= model.n_locations:
        raise ValueError(f"k={k} outside [0, {model.n_locations}]")
    chosen = np.sort(rng.choice(model.n_locations, size=k, replace=False)) if k else []
    faults = {}
    for idx in chosen:
        location = model.locations[int(idx)]
        if location.kind == ChannelKind.DEPOLARIZING:
            faults[location.index] = "XYZ"[int(rng.integers(3))]
        elif location.kind == ChannelKind.BIT_FLIP:
            faults[location.index] = "X"
        elif location.kind == ChannelKind.PHASE_FLIP:
            faults[location.index] = "Z"
        else:
            faults[location.index] = "FLIP"
    return faults


def sample_fixed_k(
    experiment: MemoryExperiment,
    model: FaultModel,
    k: int,
    rng: np.random.Generator,
    postselect: bool = False,
) -> Tuple[int, int]:
    """(fail, discard) of one trajectory with exactly k injected faults"""
    faults = draw_faults(model, k, rng)
    record = experiment.run(rng, FaultInjection(faults), postselect=postselect)
    if record.discarded:
        return 0, 1
    return decode_record(record), 0


def _fixed_k_chunk(spec: PointSpec, seed: int, k: int, start: int, stop: int) -> List[Tuple[int, int]]:
    experiment = spec.experiment()
    model = enumerate_faults(experiment)
    return [
        sample_fixed_k(experiment, model, k, trajectory_rng(seed, FIXED_K_TAG_OFFSET + k, i), spec.postselect)
        for i in range(start, stop)
    ]


@dataclass
class FaultCountEstimate:
    """Per-k conditional failure counts of a fixed-k sampling campaign"""
    n_locations: int
    d: int
    postselect: bool = False
    samples: Dict[int, int] = field(default_factory=dict)
    failures: Dict[int, int] = field(default_factory=dict)
    discards: Dict[int, int] = field(default_factory=dict)

    @property
    def zero_block_floor(self) -> int:
        """Fault counts below this never produce a kept failure"""
        return self.d if self.postselect else math.ceil(self.d / 2)

    @property
    def ks(self) -> List[int]:
        return sorted(k for k, n in self.samples.items() if n > 0)

    def add(self, k: int, fail: int, discard: int):
        self.samples[k] = self.samples.get(k, 0) + 1
        self.failures[k] = self.failures.get(k, 0) + int(fail)
        self.discards[k] = self.discards.get(k, 0) + int(discard)

    def conditional_rate(self, k: int) -> float:
        n = self.samples.get(k, 0)
        return self.failures.get(k, 0) / n if n else 0.0

    def verify_zero_block(self):
        bad = {k: self.failures[k] for k in self.ks if k < self.zero_block_floor and self.failures.get(k, 0)}
        if bad:
            raise FaultToleranceViolation(f"Kept failures below k={self.zero_block_floor}: {bad}")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([
            {
                "k": k,
                "samples": self.samples[k],
                "failures": self.failures.get(k, 0),
                "discards": self.discards.get(k, 0),
                "p_fail_given_k": self.conditional_rate(k),
            }
            for k in self.ks
        ])


def collect_fault_counts(
    spec: PointSpec,
    plan: Dict[int, int],
    seed: int,
    workers: int = 1,
    estimate: Optional[FaultCountEstimate] = None,
    progress: bool = False,
) -> FaultCountEstimate:
    """Run ``plan[k]`` fixed-k trajectories for every k; appends to ``estimate`` when given"""
    experiment = spec.experiment()
    if estimate is None:
        estimate = FaultCountEstimate(experiment.num_locations, spec.d, spec.postselect)
    for k in sorted(plan):
        shots = plan[k]
        if shots <= 0:
            continue
        # Continue the stream where earlier batches for this k stopped
        offset = estimate.samples.get(k, 0)
        tallies = run_chunks(
            _fixed_k_chunk, (spec, seed, k), shots, workers, progress, desc=f"k={k}", offset=offset
        )
        for fail, discard in tallies:
            estimate.add(k, fail, discard)
    return estimate


def importance_estimate(
    estimate: FaultCountEstimate,
    p_grid: Sequence[float],
    k_window: Optional[Tuple[int, int]] = None,
) -> pd.DataFrame:
    """
    p̂_fail(p) = Σ_k P(k) p̂_fail|k over the sampled window, with the
    per-p variance Σ_k P(k)² p̂(1-p̂)/N_k and the neglected upper tail.
    """
    ks = [k for k in estimate.ks if k_window is None or k_window[0] <= k <= k_window[1]]
    if not ks:
        raise EmptyWindowError(f"No sampled fault counts in window {k_window}")
    n = estimate.n_locations
    rates = np.array([estimate.conditional_rate(k) for k in ks])
    counts = np.array([estimate.samples[k] for k in ks], dtype=float)
    rows = []
    for p in p_grid:
        weights = StatisticsCalculator.binomial_weights(n, p, ks)
        value = float(np.sum(weights * rates))
        variance = float(np.sum(weights ** 2 * rates * (1.0 - rates) / counts))
        rows.append({
            "p": p,
            "p_fail": value,
            "variance": variance,
            "stderr": math.sqrt(variance),
            "tail_bound": StatisticsCalculator.binomial_tail(n, p, max(ks)),
        })
    return pd.DataFrame(rows)


def allocate_shots(
    pilot: FaultCountEstimate,
    p_targets: Sequence[float],
    budget: int,
    floor: int = 100,
    tail_fraction: float = 0.01,
) -> Dict[int, int]:
    """
    Shots per k proportional to each k's share of the estimate, over the
    smallest window that leaves less than ``tail_fraction`` of it out.
    """
    ks = pilot.ks
    if not ks:
        raise EmptyWindowError("Pilot has no samples")
    n = pilot.n_locations
    rates = np.array([pilot.conditional_rate(k) for k in ks])
    shares = np.zeros(len(ks))
    for p in p_targets:
        contribution = StatisticsCalculator.binomial_weights(n, p, ks) * rates
        total = contribution.sum()
        if total > 0:
            shares = np.maximum(shares, contribution / total)

    if not np.any(shares > 0):
        logger.warning("Pilot shows no failures; allocating uniformly")
        each = budget // len(ks)
        return {k: each for k in ks}

    order = np.argsort(-shares, kind="stable")
    covered = 0.0
    chosen = []
    total_share = shares.sum()
    for i in order:
        if shares[i] <= 0:
            break
        chosen.append(i)
        covered += shares[i]
        if covered >= (1.0 - tail_fraction) * total_share:
            break
    low, high = min(chosen), max(chosen)
    window = list(range(low, high + 1))
    floor = min(floor, budget // len(window))
    spare = budget - floor * len(window)
    window_share = shares[window].sum()
    return {ks[i]: floor + int(spare * shares[i] / window_share) for i in window}


def brute_force_estimate(spec: PointSpec, shots: int, seed: int, workers: int = 1) -> ExperimentResult:
    """Direct sampling at the point's channel, used to cross-check the importance sampler"""
    return estimate_rate(spec, shots, seed, tag=FIXED_K_TAG_OFFSET - 1, workers=workers)


# ----------------------------------------------------------------------
# Quasiprobability estimator
# ----------------------------------------------------------------------

@dataclass
class QuasiEstimate:
    mean: float
    stderr: float
    weight_variance: float
    shots: int


def estimate_quasi_expectation(
    channel: NoiseChannel,
    applications: int,
    observable: str,
    shots: int,
    seed: int,
    prepare: Sequence[Tuple[str, Sequence[int]]] = (("H", (0,)),),
) -> QuasiEstimate:
    """
    Signed-weight estimate of ⟨observable⟩ after ``applications`` uses of a
    single-qubit channel in quasiprobability mode.
    """
    if channel.mode != ChannelMode.QUASIPROBABILITY:
        raise ValueError("estimate_quasi_expectation needs a quasiprobability channel")
    observable_op = PauliString.from_literal(observable)
    values = np.empty(shots)
    weights = np.empty(shots)
    for i in range(shots):
        rng = trajectory_rng(seed, 0, i)
        state = PFSRState.init_zero(observable_op.n)
        for name, qubits in prepare:
            state.apply_gate(name, qubits)
        weight = SignedSampleWeight()
        for _ in range(applications):
            _, weight = apply_channel(state, 0, channel, rng, weight)
        values[i] = weight.value * state.expectation_pauli(observable_op)
        weights[i] = weight.value
    return QuasiEstimate(
        mean=float(values.mean()),
        stderr=StatisticsCalculator.sample_stderr(values),
        weight_variance=float(weights.var(ddof=1)) if shots > 1 else 0.0,
        shots=shots,
    )
