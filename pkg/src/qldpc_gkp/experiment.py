"""Monte Carlo memory experiment: sample GKP faults, decode, check for logical failure.

Trials are drawn in fixed-size chunks. Chunk ``c`` of squeezing point ``p``
always uses the random substream ``SeedSequence(seed, spawn_key=(p, c))``,
and every LLR mode decodes the same samples. Each mode stops at the exact
trial of its ``failure_target``-th failure (or at the trial cap), counted in
chunk order, so the results do not depend on how many workers ran.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from statistics import NormalDist
from typing import Callable, Optional, Sequence

import numpy as np

from . import gf2, gkp
from .decoder import BpOsdDecoder
from .detector_model import CircuitCheckMatrix, LlrMode, build_circuit_check_matrix, init_llrs, probability_to_llr
from .gkp import GkpParams, Mechanism
from .io import file_digest, load_bundle

CSV_HEADER = ("code", "mode", "squeezing_db", "trials", "failures", "fer", "fer_lo", "fer_hi", "seed")
Z95 = NormalDist().inv_cdf(0.975)


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# sampling


@dataclass
class FaultSample:
    """A batch of fault draws; every array has a leading shot axis."""

    shifts: np.ndarray  # (B, L) position shifts
    residues: np.ndarray  # (B, L) shifts mod sqrt(pi)
    location_flips: np.ndarray  # (B, L) uint8
    columns: np.ndarray  # (B, C) uint8
    data_error: np.ndarray  # (B, n) uint8, e0

    @property
    def shots(self) -> int:
        return self.shifts.shape[0]

    def shot(self, i: int) -> "FaultSample":
        return FaultSample(*(getattr(self, f.name)[i:i + 1] for f in fields(self)))


def _assemble(ccm: CircuitCheckMatrix, shifts, residues, flips) -> FaultSample:
    flips = np.asarray(flips, dtype=np.uint8)
    columns = (np.asarray((ccm.group_matrix.T @ flips.T.astype(np.int64))).T % 2).astype(np.uint8)
    data = (np.asarray((ccm.data_effects.T @ columns.T.astype(np.int64))).T % 2).astype(np.uint8)
    return FaultSample(shifts, residues, flips, columns, data)


def sample_faults(ccm: CircuitCheckMatrix, params: GkpParams, rng: np.random.Generator, shots: int = 1) -> FaultSample:
    s2 = params.base_variance
    L = ccm.n_locations
    shifts = np.zeros((shots, L))
    flips = np.zeros((shots, L), dtype=np.uint8)
    single_var = np.where(ccm.mechanisms[ccm.singles] == Mechanism.MEASURE, s2, 2.0 * s2)
    draws = rng.normal(size=(shots, len(ccm.singles))) * np.sqrt(single_var)
    shifts[:, ccm.singles] = draws
    flips[:, ccm.singles] = gkp.is_logical_flip(draws)
    if len(ccm.pairs):
        P = len(ccm.pairs)
        pair = gkp.sample_cnot_q_shifts(s2, rng, shots * P).reshape(shots, P, 2)
        ctl, tgt = ccm.pairs[:, 0], ccm.pairs[:, 1]
        shifts[:, ctl], shifts[:, tgt] = pair[..., 0], pair[..., 1]
        flips[:, ctl], flips[:, tgt] = gkp.classify_pairs(pair[..., 0], pair[..., 1], "q", s2)
    return _assemble(ccm, shifts, gkp.canonical_residue(shifts), flips)


def planted_sample(ccm: CircuitCheckMatrix, locations: Sequence[int]) -> FaultSample:
    """One noiseless shot with an exact sqrt(pi) shift at each given location."""
    shifts = np.zeros((1, ccm.n_locations))
    flips = np.zeros((1, ccm.n_locations), dtype=np.uint8)
    for i in locations:
        shifts[0, i] += gkp.SQRT_PI
        flips[0, i] ^= 1
    return _assemble(ccm, shifts, gkp.canonical_residue(shifts), flips)


# ---------------------------------------------------------------------------
# single trials


@dataclass(frozen=True)
class TrialOutcome:
    success: bool
    residual_weight: int
    decoder_converged: bool


@dataclass
class DecoderConfig:
    rule: str = "product_sum"
    max_iters: int = 32
    osd_order: int = 0
    min_sum_scale: float = 1.0

    def build(self, h) -> BpOsdDecoder:
        return BpOsdDecoder(h, self.max_iters, self.rule, self.osd_order, self.min_sum_scale)


class TrialRunner:
    """Decoders and base-code data for one circuit-level check matrix."""

    def __init__(self, ccm: CircuitCheckMatrix, decoder: Optional[DecoderConfig] = None):
        decoder = decoder or DecoderConfig()
        self.ccm = ccm
        self.decoder = decoder.build(ccm.matrix)
        self.base_decoder = decoder.build(ccm.code.h_z)
        self.h_z = ccm.code.h_z.astype(np.int64)
        self.logicals = gf2.logical_basis(ccm.code.h_x, ccm.code.h_z).astype(np.int64)

    def run(self, sample: FaultSample, mode, params: GkpParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Returns per-shot ``(success, residual_weight, converged)``."""
        ccm = self.ccm
        B = sample.shots
        syndromes = (np.asarray((ccm.matrix @ sample.columns.T.astype(np.int64))).T % 2).astype(np.uint8)
        llrs = np.broadcast_to(init_llrs(mode, ccm, params, sample), (B, ccm.n_columns))
        estimate = np.zeros((B, ccm.n_columns), dtype=np.uint8)
        converged = np.ones(B, dtype=bool)
        # zero syndrome with all-positive LLRs: BP returns the zero estimate at once
        todo = np.flatnonzero(syndromes.any(axis=1) | (llrs <= 0).any(axis=1))
        if todo.size:
            res = self.decoder.decode(syndromes[todo], llrs[todo])
            estimate[todo] = res.estimate
            converged[todo] = res.converged
        recovery = (np.asarray((ccm.data_effects.T @ estimate.T.astype(np.int64))).T % 2).astype(np.uint8)
        residual = sample.data_error ^ recovery
        base_syn = (residual.astype(np.int64) @ self.h_z.T % 2).astype(np.uint8)
        # bookkeeping identity: H_Z (e0 + e_hat) is the base decoder's input
        split = (sample.data_error.astype(np.int64) @ self.h_z.T + recovery.astype(np.int64) @ self.h_z.T) % 2
        if not np.array_equal(base_syn, split):
            raise RuntimeError("residual syndrome bookkeeping is inconsistent")
        correction = np.zeros_like(residual)
        busy = np.flatnonzero(base_syn.any(axis=1))
        if busy.size:
            base_llr = probability_to_llr(gkp.prior_flip_probability(2.0 * params.base_variance))
            correction[busy] = self.base_decoder.decode(base_syn[busy], np.full(residual.shape[1], base_llr)).estimate
        total = (residual ^ correction).astype(np.int64)
        clean = ~((total @ self.h_z.T) % 2).any(axis=1)
        logical = ((total @ self.logicals.T) % 2).any(axis=1) if self.logicals.size else np.zeros(B, dtype=bool)
        success = clean & ~logical
        return success, residual.sum(axis=1), converged


def run_trial(sample: FaultSample, ccm: CircuitCheckMatrix, mode, params: GkpParams,
              decoder: Optional[DecoderConfig] = None, runner: Optional[TrialRunner] = None) -> TrialOutcome:
    runner = runner or TrialRunner(ccm, decoder)
    ok, weight, conv = runner.run(sample.shot(0) if sample.shots != 1 else sample, mode, params)
    return TrialOutcome(bool(ok[0]), int(weight[0]), bool(conv[0]))


# ---------------------------------------------------------------------------
# estimates


@dataclass(frozen=True)
class FerEstimate:
    failures: int
    trials: int

    @property
    def fer(self) -> float:
        return self.failures / self.trials if self.trials else math.nan

    @property
    def wilson_interval(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.trials)


def wilson_interval(failures: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials <= 0:
        return (math.nan, math.nan)
    p = failures / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # rounding can push a bound past p at the extremes
    return max(0.0, min(p, centre - half)), min(1.0, max(p, centre + half))


# ---------------------------------------------------------------------------
# the deterministic Monte Carlo loop

# chunk_fn(rng, size, active_mode_indices) -> bool failures of shape (n_modes, size);
# rows of inactive modes are ignored.
ChunkFn = Callable[[np.random.Generator, int, tuple], np.ndarray]

_WORKER_FN: Optional[ChunkFn] = None


def _install(fn: ChunkFn) -> None:
    global _WORKER_FN
    _WORKER_FN = fn


def _chunk(seed: int, point: int, chunk: int, size: int, active: tuple) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(point, chunk)))
    return np.asarray(_WORKER_FN(rng, size, active), dtype=bool)


def monte_carlo(
    chunk_fn: ChunkFn,
    n_modes: int,
    failure_target: int,
    max_trials: int,
    seed: int,
    point: int = 0,
    chunk_size: int = 256,
    workers: int = 1,
    pool: Optional[ProcessPoolExecutor] = None,
) -> list[FerEstimate]:
    """Run chunks until every mode reaches its failure target or the trial cap."""
    if failure_target < 1:
        raise ConfigError("failure_target must be at least 1")
    if max_trials < 1 or chunk_size < 1:
        raise ConfigError("max_trials and chunk_size must be positive")
    failures = [0] * n_modes
    trials = [0] * n_modes
    done = [False] * n_modes
    chunk = 0
    total = 0
    while not all(done) and total < max_trials:
        active = tuple(i for i in range(n_modes) if not done[i])
        wave = []
        for _ in range(max(workers, 1)):
            if total >= max_trials:
                break
            size = min(chunk_size, max_trials - total)
            wave.append((chunk, size))
            chunk += 1
            total += size
        if pool is None:
            _install(chunk_fn)
            results = [_chunk(seed, point, c, s, active) for c, s in wave]
        else:
            results = list(pool.map(_chunk, *zip(*[(seed, point, c, s, active) for c, s in wave])))
        for (c, size), fails in zip(wave, results):
            for i in active:
                if done[i]:
                    continue
                hits = np.flatnonzero(fails[i][:size])
                need = failure_target - failures[i]
                if hits.size >= need:
                    failures[i] = failure_target
                    trials[i] += int(hits[need - 1]) + 1
                    done[i] = True
                else:
                    failures[i] += int(hits.size)
                    trials[i] += size
    return [FerEstimate(f, t) for f, t in zip(failures, trials)]


class _PointChunks:
    """Picklable chunk function covering every squeezing point of an experiment."""

    def __init__(self, ccm: CircuitCheckMatrix, decoder: DecoderConfig, modes: Sequence[str], points: Sequence[float]):
        self.ccm, self.decoder, self.modes, self.points = ccm, decoder, list(modes), list(points)
        self.point = 0
        self._runner: Optional[TrialRunner] = None

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_runner"] = None
        return state

    def runner(self) -> TrialRunner:
        if self._runner is None:
            self._runner = TrialRunner(self.ccm, self.decoder)
        return self._runner

    def __call__(self, rng, size, active):
        params = GkpParams(self.points[self.point])
        sample = sample_faults(self.ccm, params, rng, size)
        out = np.zeros((len(self.modes), size), dtype=bool)
        for i in active:
            ok, _, _ = self.runner().run(sample, self.modes[i], params)
            out[i] = ~ok
        return out


def _point_chunk(seed, point, chunk, size, active):
    _WORKER_FN.point = point
    return _chunk(seed, point, chunk, size, active)


# ---------------------------------------------------------------------------
# configuration and full runs


@dataclass
class ExperimentConfig:
    code: str = "repetition3"
    schedule: Optional[str] = None
    rounds: int = 3
    squeezing_db: list = field(default_factory=lambda: [10.0])
    modes: list = field(default_factory=lambda: [m.value for m in LlrMode])
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    failure_target: int = 1000
    max_trials: int = 10**7
    seed: int = 0
    chunk_size: int = 256
    workers: int = 1
    out: str = "results.csv"
    manifest: Optional[str] = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        dec = data.pop("decoder", {}) or {}
        if isinstance(dec, dict):
            dec_known = {f.name for f in fields(DecoderConfig)}
            if set(dec) - dec_known:
                raise ConfigError(f"unknown decoder fields: {sorted(set(dec) - dec_known)}")
            dec = DecoderConfig(**dec)
        cfg = cls(decoder=dec, **data)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> "ExperimentConfig":
        if not self.squeezing_db:
            raise ConfigError("the squeezing grid is empty")
        if self.rounds < 1:
            raise ConfigError("rounds must be at least 1")
        if self.failure_target < 1:
            raise ConfigError("failure_target must be at least 1 (a zero target would report fer = 0/0)")
        if self.max_trials < 1 or self.chunk_size < 1 or self.workers < 1:
            raise ConfigError("max_trials, chunk_size and workers must be positive")
        if not self.modes:
            raise ConfigError("no LLR modes requested")
        for m in self.modes:
            try:
                LlrMode(m)
            except ValueError:
                raise ConfigError(f"unknown mode {m!r}; choose from {[x.value for x in LlrMode]}") from None
        for db in self.squeezing_db:
            if not (isinstance(db, (int, float)) and math.isfinite(db)):
                raise ConfigError(f"bad squeezing value {db!r}")
        if self.decoder.rule not in ("product_sum", "min_sum"):
            raise ConfigError(f"unknown decoder rule {self.decoder.rule!r}")
        if self.decoder.max_iters < 1 or self.decoder.osd_order < 0:
            raise ConfigError("decoder needs max_iters >= 1 and osd_order >= 0")
        return self

    @property
    def manifest_path(self) -> Path:
        return Path(self.manifest) if self.manifest else Path(self.out).with_suffix(".manifest.json")


@dataclass(frozen=True)
class PointResult:
    code: str
    mode: str
    squeezing_db: float
    estimate: FerEstimate
    seed: int

    def row(self) -> list[str]:
        lo, hi = self.estimate.wilson_interval
        e = self.estimate
        return [self.code, self.mode, repr(float(self.squeezing_db)), str(e.trials), str(e.failures),
                repr(e.fer), repr(lo), repr(hi), str(self.seed)]


def format_csv(results: Sequence[PointResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in results:
        writer.writerow(r.row())
    return buf.getvalue()


def run_experiment(config: ExperimentConfig, on_point: Optional[Callable[[list], None]] = None) -> list[PointResult]:
    """Run every (squeezing point, mode) pair; ``on_point`` sees the results after each point."""
    config.validate()
    bundle = load_bundle(config.code)
    ccm = build_circuit_check_matrix(bundle.code, bundle.schedule(config.schedule), config.rounds)
    fn = _PointChunks(ccm, config.decoder, config.modes, config.squeezing_db)
    results: list[PointResult] = []
    pool = None
    if config.workers > 1:
        pool = ProcessPoolExecutor(config.workers, initializer=_install, initargs=(fn,))
    try:
        for p, db in enumerate(config.squeezing_db):
            fn.point = p
            if pool is None:
                ests = monte_carlo(fn, len(config.modes), config.failure_target, config.max_trials,
                                   config.seed, p, config.chunk_size, 1)
            else:
                ests = _pooled(pool, fn, config, p)
            results.extend(PointResult(bundle.name, m, db, e, config.seed) for m, e in zip(config.modes, ests))
            if on_point is not None:
                on_point(results)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return results


def _pooled(pool: ProcessPoolExecutor, fn: _PointChunks, config: ExperimentConfig, point: int) -> list[FerEstimate]:
    class _Pool:
        # routes chunks through _point_chunk so workers switch squeezing point
        def map(self, _f, *args):
            return pool.map(_point_chunk, *args)

    return monte_carlo(fn, len(config.modes), config.failure_target, config.max_trials, config.seed,
                       point, config.chunk_size, config.workers, pool=_Pool())


def write_results(config: ExperimentConfig, results: Sequence[PointResult], started: Optional[float] = None,
                  complete: bool = True) -> tuple[Path, Path]:
    out = Path(config.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(format_csv(results))
    bundle = load_bundle(config.code)
    manifest = {
        "config": config.to_dict(),
        "complete": complete,
        "inputs": bundle.digests(),
        "results_sha256": file_digest(out),
        "started": started,
        "finished": time.time(),
    }
    path = config.manifest_path
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out, path


def paired_failures(runner: TrialRunner, params: GkpParams, modes: Sequence[str], trials: int, seed: int,
                    chunk_size: int = 256) -> np.ndarray:
    """Failure flags ``(len(modes), trials)`` with every mode decoding the same samples."""
    out = np.zeros((len(modes), trials), dtype=bool)
    for c, start in enumerate(range(0, trials, chunk_size)):
        size = min(chunk_size, trials - start)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0, c)))
        sample = sample_faults(runner.ccm, params, rng, size)
        for i, mode in enumerate(modes):
            out[i, start:start + size] = ~runner.run(sample, mode, params)[0]
    return out
