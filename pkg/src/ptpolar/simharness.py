"""BPSK/AWGN Monte Carlo frame-error-rate runs, sweep configuration and CSV output.

Randomness is split by chunk: chunk c of every point draws its payloads and
unit-variance noise from ``SeedSequence(seed, spawn_key=(c,))``. Points at
different Eb/N0 or list size therefore see the same payloads and the same
noise shape (common random numbers), and the result never depends on how
many worker processes took part.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Literal

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .codec import LLR_CLIP, Codec, adaptive_scl_decode, genie_ml_flag, scl_decode
from .construction import CodeSpec, Flavor

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "ebno_db",
    "L",
    "frames",
    "frame_errors",
    "fer",
    "ml_lb_errors",
    "ml_lb_fer",
    "wall_seconds",
    "seed",
]

DEFAULT_CHUNK = 256


class ConfigError(ValueError):
    """Invalid sweep configuration; the message names the offending field."""


# -- channel ---------------------------------------------------------------


@dataclass(frozen=True)
class ChannelParams:
    """BPSK over real AWGN at a given Eb/N0 and code rate.

    ``ebno_db = inf`` gives a noiseless channel (sigma = 0).
    """

    ebno_db: float
    rate: float

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError(f"rate {self.rate} outside (0, 1]")
        if math.isnan(self.ebno_db):
            raise ValueError("Eb/N0 is NaN")

    @classmethod
    def for_codec(cls, codec: Codec, ebno_db: float, count_crc: bool = False) -> ChannelParams:
        bits = codec.spec.k_total if count_crc else codec.K
        return cls(float(ebno_db), bits / codec.N)

    @property
    def noiseless(self) -> bool:
        return math.isinf(self.ebno_db) and self.ebno_db > 0

    @property
    def sigma2(self) -> float:
        if self.noiseless:
            return 0.0
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.ebno_db / 10.0))

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


def awgn_llrs(codeword: np.ndarray, params: ChannelParams, noise) -> np.ndarray:
    """Channel LLRs 2y/sigma^2 for y = (1 - 2b) + sigma z.

    ``noise`` is either a numpy Generator or an array of standard normal draws
    shaped like ``codeword`` (rows of a batch are allowed).
    """
    s = 1.0 - 2.0 * np.asarray(codeword, dtype=np.float64)
    if params.noiseless:
        return s * LLR_CLIP
    z = noise.standard_normal(s.shape) if isinstance(noise, np.random.Generator) else np.asarray(noise)
    if z.shape != s.shape:
        raise ValueError(f"noise shape {z.shape} differs from codeword shape {s.shape}")
    y = s + params.sigma * z
    return 2.0 * y / params.sigma2


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))


# -- one operating point ---------------------------------------------------


@dataclass(frozen=True)
class StopRule:
    target_errors: int = 100
    max_frames: int = 1_000_000

    def __post_init__(self):
        if self.target_errors < 1 or self.max_frames < 1:
            raise ValueError("stop rule limits must be positive")


@dataclass
class FerRecord:
    ebno_db: float
    L: int
    frames: int
    frame_errors: int
    ml_lb_errors: int
    wall_seconds: float
    seed: int
    adaptive: bool = False
    mean_list_size: float = 0.0
    spec_fingerprint: str = ""
    rate: float = 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def ml_lb_fer(self) -> float:
        return self.ml_lb_errors / self.frames if self.frames else 0.0

    def csv_row(self) -> list[str]:
        return [
            repr(float(self.ebno_db)),
            str(self.L),
            str(self.frames),
            str(self.frame_errors),
            repr(self.fer),
            str(self.ml_lb_errors),
            repr(self.ml_lb_fer),
            f"{self.wall_seconds:.3f}",
            str(self.seed),
        ]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fer"] = self.fer
        d["ml_lb_fer"] = self.ml_lb_fer
        return d


def spec_fingerprint(spec: CodeSpec) -> str:
    text = json.dumps(spec.to_dict(), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def simulate_chunk(
    codec: Codec,
    L: int,
    params: ChannelParams,
    seed: int,
    chunk: int,
    size: int,
    adaptive: bool = False,
    genie: bool = True,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-frame (error, ml_lb_error, list_size_used) flags for one chunk."""
    rng = chunk_rng(seed, chunk)
    payloads = rng.integers(0, 2, size=(size, codec.K), dtype=np.uint8)
    z = rng.standard_normal((size, codec.N))
    u, x = codec.encode_batch(payloads)
    llrs = awgn_llrs(x, params, z)
    err = np.zeros(size, dtype=bool)
    ml = np.zeros(size, dtype=bool)
    used = np.zeros(size, dtype=np.int32)
    for f in range(size):
        out = adaptive_scl_decode(codec, llrs[f], L) if adaptive else scl_decode(codec, llrs[f], L)
        used[f] = out.list_size_used
        if not np.array_equal(out.payload, payloads[f]):
            err[f] = True
            if genie:
                ml[f] = genie_ml_flag(codec, out, u[f], llrs[f])
    return err, ml, used


_WORKER_CODEC: Codec | None = None


def _init_worker(spec_dict: dict) -> None:
    global _WORKER_CODEC
    _WORKER_CODEC = Codec.from_spec(CodeSpec.from_dict(spec_dict))


def _worker_chunk(args):
    L, ebno, rate, seed, chunk, size, adaptive, genie = args
    return simulate_chunk(_WORKER_CODEC, L, ChannelParams(ebno, rate), seed, chunk, size, adaptive, genie)


def run_fer_point(
    codec: Codec,
    L: int,
    params: ChannelParams,
    stop: StopRule = StopRule(),
    seed: int = 0,
    adaptive: bool = False,
    workers: int = 1,
    chunk_frames: int = DEFAULT_CHUNK,
    genie: bool = True,
    pool: ProcessPoolExecutor | None = None,
) -> FerRecord:
    """Simulate frames until ``target_errors`` errors or ``max_frames`` frames.

    The stop is applied frame by frame over chunks taken in order, so extra
    chunks finished by parallel workers are discarded and the record is the
    same for any worker count. With ``adaptive`` set, ``L`` is the maximum
    list size.
    """
    start = time.perf_counter()
    frames = errors = ml_errors = 0
    list_total = 0
    n_chunks = -(-stop.max_frames // chunk_frames)

    def sizes(c):
        return min(chunk_frames, stop.max_frames - c * chunk_frames)

    def consume(result) -> bool:
        nonlocal frames, errors, ml_errors, list_total
        err, ml, used = result
        for f in range(err.size):
            frames += 1
            list_total += int(used[f])
            if err[f]:
                errors += 1
                ml_errors += int(ml[f])
                if errors >= stop.target_errors:
                    return True
        return frames >= stop.max_frames

    own_pool = None
    if workers > 1 and pool is None:
        own_pool = pool = ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(codec.spec.to_dict(),))
    try:
        if pool is None:
            for c in range(n_chunks):
                res = simulate_chunk(codec, L, params, seed, c, sizes(c), adaptive, genie)
                if consume(res):
                    break
        else:
            window = max(2 * workers, 2)
            pending = {}
            nxt = 0
            done = False
            c = 0
            while not done and c < n_chunks:
                while nxt < n_chunks and len(pending) < window:
                    args = (L, params.ebno_db, params.rate, seed, nxt, sizes(nxt), adaptive, genie)
                    pending[nxt] = pool.submit(_worker_chunk, args)
                    nxt += 1
                done = consume(pending.pop(c).result())
                c += 1
            for fut in pending.values():
                fut.cancel()
    finally:
        if own_pool is not None:
            own_pool.shutdown(cancel_futures=True)

    return FerRecord(
        ebno_db=params.ebno_db,
        L=int(L),
        frames=frames,
        frame_errors=errors,
        ml_lb_errors=ml_errors,
        wall_seconds=time.perf_counter() - start,
        seed=int(seed),
        adaptive=adaptive,
        mean_list_size=list_total / frames if frames else 0.0,
        spec_fingerprint=spec_fingerprint(codec.spec),
        rate=params.rate,
    )


# -- configuration ---------------------------------------------------------


class PretransformConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int
    density: float = Field(0.5, ge=0.0, le=1.0)


class CodeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int = Field(ge=0, le=20)
    K: int = Field(ge=1)
    K_crc: int = Field(0, ge=0)
    flavor: Flavor = Flavor.POLAR
    design_snr_db: float = -1.45
    weight_threshold: int | None = None
    pretransform: PretransformConfig | None = None
    crc_poly: int | str | None = None
    crc_init: int = 0

    @field_validator("crc_poly")
    @classmethod
    def _parse_poly(cls, v):
        if isinstance(v, str):
            return int(v, 0)
        return v

    def to_spec(self) -> CodeSpec:
        pt = None
        if self.pretransform is not None:
            pt = {"kind": "random", "seed": self.pretransform.seed, "density": self.pretransform.density}
        return CodeSpec(
            n=self.n,
            K=self.K,
            K_crc=self.K_crc,
            flavor=self.flavor,
            design_snr_db=self.design_snr_db,
            weight_threshold=self.weight_threshold,
            pretransform=pt,
            crc_poly=self.crc_poly,
            crc_init=self.crc_init,
        )


class SweepConfig(BaseModel):
    """Everything one ``simulate`` run needs. Unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    code: CodeConfig
    ebno_db: list[float]
    list_sizes: list[int] = Field(default_factory=lambda: [32])
    adaptive: bool = False
    target_errors: int = Field(100, ge=1)
    max_frames: int = Field(1_000_000, ge=1)
    seed: int = Field(0, ge=0)
    rate_mode: Literal["K/N", "(K+K_crc)/N"] = "K/N"
    chunk_frames: int = Field(DEFAULT_CHUNK, ge=1)
    genie: bool = True
    workers: int = Field(1, ge=1)
    out: str | None = None

    @field_validator("ebno_db", mode="before")
    @classmethod
    def _grid(cls, v):
        if isinstance(v, str):
            return parse_grid(v)
        if isinstance(v, (int, float)):
            return [float(v)]
        return v

    @field_validator("list_sizes", mode="before")
    @classmethod
    def _sizes(cls, v):
        return [v] if isinstance(v, int) else v

    @field_validator("list_sizes")
    @classmethod
    def _positive(cls, v):
        if any(L < 1 for L in v):
            raise ValueError("list sizes must be positive")
        return v

    @model_validator(mode="after")
    def _adaptive_needs_crc(self):
        if self.adaptive and self.code.K_crc == 0:
            raise ValueError("adaptive decoding needs code.K_crc > 0")
        if self.adaptive and any(L & (L - 1) for L in self.list_sizes):
            raise ValueError("adaptive decoding needs power-of-two list sizes")
        return self

    def result_hash(self) -> str:
        """Hash of every field that changes the numbers of a point."""
        keep = self.model_dump(mode="json", exclude={"ebno_db", "list_sizes", "workers", "out"})
        return hashlib.sha256(json.dumps(keep, sort_keys=True).encode()).hexdigest()[:16]


def parse_grid(text: str) -> list[float]:
    """``"a:b:step"`` (inclusive, rounded to 1e-9) or a comma-separated list."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"grid {text!r} must be start:stop:step with a positive step")
        a, b, step = parts
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        return [round(a + i * step, 9) for i in range(max(count, 0))]
    return [float(p) for p in text.split(",")]


def _format_validation(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        path = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{path}: {e['msg']}")
    return "; ".join(lines)


def load_config(source: str | os.PathLike | dict) -> SweepConfig:
    """Read a YAML or JSON config file (or an already-parsed mapping)."""
    if isinstance(source, dict):
        data = source
    else:
        with open(source) as fh:
            data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    try:
        return SweepConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_format_validation(e)) from None


# -- sweeps and CSV persistence --------------------------------------------


def _read_done(path: Path, expect_hash: str) -> set[tuple[float, int]]:
    done: set[tuple[float, int]] = set()
    with open(path, newline="") as fh:
        rows = [line for line in fh if line.strip()]
    header_hash = None
    body = []
    for line in rows:
        if line.startswith("#"):
            if "config_hash=" in line:
                header_hash = line.split("config_hash=")[1].split()[0]
        else:
            body.append(line)
    if header_hash is not None and header_hash != expect_hash:
        raise ConfigError(f"{path} was written by a different configuration (hash {header_hash})")
    for rec in csv.DictReader(body):
        done.add((float(rec["ebno_db"]), int(rec["L"])))
    return done


def _header(cfg: SweepConfig) -> list[str]:
    spec = cfg.code.to_spec()
    return [
        f"# config_hash={cfg.result_hash()} rate={cfg.rate_mode} adaptive={cfg.adaptive}",
        "# code=" + json.dumps(spec.to_dict(), sort_keys=True),
    ]


def run_sweep(cfg: SweepConfig, out: str | os.PathLike | None = None) -> list[FerRecord]:
    """Run every (Eb/N0, L) point, appending each finished row to ``out``.

    Points already present in an existing ``out`` written by the same
    configuration are skipped, so an interrupted sweep resumes where it stopped.
    """
    out = out if out is not None else cfg.out
    codec = Codec.from_spec(cfg.code.to_spec())
    stop = StopRule(cfg.target_errors, cfg.max_frames)
    count_crc = cfg.rate_mode != "K/N"
    done: set[tuple[float, int]] = set()
    path = Path(out) if out is not None else None
    if path is not None:
        if path.exists() and path.stat().st_size > 0:
            done = _read_done(path, cfg.result_hash())
        else:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="") as fh:
                fh.write("\n".join(_header(cfg)) + "\n")
                csv.writer(fh, lineterminator="\n").writerow(CSV_COLUMNS)

    records: list[FerRecord] = []
    pool = None
    if cfg.workers > 1:
        pool = ProcessPoolExecutor(cfg.workers, initializer=_init_worker, initargs=(codec.spec.to_dict(),))
    try:
        for L in cfg.list_sizes:
            for ebno in cfg.ebno_db:
                if (float(ebno), int(L)) in done:
                    log.info("skipping Eb/N0=%s L=%d (already in %s)", ebno, L, path)
                    continue
                params = ChannelParams.for_codec(codec, ebno, count_crc)
                rec = run_fer_point(
                    codec,
                    L,
                    params,
                    stop,
                    cfg.seed,
                    adaptive=cfg.adaptive,
                    workers=cfg.workers,
                    chunk_frames=cfg.chunk_frames,
                    genie=cfg.genie,
                    pool=pool,
                )
                log.info("Eb/N0=%.3f L=%d frames=%d errors=%d fer=%.3e", ebno, L, rec.frames, rec.frame_errors, rec.fer)
                records.append(rec)
                if path is not None:
                    with open(path, "a", newline="") as fh:
                        csv.writer(fh, lineterminator="\n").writerow(rec.csv_row())
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return records


def read_records(path: str | os.PathLike) -> list[dict]:
    with open(path, newline="") as fh:
        body = [line for line in fh if line.strip() and not line.startswith("#")]
    return list(csv.DictReader(body))


def bounds_rows(N: int, K_total: int, grid: Iterable[float]) -> list[tuple[float, float]]:
    from .analysis import normal_approx_fer

    return [(float(e), normal_approx_fer(N, K_total, float(e))) for e in grid]
