"""Simulated and replayed confidence-score measurements."""

from __future__ import annotations

import csv
import enum
import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .reward import RewardModel, reward


class RecordError(ValueError):
    """A malformed measurement/dataset record."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class NoiseKind(enum.Enum):
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class NoiseModel:
    variance: float = 0.5
    kind: NoiseKind = NoiseKind.GAUSSIAN

    def __post_init__(self) -> None:
        if not (self.variance >= 0 and math.isfinite(self.variance)):
            raise ValueError(f"noise variance must be finite and >= 0, got {self.variance}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind is NoiseKind.GAUSSIAN:
            return rng.normal(0.0, self.std, size)
        half = math.sqrt(3.0 * self.variance)  # U(-a, a) has variance a^2 / 3
        return rng.uniform(-half, half, size)


class OcclusionKind(enum.Enum):
    ALWAYS = "always"
    FLOOR = "floor"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class OcclusionModel:
    """When detection fails. ``FLOOR`` misses wherever the true field is
    below ``c_min``; ``BERNOULLI`` misses independently with ``p_miss``."""

    kind: OcclusionKind = OcclusionKind.ALWAYS
    c_min: float = 0.0
    p_miss: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_miss <= 1.0:
            raise ValueError(f"p_miss must lie in [0, 1], got {self.p_miss}")

    def detects(self, true_value: float, rng: np.random.Generator) -> bool:
        if self.kind is OcclusionKind.FLOOR:
            return true_value >= self.c_min
        if self.kind is OcclusionKind.BERNOULLI:
            return bool(rng.random() >= self.p_miss)
        return True


@dataclass(frozen=True)
class Measurement:
    value: float
    detected: bool
    step: int
    position: tuple[float, float, float]


def measure(
    model: RewardModel,
    p,
    noise: NoiseModel,
    occ: OcclusionModel,
    rng: np.random.Generator,
    step: int = 0,
) -> Measurement:
    """Field value plus noise on detection, noise alone on a miss."""
    pos = tuple(float(c) for c in np.asarray(p, dtype=float))
    truth = float(reward(model, pos))
    # noise first so the noise stream does not depend on the occlusion branch
    mu = float(noise.sample(rng))
    detected = occ.detects(truth, rng)
    value = truth + mu if detected else mu
    return Measurement(value, detected, step, pos)


def _parse_bool(text: str, line: int) -> bool:
    text = text.strip()
    if text in ("1", "true", "True"):
        return True
    if text in ("0", "false", "False"):
        return False
    raise RecordError(f"detected flag must be 0 or 1, got {text!r}", line)


def read_records(path: str | Path) -> list[tuple[tuple[float, float, float], float, bool]]:
    """Read ``px,py,pz,confidence[,detected]`` rows. Line numbers are 1-based
    and count the header."""
    path = Path(path)
    records = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise RecordError(f"{path} is empty")
        cols = [h.strip().lower() for h in header]
        if cols[:4] != ["px", "py", "pz", "confidence"] or len(cols) > 5:
            raise RecordError(f"bad header {header!r}; expected px,py,pz,confidence[,detected]", 1)
        has_flag = len(cols) == 5
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(cols):
                raise RecordError(f"expected {len(cols)} fields, got {len(row)}", line)
            try:
                nums = [float(c) for c in row[:4]]
            except ValueError:
                raise RecordError(f"non-numeric field in {row!r}", line) from None
            if not all(math.isfinite(v) for v in nums):
                raise RecordError("non-finite value", line)
            detected = _parse_bool(row[4], line) if has_flag else True
            records.append(((nums[0], nums[1], nums[2]), nums[3], detected))
    return records


class ReplaySource:
    """Iterates logged measurements in file order."""

    def __init__(self, records: Iterable):
        self._records = []
        for line, rec in enumerate(records, start=1):
            try:
                pos, value, *rest = rec
                pos = tuple(float(c) for c in pos)
                value = float(value)
            except (TypeError, ValueError):
                raise RecordError(f"malformed record {rec!r}", line) from None
            if len(pos) != 3 or not all(math.isfinite(c) for c in pos) or not math.isfinite(value):
                raise RecordError(f"malformed record {rec!r}", line)
            detected = bool(rest[0]) if rest else True
            self._records.append((pos, value, detected))
        if not self._records:
            raise RecordError("replay source needs at least one record")

    @classmethod
    def from_csv(cls, path: str | Path) -> ReplaySource:
        return cls(read_records(path))

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[Measurement]:
        for step, (pos, value, detected) in enumerate(self._records):
            yield Measurement(value, detected, step, pos)


def replay_source(records) -> ReplaySource:
    if isinstance(records, (str, Path)):
        return ReplaySource.from_csv(records)
    return ReplaySource(records)
