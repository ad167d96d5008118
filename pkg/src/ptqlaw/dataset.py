"""Measured-accuracy dataset handling: ingestion, validation, aggregation,
and the seeded synthetic generator used to exercise the fitter.

The on-disk format is CSV with the exact header

    model_family,n_params,w_base,c_b,g,benchmark,task_category,accuracy

(UTF-8, ``.`` decimal point, accuracy as a fraction in [0, 1]). A JSON-lines
mirror with identical field names is accepted interchangeably; ``load_dataset``
sniffs the format.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .advisor import SearchSpace
from .errors import DatasetError, PredictionRangeWarning, ValidationError
from .fitting import Observation
from .model import (
    GENERAL,
    MEMORIZATION,
    UTILIZATION,
    PtqConfig,
    ScalingLawParams,
    predict,
)

CSV_HEADER = "model_family,n_params,w_base,c_b,g,benchmark,task_category,accuracy"
_COLUMNS = tuple(CSV_HEADER.split(","))

#: The two cloze-style factual-recall probes.
MEMORIZATION_BENCHMARKS = ("lama-conceptnet", "lama-squad")
#: The four commonsense-reasoning / QA benchmarks.
UTILIZATION_BENCHMARKS = ("hellaswag", "winogrande", "arc-e", "arc-c")
#: Default benchmark -> task-category mapping.
DEFAULT_BENCHMARK_CATEGORIES: dict[str, str] = {
    **{b: MEMORIZATION for b in MEMORIZATION_BENCHMARKS},
    **{b: UTILIZATION for b in UTILIZATION_BENCHMARKS},
}

_CATEGORIES = (MEMORIZATION, UTILIZATION)


@dataclass(frozen=True)
class ExperimentRecord:
    """One measured benchmark accuracy for one quantization configuration."""

    model_family: str
    n_params: float
    w_base: int
    c_b: int
    g: int
    benchmark: str
    task_category: str
    accuracy: float

    def __post_init__(self):
        if not self.model_family:
            raise ValidationError("model_family must be non-empty")
        if not self.benchmark:
            raise ValidationError("benchmark must be non-empty")
        if self.task_category not in _CATEGORIES:
            raise ValidationError(
                f"task_category must be one of {_CATEGORIES}, got {self.task_category!r}"
            )
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValidationError(f"accuracy must be in [0, 1], got {self.accuracy!r}")
        # Grid fields obey the same invariants as a PtqConfig.
        cfg = PtqConfig(n_params=self.n_params, w_base=self.w_base, c_b=self.c_b, g=self.g)
        object.__setattr__(self, "n_params", cfg.n_params)

    @property
    def key(self) -> tuple:
        """Uniqueness key within a dataset."""
        return (self.model_family, self.n_params, self.w_base, self.c_b, self.g, self.benchmark)

    @property
    def config_key(self) -> tuple:
        return (self.model_family, self.n_params, self.w_base, self.c_b, self.g)


@dataclass(frozen=True)
class ExperimentDataset:
    """Validated, immutable collection of experiment records."""

    records: tuple[ExperimentRecord, ...]
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        records = tuple(self.records)
        if not records:
            raise ValidationError("a dataset must contain at least one record")
        seen: dict[tuple, int] = {}
        categories: dict[str, str] = {}
        for index, record in enumerate(records):
            if record.key in seen:
                raise DatasetError(
                    f"duplicate record for {record.key} (records {seen[record.key]} and {index})"
                )
            seen[record.key] = index
            known = categories.setdefault(record.benchmark, record.task_category)
            if known != record.task_category:
                raise DatasetError(
                    f"benchmark {record.benchmark!r} appears with conflicting "
                    f"task categories {known!r} and {record.task_category!r}"
                )
        object.__setattr__(self, "records", records)

    def __len__(self) -> int:
        return len(self.records)

    def benchmarks(self) -> tuple[str, ...]:
        """Distinct benchmark names, sorted."""
        return tuple(sorted({r.benchmark for r in self.records}))

    def categories(self) -> dict[str, str]:
        """Benchmark -> task-category map observed in the data."""
        return {r.benchmark: r.task_category for r in self.records}

    def filter(self, keep: Callable[[ExperimentRecord], bool], description: str = "filter") -> "ExperimentDataset":
        """Sub-dataset of records satisfying ``keep``; errors when empty."""
        kept = tuple(r for r in self.records if keep(r))
        if not kept:
            raise ValidationError(f"no records match {description}")
        provenance = dict(self.provenance)
        provenance["filter"] = description
        return ExperimentDataset(records=kept, provenance=provenance)

    def fingerprint(self) -> str:
        """Stable content hash of the records (provenance excluded)."""
        digest = hashlib.sha256()
        for record in sorted(self.records, key=lambda r: r.key):
            digest.update(_record_line(record).encode("utf-8"))
        return digest.hexdigest()


def _format_count(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def _record_line(record: ExperimentRecord) -> str:
    return ",".join(
        (
            record.model_family,
            _format_count(record.n_params),
            str(record.w_base),
            str(record.c_b),
            str(record.g),
            record.benchmark,
            record.task_category,
            repr(record.accuracy),
        )
    ) + "\n"


def _parse_row(values: dict[str, str], row: int) -> ExperimentRecord:
    def number(column: str, caster, description: str):
        text = values[column].strip()
        try:
            return caster(text)
        except ValueError:
            raise DatasetError(
                f"row {row}, column {column}: malformed {description}: {text!r}",
                row=row,
                column=column,
            ) from None

    n_params = number("n_params", float, "number")
    w_base = number("w_base", int, "integer")
    c_b = number("c_b", int, "integer")
    g = number("g", int, "integer")
    accuracy = number("accuracy", float, "number")
    if not 0.0 <= accuracy <= 1.0:
        raise DatasetError(
            f"row {row}, column accuracy: value {accuracy!r} outside [0, 1]",
            row=row,
            column="accuracy",
        )
    try:
        return ExperimentRecord(
            model_family=values["model_family"].strip(),
            n_params=n_params,
            w_base=w_base,
            c_b=c_b,
            g=g,
            benchmark=values["benchmark"].strip(),
            task_category=values["task_category"].strip(),
            accuracy=accuracy,
        )
    except ValidationError as exc:
        raise DatasetError(f"row {row}: {exc}", row=row) from None


def _finish_load(rows: list[tuple[int, ExperimentRecord]], source: str) -> ExperimentDataset:
    seen: dict[tuple, int] = {}
    for row, record in rows:
        if record.key in seen:
            raise DatasetError(
                f"row {row}: duplicate of row {seen[record.key]} "
                f"(key {record.key})",
                row=row,
            )
        seen[record.key] = row
    return ExperimentDataset(
        records=tuple(record for _, record in rows),
        provenance={
            "source": source,
            "loaded_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        },
    )


def load_csv(path) -> ExperimentDataset:
    """Load and validate a CSV dataset.

    Every error names the 1-based physical line (header is line 1) and the
    offending column.
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise DatasetError(f"{path}: empty file", row=1)
    header = lines[0].strip()
    if header != CSV_HEADER:
        raise DatasetError(
            f"{path}: header mismatch: expected {CSV_HEADER!r}, got {header!r}", row=1
        )
    rows: list[tuple[int, ExperimentRecord]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(_COLUMNS):
            raise DatasetError(
                f"row {lineno}: expected {len(_COLUMNS)} fields, got {len(parts)}",
                row=lineno,
            )
        rows.append((lineno, _parse_row(dict(zip(_COLUMNS, parts)), lineno)))
    if not rows:
        raise DatasetError(f"{path}: no data rows", row=1)
    return _finish_load(rows, str(path))


def load_jsonl(path) -> ExperimentDataset:
    """Load the JSON-lines mirror format (one object per line, same fields)."""
    rows: list[tuple[int, ExperimentRecord]] = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"row {lineno}: invalid JSON: {exc}", row=lineno) from None
            missing = [c for c in _COLUMNS if c not in payload]
            if missing:
                raise DatasetError(
                    f"row {lineno}: missing fields {missing}", row=lineno, column=missing[0]
                )
            values = {c: str(payload[c]) for c in _COLUMNS}
            rows.append((lineno, _parse_row(values, lineno)))
    if not rows:
        raise DatasetError(f"{path}: no data rows", row=1)
    return _finish_load(rows, str(path))


def load_dataset(path) -> ExperimentDataset:
    """Load a dataset, sniffing CSV vs JSON-lines from the first character."""
    with open(path, "r", encoding="utf-8") as handle:
        head = handle.read(1)
    return load_jsonl(path) if head == "{" else load_csv(path)


def dataset_to_csv(ds: ExperimentDataset) -> str:
    """Canonical CSV rendering; numbers use shortest round-trip formatting."""
    return CSV_HEADER + "\n" + "".join(_record_line(r) for r in ds.records)


def write_csv(ds: ExperimentDataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(dataset_to_csv(ds))


def dataset_to_jsonl(ds: ExperimentDataset) -> str:
    lines = []
    for r in ds.records:
        lines.append(
            json.dumps(
                {
                    "model_family": r.model_family,
                    "n_params": int(r.n_params) if r.n_params.is_integer() else r.n_params,
                    "w_base": r.w_base,
                    "c_b": r.c_b,
                    "g": r.g,
                    "benchmark": r.benchmark,
                    "task_category": r.task_category,
                    "accuracy": r.accuracy,
                }
            )
        )
    return "\n".join(lines) + "\n"


def write_jsonl(ds: ExperimentDataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(dataset_to_jsonl(ds))


def _scope_benchmarks(ds: ExperimentDataset, scope: str) -> tuple[str, ...]:
    categories = ds.categories()
    if scope == GENERAL:
        return ds.benchmarks()
    if scope in _CATEGORIES:
        selected = tuple(sorted(b for b, cat in categories.items() if cat == scope))
        if not selected:
            raise ValidationError(f"dataset has no {scope} benchmarks")
        return selected
    raise ValidationError(
        f"unknown scope {scope!r}; expected {GENERAL!r}, {MEMORIZATION!r} or {UTILIZATION!r}"
    )


def aggregate(
    ds: ExperimentDataset,
    scope: str = GENERAL,
    benchmarks: Iterable[str] | None = None,
    symmetric: bool = False,
) -> list[Observation]:
    """Per-configuration unweighted mean accuracy over the scope's benchmarks.

    ``scope`` selects all benchmarks (``general``) or one task category;
    ``benchmarks`` overrides the list explicitly (some figure reproductions
    average four or five tasks rather than six). Every configuration must
    carry every selected benchmark. Output is ordered by ascending
    (n_params, w_base, c_b, g).
    """
    wanted = tuple(benchmarks) if benchmarks is not None else _scope_benchmarks(ds, scope)
    if not wanted:
        raise ValidationError("benchmark list for aggregation is empty")
    available = set(ds.benchmarks())
    unknown = [b for b in wanted if b not in available]
    if unknown:
        raise ValidationError(f"benchmarks not present in dataset: {unknown}")

    grouped: dict[tuple, dict[str, float]] = {}
    for record in ds.records:
        grouped.setdefault(record.config_key, {})[record.benchmark] = record.accuracy

    observations = []
    for key in sorted(grouped, key=lambda k: (k[1], k[2], k[3], k[4], k[0])):
        family, n_params, w_base, c_b, g = key
        per_benchmark = grouped[key]
        missing = [b for b in wanted if b not in per_benchmark]
        if missing:
            raise DatasetError(
                f"config (family={family}, n={n_params:g}, w={w_base}, c_b={c_b}, g={g}) "
                f"is missing benchmark {missing[0]!r}"
            )
        mean = sum(per_benchmark[b] for b in wanted) / len(wanted)
        cfg = PtqConfig(
            n_params=n_params, w_base=w_base, c_b=c_b, g=g, b_z=0 if symmetric else None
        )
        observations.append(Observation(config=cfg, task=scope, accuracy=mean))
    return observations


def generate_synthetic(
    params: ScalingLawParams,
    grid: SearchSpace,
    noise_sigma: float = 0.0,
    seed: int = 0,
    model_family: str = "synthetic",
    benchmarks: Iterable[str] | None = None,
    categories: dict[str, str] | None = None,
) -> ExperimentDataset:
    """Dataset of law predictions plus seeded Gaussian noise.

    Each grid configuration gets one record per benchmark (default: the six
    canonical ones), with independent noise per record. Accuracies are
    clamped to [0, 1]; the clamp count lands in ``provenance["clamped_rows"]``.
    The same seed always produces a byte-identical dataset.
    """
    if noise_sigma < 0:
        raise ValidationError(f"noise_sigma must be >= 0, got {noise_sigma!r}")
    names = tuple(benchmarks) if benchmarks is not None else (
        MEMORIZATION_BENCHMARKS + UTILIZATION_BENCHMARKS
    )
    category_map = dict(DEFAULT_BENCHMARK_CATEGORIES)
    if categories:
        category_map.update(categories)
    unknown = [b for b in names if b not in category_map]
    if unknown:
        raise ValidationError(
            f"no task category known for benchmarks {unknown}; pass a categories map"
        )
    rng = np.random.default_rng(seed)
    clamped = 0
    records = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PredictionRangeWarning)
        for cfg in grid.configs():
            clean = predict(params, cfg)
            for benchmark in names:
                accuracy = clean + rng.normal(0.0, noise_sigma) if noise_sigma > 0 else clean
                if accuracy < 0.0:
                    accuracy, clamped = 0.0, clamped + 1
                elif accuracy > 1.0:
                    accuracy, clamped = 1.0, clamped + 1
                records.append(
                    ExperimentRecord(
                        model_family=model_family,
                        n_params=cfg.n_params,
                        w_base=cfg.w_base,
                        c_b=cfg.c_b,
                        g=cfg.g,
                        benchmark=benchmark,
                        task_category=category_map[benchmark],
                        accuracy=float(accuracy),
                    )
                )
    return ExperimentDataset(
        records=tuple(records),
        provenance={
            "source": "synthetic",
            "seed": seed,
            "noise_sigma": noise_sigma,
            "clamped_rows": clamped,
            "benchmarks": list(names),
            "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        },
    )
