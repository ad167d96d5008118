"""Factor-subset ablations and data-slice fits.

``run_ablation`` refits the law under several factor-inclusion masks on the
same aggregated observations and ranks the masks by adjusted R-squared.
``fit_slice`` restricts the data first (e.g. only 2-bit rows) and fits a
reduced law on the slice, optionally with pinned exponents.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .dataset import ExperimentDataset, ExperimentRecord, aggregate
from .errors import PtqLawError, ValidationError
from .fitting import FitOptions, FitProblem, FitResult, fit_nls
from .model import ALL_FACTORS, Factor, format_law, mask_to_text

#: The four published mask variants, most inclusive first.
DEFAULT_MASKS: tuple[frozenset[Factor], ...] = (
    ALL_FACTORS,
    frozenset({Factor.N, Factor.B_EFF}),
    frozenset({Factor.N, Factor.G, Factor.B_EFF}),
    frozenset({Factor.N, Factor.C_B, Factor.B_EFF}),
)


@dataclass(frozen=True)
class MaskFit:
    """Outcome of one mask's fit; ``error`` is set when the fit failed."""

    mask: frozenset[Factor]
    result: FitResult | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.result is None


@dataclass(frozen=True)
class AblationReport:
    """Mask comparison on one dataset.

    Successful entries are sorted by descending adjusted R-squared (mask text
    breaks ties); failed entries follow. ``dataset_fingerprint`` identifies
    the exact observations every mask was fitted on.
    """

    scope: str
    entries: tuple[MaskFit, ...]
    dataset_fingerprint: str

    def format(self) -> str:
        lines = [
            f"{'mask':24} {'adj_r2':>10} {'r2':>10} {'sse':>12} {'conv':>5}  fitted_function"
        ]
        for entry in self.entries:
            mask_text = mask_to_text(entry.mask)
            if entry.failed:
                lines.append(f"{mask_text:24} {'-':>10} {'-':>10} {'-':>12} {'-':>5}  FAILED: {entry.error}")
                continue
            r = entry.result
            lines.append(
                f"{mask_text:24} {r.adjusted_r_squared:>10.4f} {r.r_squared:>10.4f} "
                f"{r.sse:>12.6g} {str(r.converged).lower():>5}  {format_law(r.params)}"
            )
        return "\n".join(lines) + "\n"


def _sorted_entries(entries: list[MaskFit]) -> tuple[MaskFit, ...]:
    succeeded = [e for e in entries if not e.failed]
    failed = [e for e in entries if e.failed]
    succeeded.sort(key=lambda e: (-e.result.adjusted_r_squared, mask_to_text(e.mask)))
    failed.sort(key=lambda e: mask_to_text(e.mask))
    return tuple(succeeded + failed)


def run_ablation(
    ds: ExperimentDataset,
    scope: str,
    masks: Iterable[frozenset[Factor]] | None = None,
    options: FitOptions | None = None,
    benchmarks: Iterable[str] | None = None,
) -> AblationReport:
    """Fit one law per mask on identical aggregated observations.

    A failing mask (degenerate design, divergence) is flagged in the report
    instead of aborting the remaining masks. All masks share one options
    object so the comparison is apples to apples.
    """
    mask_list = [frozenset(m) for m in (masks if masks is not None else DEFAULT_MASKS)]
    if not mask_list:
        raise ValidationError("masks list is empty")
    seen = set()
    for mask in mask_list:
        if not mask <= ALL_FACTORS:
            raise ValidationError(f"mask {mask!r} contains unknown factors")
        if mask in seen:
            raise ValidationError(f"mask {mask_to_text(mask)} listed twice")
        seen.add(mask)

    observations = aggregate(ds, scope, benchmarks=benchmarks)
    entries = []
    for mask in mask_list:
        try:
            result = fit_nls(FitProblem(tuple(observations), mask), options)
            entries.append(MaskFit(mask=mask, result=result))
        except PtqLawError as exc:
            entries.append(MaskFit(mask=mask, error=str(exc)))
    return AblationReport(
        scope=scope,
        entries=_sorted_entries(entries),
        dataset_fingerprint=ds.fingerprint(),
    )


def fit_slice(
    ds: ExperimentDataset,
    scope: str,
    where: Callable[[ExperimentRecord], bool],
    mask: frozenset[Factor],
    options: FitOptions | None = None,
    fixed: Mapping[Factor, float] | None = None,
    description: str = "slice",
    benchmarks: Iterable[str] | None = None,
) -> FitResult:
    """Fit the law on the records matching ``where`` only.

    A slice selecting every record is exactly the unsliced fit. An empty
    slice raises a ValidationError naming ``description``.
    """
    sliced = ds.filter(where, description=description)
    observations = aggregate(sliced, scope, benchmarks=benchmarks)
    return fit_nls(FitProblem(tuple(observations), frozenset(mask), fixed=fixed), options)
