"""Regenerate the frozen test fixtures in tests/data/.

Run from the repository root:

    python tests/make_goldens.py

The noisy-fit golden is produced by the independent grid-refinement oracle
(tests/oracles.py), not by the library's own optimizer, so the frozen values
stay a genuine cross-check.
"""

from __future__ import annotations

import json
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from oracles import config_features, grid_refine_minimizer  # noqa: E402

from ptqlaw import (  # noqa: E402
    ALL_FACTORS,
    FitProblem,
    Observation,
    ScalingLawParams,
    default_space,
    fit_nls,
    generate_synthetic,
    load_registry,
    predict,
    run_ablation,
    write_csv,
)
from ptqlaw.model import mask_to_text  # noqa: E402

DATA_DIR = pathlib.Path(__file__).parent / "data"

FIXTURE_SEED = 0
FIXTURE_SIGMA = 0.05

NOISY_FIT_SEED = 2024
NOISY_FIT_SIGMA = 0.01
NOISY_FIT_TRUTH = dict(c=0.03, alpha=0.10, beta=0.07, gamma=-0.004, delta=0.32)


def make_fixture() -> None:
    """The shipped 384-config x 6-benchmark noisy dataset."""
    registry = load_registry()
    ds = generate_synthetic(
        registry.get("opt-general"),
        default_space(),
        noise_sigma=FIXTURE_SIGMA,
        seed=FIXTURE_SEED,
    )
    DATA_DIR.mkdir(exist_ok=True)
    write_csv(ds, DATA_DIR / "synthetic_384.csv")
    print(f"synthetic_384.csv: {len(ds)} records, fingerprint {ds.fingerprint()[:16]}")


def make_noisy_fit_golden() -> None:
    """Oracle minimizer for the noisy single-observation fit."""
    truth = ScalingLawParams(task="general", mask=ALL_FACTORS, **NOISY_FIT_TRUTH)
    configs = default_space().configs()
    rng = np.random.default_rng(NOISY_FIT_SEED)
    accuracies = [predict(truth, cfg) + rng.normal(0.0, NOISY_FIT_SIGMA) for cfg in configs]

    feats = config_features(configs)
    names = ("n", "c_b", "g", "b_eff")
    theta, sse = grid_refine_minimizer(np.array(accuracies), feats, names)

    golden = {
        "seed": NOISY_FIT_SEED,
        "noise_sigma": NOISY_FIT_SIGMA,
        "truth": NOISY_FIT_TRUTH,
        "oracle": {
            "c": theta[0],
            "alpha": theta[1],
            "beta": theta[2],
            "gamma": theta[3],
            "delta": theta[4],
            "sse": sse,
        },
    }
    (DATA_DIR / "noisy_fit_golden.json").write_text(
        json.dumps(golden, indent=2) + "\n", encoding="utf-8"
    )
    print("noisy_fit_golden.json:", json.dumps(golden["oracle"], indent=None))

    # sanity: the library optimizer should land on the same minimum
    observations = tuple(
        Observation(config=cfg, task="general", accuracy=acc)
        for cfg, acc in zip(configs, accuracies)
    )
    result = fit_nls(FitProblem(observations, ALL_FACTORS))
    fitted = np.array(
        [result.params.c, result.params.alpha, result.params.beta,
         result.params.gamma, result.params.delta]
    )
    print("  max |library - oracle|:", float(np.max(np.abs(fitted - theta))))


def make_ablation_golden() -> None:
    """Adjusted/plain R-squared per default mask on the shipped fixture."""
    from ptqlaw import load_csv

    ds = load_csv(DATA_DIR / "synthetic_384.csv")
    report = run_ablation(ds, "general")
    entries = []
    for entry in report.entries:
        entries.append(
            {
                "mask": mask_to_text(entry.mask),
                "r_squared": entry.result.r_squared,
                "adjusted_r_squared": entry.result.adjusted_r_squared,
                "sse": entry.result.sse,
            }
        )
    payload = {
        "fixture_seed": FIXTURE_SEED,
        "fixture_sigma": FIXTURE_SIGMA,
        "dataset_fingerprint": report.dataset_fingerprint,
        "entries": entries,
    }
    (DATA_DIR / "ablation_golden.json").write_text(
        json.dumps(payload, indent=2) + "\n", encoding="utf-8"
    )
    for row in entries:
        print(f"  {row['mask']:>16}  adj={row['adjusted_r_squared']:.6f}  r2={row['r_squared']:.6f}")


if __name__ == "__main__":
    make_fixture()
    make_noisy_fit_golden()
    make_ablation_golden()
