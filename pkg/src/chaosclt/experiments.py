"""Experiment runners behind the CLI: rate reproduction for fGn power
variations, bound reports for serialized kernels, the ratio family sweep,
and the cross-sum diagnostic.

Every runner consumes a validated config dataclass (parsed from a JSON
document, flags override fields) and produces a ResultTable whose rows are
byte-reproducible for a fixed (config, seed, version).  Timing is printed to
the console, never written into result files.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .bounds import chaos_sum_bound, fgn_rate, nz_ratio_diagnostic, phi, \
    power_variation_bound
from .chaos import ChaosSum
from .distances import EmpiricalSample, kolmogorov_distance, rate_fit
from .errors import ValidationError
from .kernels import kernel_from_json
from .ratio import Perturbations, make_synthetic_family, ratio_bound, \
    sample_ratio_batch
from .stationary import CovarianceFunction, PathSampler, \
    exact_variance_power_variation, power_variation_mean
from .streams import run_blocks

__all__ = [
    "ResultTable",
    "RatesConfig",
    "BoundConfig",
    "RatioConfig",
    "NzConfig",
    "run_rates",
    "run_bound_report",
    "run_ratio",
    "run_nz_diagnostics",
]


@dataclass
class ResultTable:
    """Ordered rows plus run metadata; CSV serialization is deterministic."""

    columns: list[str]
    rows: list[dict]
    metadata: dict

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_csv_cell(row[c]) for c in self.columns) + "\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv_string())

    def write_metadata(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _csv_cell(value) -> str:
    # coerce numpy scalars so cells render as plain round-trippable literals
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValidationError(message)


def _config_from_dict(cls, data: dict, where: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValidationError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ValidationError(f"{where}: {exc}") from None


# ---------------------------------------------------------------------------
# rates
# ---------------------------------------------------------------------------

@dataclass
class RatesConfig:
    hurst: float
    n_grid: list[int]
    replicas: int
    seed: int
    q: int = 2
    threads: int = 1
    emit_plot_data: bool = False
    out: str = "results"

    def __post_init__(self):
        _require(bool(self.n_grid), "n_grid must be nonempty")
        _require(all(int(n) >= 1 for n in self.n_grid), "grid sizes must be >= 1")
        _require(self.replicas >= 100, "replicas must be >= 100")
        _require(self.seed is not None and int(self.seed) >= 0,
                 "a nonnegative seed is mandatory")
        _require(0.0 < self.hurst < 0.75,
                 f"rate experiment requires 0 < H < 3/4, got {self.hurst}")
        self.n_grid = [int(n) for n in self.n_grid]

    @classmethod
    def from_dict(cls, data: dict) -> "RatesConfig":
        return _config_from_dict(cls, data, "rates config")


def _power_variation_samples(cov: CovarianceFunction, n: int, q: int, M: int,
                             seed: int, stream: int, threads: int) -> np.ndarray:
    """Q_{q,n} over M replicas without materializing all paths at once."""
    sampler = PathSampler(cov, n)
    out = np.empty(M)

    def worker(block, start, count):
        paths = sampler.sample_block(seed, stream, block, count)
        out[start:start + count] = (paths ** q).mean(axis=1)

    run_blocks(M, worker, threads=threads)
    return out


def run_rates(config: RatesConfig) -> ResultTable:
    """Estimate d_Kol of standardized power variations across the n grid,
    fit the log-log rate, and report the covariance-sum bound per n."""
    cov = CovarianceFunction.fgn(config.hurst)
    mean_q = power_variation_mean(cov.rho0, config.q)
    columns = ["hurst", "q", "n", "replicas", "seed", "stream", "d_kol",
               "d_kol_se", "bound_covariance_43", "bound_covariance_sq",
               "bound_total"]
    rows = []
    points = []
    for idx, n in enumerate(config.n_grid):
        variance = exact_variance_power_variation(cov, config.q, n)
        samples = _power_variation_samples(cov, n, config.q, config.replicas,
                                           config.seed, idx, config.threads)
        standardized = (samples - mean_q) / math.sqrt(variance)
        d = kolmogorov_distance(EmpiricalSample.from_data(standardized), 0.0, 1.0)
        report = power_variation_bound(cov, n, config.q,
                                       variance=n * variance)
        rows.append({
            "hurst": config.hurst, "q": config.q, "n": n,
            "replicas": config.replicas, "seed": config.seed, "stream": idx,
            "d_kol": d,
            # ECDF fluctuation scale at the supremum point
            "d_kol_se": 0.5 / math.sqrt(config.replicas),
            "bound_covariance_43": report.terms["covariance_43"],
            "bound_covariance_sq": report.terms["covariance_sq"],
            "bound_total": report.total,
        })
        points.append((n, d))
    fit = rate_fit(points) if len(points) >= 2 else None
    prediction = fgn_rate(config.hurst, config.q)
    metadata = {
        "experiment": "rates",
        "version": __version__,
        "config": asdict(config),
        "fitted_slope": None if fit is None else fit.slope,
        "fitted_intercept": None if fit is None else fit.intercept,
        "fit_residual": None if fit is None else fit.residual,
        "predicted_exponent": prediction.exponent,
        "predicted_log_power": prediction.log_power,
    }
    return ResultTable(columns=columns, rows=rows, metadata=metadata)


# ---------------------------------------------------------------------------
# bound reports
# ---------------------------------------------------------------------------

@dataclass
class BoundConfig:
    inputs: list[dict]
    constant_multiplier: float = 1.0
    out: str = "results"

    def __post_init__(self):
        _require(bool(self.inputs), "bound config needs at least one input")

    @classmethod
    def from_dict(cls, data: dict) -> "BoundConfig":
        return _config_from_dict(cls, data, "bound config")


def run_bound_report(config: BoundConfig) -> tuple[ResultTable, list[dict]]:
    """Evaluate the chaos-sum bound (and phi when orders {1, 2} are both
    present) for each serialized kernel set.

    Returns the summary table and the full JSON-ready report documents.
    """
    columns = ["label", "orders", "variance", "max_contraction_norm",
               "mixed_inner", "total", "phi"]
    rows = []
    documents = []
    for i, item in enumerate(config.inputs):
        where = f"inputs[{i}]"
        if not isinstance(item, dict) or "kernels" not in item:
            raise ValidationError(f"{where}: expected an object with a "
                                  f"'kernels' list")
        label = str(item.get("label", f"input-{i}"))
        kernel_list = item["kernels"]
        if not isinstance(kernel_list, list) or not kernel_list:
            raise ValidationError(f"{where}.kernels: expected a nonempty list")
        kernels = {}
        for j, kdata in enumerate(kernel_list):
            kernel = kernel_from_json(kdata, where=f"{where}.kernels[{j}]")
            if kernel.order in kernels:
                raise ValidationError(
                    f"{where}: duplicate kernel order {kernel.order}")
            kernels[kernel.order] = kernel
        F = ChaosSum(kernels)
        report = chaos_sum_bound(F, constant_multiplier=config.constant_multiplier)
        phi_value = None
        if set(F.orders) == {1, 2}:
            phi_value = phi(F.kernels[1], F.kernels[2])
        doc = {"label": label, "orders": F.orders,
               "report": report.to_json()}
        if phi_value is not None:
            doc["phi"] = phi_value
        documents.append(doc)
        rows.append({
            "label": label,
            "orders": ";".join(str(p) for p in F.orders),
            "variance": report.normalization,
            "max_contraction_norm": report.terms["max_contraction_norm"],
            "mixed_inner": report.terms["mixed_inner"],
            "total": report.total,
            "phi": float("nan") if phi_value is None else phi_value,
        })
    metadata = {"experiment": "bound", "version": __version__,
                "constant_multiplier": config.constant_multiplier}
    return ResultTable(columns=columns, rows=rows, metadata=metadata), documents


# ---------------------------------------------------------------------------
# ratio sweep
# ---------------------------------------------------------------------------

@dataclass
class RatioConfig:
    lambda_grid: list[float]
    replicas: int
    seed: int
    rho: float = 1.0
    sigma1: float = 1.0
    sigma2: float = 1.0
    perturbations: dict = field(default_factory=dict)
    threads: int = 1
    out: str = "results"

    def __post_init__(self):
        _require(bool(self.lambda_grid), "lambda_grid must be nonempty")
        _require(self.replicas >= 100, "replicas must be >= 100")
        _require(self.seed is not None and int(self.seed) >= 0,
                 "a nonnegative seed is mandatory")
        self.lambda_grid = [float(x) for x in self.lambda_grid]

    @classmethod
    def from_dict(cls, data: dict) -> "RatioConfig":
        return _config_from_dict(cls, data, "ratio config")

    def perturbation_config(self) -> Perturbations:
        return _config_from_dict(Perturbations, self.perturbations,
                                 "ratio config perturbations")


def run_ratio(config: RatioConfig) -> ResultTable:
    """Sweep the lambda grid: empirical d_Kol of the ratio against
    N(0, sigma1^2 + sigma2^2), rejection rates, and the five bound terms."""
    pert = config.perturbation_config()
    columns = ["lam", "rho", "sigma1", "sigma2", "replicas", "seed", "stream",
               "d_kol", "rejection_rate", "phi", "mean_drift",
               "f_second_moment_gap", "g_second_moment_gap", "remainder",
               "bound_total"]
    rows = []
    distances = []
    for idx, lam in enumerate(config.lambda_grid):
        fam = make_synthetic_family(config.rho, config.sigma1, config.sigma2,
                                    lam, perturbations=pert)
        values, rejected = sample_ratio_batch(fam, config.replicas,
                                              config.seed, threads=config.threads,
                                              stream=idx)
        kept = values[~rejected]
        if kept.size == 0:
            raise ValidationError(
                f"every replica was rejected at lambda={lam}")
        d = kolmogorov_distance(EmpiricalSample.from_data(kept), 0.0,
                                fam.sigma_sq)
        report = ratio_bound(fam)
        distances.append(d)
        rows.append({
            "lam": lam, "rho": config.rho, "sigma1": config.sigma1,
            "sigma2": config.sigma2, "replicas": config.replicas,
            "seed": config.seed, "stream": idx, "d_kol": d,
            "rejection_rate": float(rejected.mean()),
            "phi": report.terms["phi"],
            "mean_drift": report.terms["mean_drift"],
            "f_second_moment_gap": report.terms["f_second_moment_gap"],
            "g_second_moment_gap": report.terms["g_second_moment_gap"],
            "remainder": report.terms["remainder"],
            "bound_total": report.total,
        })
    tol = 2.0 / math.sqrt(config.replicas)
    monotone = all(distances[i + 1] <= distances[i] + tol
                   for i in range(len(distances) - 1))
    metadata = {
        "experiment": "ratio",
        "version": __version__,
        "config": asdict(config),
        "sigma_sq": config.sigma1 ** 2 + config.sigma2 ** 2,
        "monotone_within_tolerance": monotone,
        "monotonicity_tolerance": tol,
    }
    return ResultTable(columns=columns, rows=rows, metadata=metadata)


# ---------------------------------------------------------------------------
# cross-sum diagnostic
# ---------------------------------------------------------------------------

@dataclass
class NzConfig:
    hurst: float
    n_grid: list[int]
    seed: int
    m: int = 2
    signs: list[int] = field(default_factory=lambda: [1, -1])
    out: str = "results"

    def __post_init__(self):
        _require(bool(self.n_grid), "n_grid must be nonempty")
        _require(self.seed is not None and int(self.seed) >= 0,
                 "a nonnegative seed is mandatory")
        _require(0.0 < self.hurst < 1.0, "hurst must lie in (0, 1)")
        self.n_grid = [int(n) for n in self.n_grid]

    @classmethod
    def from_dict(cls, data: dict) -> "NzConfig":
        return _config_from_dict(cls, data, "diagnose-nz config")


def run_nz_diagnostics(config: NzConfig) -> ResultTable:
    """Tabulate the cross-sum ratio over the n grid (no randomness; the
    seed is recorded for uniform run metadata only)."""
    cov = CovarianceFunction.fgn(config.hurst)
    columns = ["hurst", "m", "signs", "n", "ratio"]
    rows = []
    for n in config.n_grid:
        ratio = nz_ratio_diagnostic(cov, n, config.m, config.signs)
        rows.append({
            "hurst": config.hurst, "m": config.m,
            "signs": ";".join(str(s) for s in config.signs),
            "n": n, "ratio": ratio,
        })
    metadata = {"experiment": "diagnose-nz", "version": __version__,
                "config": asdict(config)}
    return ResultTable(columns=columns, rows=rows, metadata=metadata)
