"""Config-driven experiment runner with flat CSV output.

An experiment builds one matrix (synthetic, adversarial, kernel from a
point file, or a Matrix Market file), then for every trial draws a
nested column-sample family and records the coherence estimate at each
requested sample size; kernel experiments additionally record both
low-rank approximation errors. Trials use seed = base_seed + trial, and
per-trial estimates share one permutation so each trial's curve is
non-decreasing in the sample size.

Config files are flat `key = value` text; '#' starts a comment. All
rows go to a single fixed-schema CSV so one summarizer serves every
experiment kind.
"""

import csv
import math
import os
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

from .coherence import estimate_coherence
from .kernels import (
    KernelSpec,
    build_kernel,
    default_rbf_width,
    energy_rank,
    load_csv,
    load_matrix_market,
    standardize,
)
from .lowrank import column_projection, nystrom
from .sampling import RNG_NAME, nested_samples
from .synthetic import SynthSpec, add_noise, adversarial_spsd, low_rank_matrix

__all__ = [
    "RAW_HEADER",
    "SUMMARY_HEADER",
    "EXPERIMENT_KINDS",
    "OUTPUT_DIR_ENV",
    "ExperimentConfig",
    "TrialResult",
    "parse_config_text",
    "config_from_dict",
    "load_config",
    "run_experiment",
    "resolve_output_path",
    "write_raw_csv",
    "read_raw_csv",
    "summarize",
    "write_summary_csv",
]

EXPERIMENT_KINDS = (
    "worst_case",
    "synth_exact",
    "synth_noisy",
    "kernel_suite",
    "coherence_only",
)

OUTPUT_DIR_ENV = "MATCOH_OUTPUT_DIR"

RAW_HEADER = [
    "experiment_id", "kind", "trial", "seed", "l", "r_used",
    "gamma_true", "gamma_est", "abs_error", "method", "normalized_error",
    "rng_name", "wall_time_ms",
]

SUMMARY_HEADER = [
    "experiment_id", "l", "method", "trials",
    "mean_abs_error", "std_abs_error",
    "mean_normalized_error", "std_normalized_error",
]

_KNOWN_KEYS = {
    "id", "kind", "l_values", "trials", "base_seed", "output", "timing",
    "r_policy", "r", "energy_fraction", "exclude", "matrix_seed",
    "n", "m", "rank", "decay", "coherence", "noise",
    "inflation", "inner_dim",
    "matrix", "data", "kernel", "rbf_width", "poly_degree", "poly_offset",
    "standardize",
}


@dataclass(frozen=True)
class TrialResult:
    """One output row: a coherence estimate, optionally with a method error."""

    experiment_id: str
    kind: str
    trial: int
    seed: int
    l: int
    r_used: int
    gamma_true: float
    gamma_est: float
    abs_error: float
    method: str | None = None
    normalized_error: float | None = None
    wall_time_ms: int | None = None

    def __post_init__(self):
        for v in (self.gamma_true, self.gamma_est, self.abs_error):
            if not math.isfinite(v):
                raise ValueError("result values must be finite")
        if abs(self.abs_error - abs(self.gamma_true - self.gamma_est)) > 1e-15:
            raise ValueError("abs_error does not match |gamma_true - gamma_est|")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of one experiment run."""

    kind: str
    experiment_id: str
    l_values: tuple
    trials: int = 1
    base_seed: int = 0
    output: str | None = None
    timing: bool = True
    r_policy: str = "none"          # none | explicit | energy
    r: int | None = None
    energy_fraction: float = 0.99
    exclude: tuple = ()
    matrix_seed: int | None = None
    # synthetic source
    n: int | None = None
    m: int | None = None
    rank: int | None = None
    decay: str = "medium"
    coherence: str = "low"
    noise: float | None = None
    # adversarial source
    inflation: float = 1e3
    inner_dim: int | None = None
    # file / kernel source
    matrix: str | None = None
    data: str | None = None
    kernel: str | None = None
    rbf_width: float | None = None
    poly_degree: int = 2
    poly_offset: float = 1.0
    standardize: bool = False

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if not self.l_values:
            raise ValueError("l_values must not be empty")
        if list(self.l_values) != sorted(set(self.l_values)):
            raise ValueError("l_values must be strictly ascending")
        if self.l_values[0] < 1:
            raise ValueError("l values must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.r_policy not in ("none", "explicit", "energy"):
            raise ValueError(f"unknown r_policy {self.r_policy!r}")
        if self.r_policy == "explicit" and (self.r is None or self.r < 1):
            raise ValueError("explicit r_policy needs r >= 1")
        if self.r_policy == "energy" and not 0.0 < self.energy_fraction <= 1.0:
            raise ValueError("energy_fraction must be in (0, 1]")


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_int_list(raw: str) -> tuple:
    return tuple(int(tok) for tok in raw.replace(",", " ").split())


def parse_config_text(text: str) -> dict:
    """Parse flat `key = value` lines into a raw string dict."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        raw[key] = value
    return raw


_INT_KEYS = {"trials", "base_seed", "r", "matrix_seed", "n", "m", "rank",
             "inner_dim", "poly_degree"}
_FLOAT_KEYS = {"energy_fraction", "noise", "inflation", "rbf_width",
               "poly_offset"}
_BOOL_KEYS = {"timing", "standardize"}
_LIST_KEYS = {"l_values", "exclude"}


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build a validated config from raw string values."""
    if "kind" not in raw:
        raise ValueError("config needs a 'kind' key")
    kwargs = {}
    for key, value in raw.items():
        try:
            if key in _INT_KEYS:
                kwargs[key] = int(value)
            elif key in _FLOAT_KEYS:
                kwargs[key] = float(value)
            elif key in _BOOL_KEYS:
                kwargs[key] = _parse_bool(value)
            elif key in _LIST_KEYS:
                kwargs[key] = _parse_int_list(value)
            else:
                kwargs[key] = value
        except ValueError as exc:
            raise ValueError(f"config key {key!r}: {exc}") from exc
    kwargs["experiment_id"] = kwargs.pop("id", kwargs["kind"])
    return ExperimentConfig(**kwargs)


def load_config(path, overrides=None) -> ExperimentConfig:
    """Read a config file, applying `key=value` overrides on top."""
    raw = parse_config_text(Path(path).read_text())
    for item in overrides or ():
        if "=" not in item:
            raise ValueError(f"override must be key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ValueError(f"unknown override key {key!r}")
        raw[key] = value
    return config_from_dict(raw)


def _require(config, *keys):
    missing = [k for k in keys if getattr(config, k) is None]
    if missing:
        raise ValueError(
            f"experiment kind {config.kind!r} needs config keys: {', '.join(missing)}"
        )


def _build_synth_spec(config: ExperimentConfig, noise) -> SynthSpec:
    _require(config, "n", "m", "rank")
    return SynthSpec(
        n=config.n, m=config.m, rank=config.rank,
        decay=config.decay, coherence=config.coherence,
        noise=noise, seed=config.matrix_seed if config.matrix_seed is not None
        else config.base_seed,
    )


def _build_matrix(config: ExperimentConfig):
    """Source matrix for the configured experiment."""
    kind = config.kind
    if kind == "synth_exact":
        return low_rank_matrix(_build_synth_spec(config, noise=None))
    if kind == "synth_noisy":
        _require(config, "noise")
        spec = _build_synth_spec(config, noise=config.noise)
        base = low_rank_matrix(_build_synth_spec(config, noise=None))
        return add_noise(base, spec)
    if kind == "worst_case":
        _require(config, "n")
        seed = config.matrix_seed if config.matrix_seed is not None else config.base_seed
        return adversarial_spsd(config.n, seed=seed, inflation=config.inflation,
                                inner_dim=config.inner_dim)
    if kind == "kernel_suite" or (kind == "coherence_only" and config.data):
        return _build_kernel_matrix(config)
    if kind == "coherence_only":
        if config.matrix:
            return load_matrix_market(config.matrix)
        return low_rank_matrix(_build_synth_spec(config, noise=None))
    raise AssertionError(f"unhandled kind {kind}")


def _build_kernel_matrix(config: ExperimentConfig):
    _require(config, "data", "kernel")
    dataset = load_csv(config.data)
    if config.standardize:
        dataset = standardize(dataset)
    kind = config.kernel
    if kind == "rbf":
        width = config.rbf_width
        if width is None:
            width = default_rbf_width(dataset)
        spec = KernelSpec(kind="rbf", rbf_width=width)
    elif kind == "polynomial":
        spec = KernelSpec(kind="polynomial", poly_degree=config.poly_degree,
                          poly_offset=config.poly_offset)
    elif kind == "linear":
        spec = KernelSpec(kind="linear")
    else:
        raise ValueError(f"unknown kernel {kind!r}")
    return build_kernel(dataset, spec)


def _effective_rank(config: ExperimentConfig, X):
    if config.r_policy == "explicit":
        return config.r
    if config.r_policy == "energy":
        return energy_rank(X, config.energy_fraction)
    return None


def run_experiment(config: ExperimentConfig):
    """Execute all trials and return the result rows in deterministic order.

    Rows are ordered by (trial, l, method). If `config.output` is set the
    raw CSV is written as well; a partially written file is removed on
    failure.
    """
    X = _build_matrix(config)
    m = X.shape[1]
    if config.l_values[-1] > m:
        raise ValueError(f"largest l {config.l_values[-1]} exceeds {m} columns")
    if config.exclude and config.l_values[-1] > m - len(set(config.exclude)):
        raise ValueError("largest l infeasible with the excluded columns")

    r_eff = _effective_rank(config, X)
    gamma_true = estimate_coherence(X, rank=r_eff).gamma
    with_methods = config.kind == "kernel_suite"

    results = []
    for trial in range(config.trials):
        seed = config.base_seed + trial
        samples = nested_samples(X, config.l_values[-1], seed,
                                 excluded=config.exclude)
        for l in config.l_values:
            sample = samples[l - 1]
            start = time.perf_counter()
            report = estimate_coherence(sample.submatrix, rank=r_eff)
            est_ms = round((time.perf_counter() - start) * 1000)
            common = dict(
                experiment_id=config.experiment_id, kind=config.kind,
                trial=trial, seed=seed, l=l, r_used=report.rank_used,
                gamma_true=gamma_true, gamma_est=report.gamma,
                abs_error=abs(gamma_true - report.gamma),
            )
            results.append(TrialResult(
                **common, wall_time_ms=est_ms if config.timing else None))
            if with_methods:
                for fn in (column_projection, nystrom):
                    start = time.perf_counter()
                    approx = fn(X, sample)
                    method_ms = round((time.perf_counter() - start) * 1000)
                    results.append(TrialResult(
                        **common, method=approx.method,
                        normalized_error=approx.normalized_error,
                        wall_time_ms=method_ms if config.timing else None))

    if config.output:
        write_raw_csv(resolve_output_path(config.output), results)
    return results


def resolve_output_path(path) -> Path:
    """Apply the output-directory environment override to a path."""
    path = Path(path)
    out_dir = os.environ.get(OUTPUT_DIR_ENV)
    if out_dir:
        path = Path(out_dir) / path.name
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_raw_csv(path, results):
    """Write result rows under the fixed raw schema; atomic on failure."""
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(RAW_HEADER)
            for r in results:
                writer.writerow([
                    r.experiment_id, r.kind, r.trial, r.seed, r.l, r.r_used,
                    _fmt(r.gamma_true), _fmt(r.gamma_est), _fmt(r.abs_error),
                    r.method or "", _fmt(r.normalized_error),
                    RNG_NAME, _fmt(r.wall_time_ms),
                ])
    except BaseException:
        path.unlink(missing_ok=True)
        raise


def read_raw_csv(path):
    """Read a raw CSV back into TrialResult rows."""
    results = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RAW_HEADER:
            raise ValueError(f"{path}: not a raw result file (bad header)")
        for row in reader:
            results.append(TrialResult(
                experiment_id=row[0], kind=row[1], trial=int(row[2]),
                seed=int(row[3]), l=int(row[4]), r_used=int(row[5]),
                gamma_true=float(row[6]), gamma_est=float(row[7]),
                abs_error=float(row[8]), method=row[9] or None,
                normalized_error=float(row[10]) if row[10] else None,
                wall_time_ms=int(row[12]) if row[12] else None,
            ))
    return results


def _mean_std(values):
    if not values:
        return None, None
    if len(values) == 1:
        return values[0], 0.0
    return statistics.mean(values), statistics.stdev(values)


def summarize(results):
    """Aggregate rows into mean/std per (experiment, l, method).

    Returns a list of dicts matching SUMMARY_HEADER. The standard
    deviation is the sample one (ddof 1), defined as 0 for one trial.
    """
    if not results:
        raise ValueError("no results to summarize")
    groups = {}
    for r in results:
        groups.setdefault((r.experiment_id, r.l, r.method or ""), []).append(r)
    rows = []
    for key in sorted(groups):
        bucket = groups[key]
        mean_abs, std_abs = _mean_std([r.abs_error for r in bucket])
        norm_values = [r.normalized_error for r in bucket
                       if r.normalized_error is not None]
        mean_norm, std_norm = _mean_std(norm_values)
        rows.append({
            "experiment_id": key[0], "l": key[1], "method": key[2],
            "trials": len(bucket),
            "mean_abs_error": mean_abs, "std_abs_error": std_abs,
            "mean_normalized_error": mean_norm,
            "std_normalized_error": std_norm,
        })
    return rows


def write_summary_csv(path_or_file, summary_rows):
    """Write summary rows; accepts a path or an open text stream."""
    own = not hasattr(path_or_file, "write")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for row in summary_rows:
            writer.writerow([_fmt(row[k]) for k in SUMMARY_HEADER])
    finally:
        if own:
            fh.close()
