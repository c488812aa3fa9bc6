"""Scalability bench harness.

Reruns the pipeline across a list of frequency factors and records per-stage
wall time plus cache compute counts. The source series is materialized once;
every factor then starts from a cold cache, so its load row times the
resample work, and warm repetitions show up with compute_count 0.

Reports: a CSV of raw rows (floats serialized with ``repr`` so a parsed copy
regenerates the identical file) and a text table with stages as rows,
factors as columns, and a percent-of-column-total block.

CLI::

    bench run --dataset synthetic:7397222 --factors 75,150 --window 48 \
        --dr pca --out bench-out

Dataset refs are either ``synthetic:N`` (seeded daily sinusoid plus noise at
4-second sampling) or an artifact name[@version] in the store named by
--store-root or the TSLENS_STORE_ROOT environment variable. Exit code 0 iff
no stage errored; 2 for invalid arguments.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .artifacts import ArtifactStore
from .cache import STAGES, ReactiveCache
from .clustering import ClusterParams
from .datasets import dataset_from_payload, pick_series
from .encoders import EncoderConfig
from .errors import InvalidInput, TsLensError
from .fingerprint import fingerprint
from .pipeline import PipelineParams, PipelineResult, PipelineRunner
from .projection import ALGORITHMS, DRParams
from .series import TimeSeries

__all__ = [
    "DEFAULT_FACTORS",
    "STORE_ROOT_ENV",
    "Scenario",
    "StageTiming",
    "synthetic_series",
    "run_scenario",
    "render_report",
    "render_table",
    "write_timings_csv",
    "read_timings_csv",
    "main",
]

DEFAULT_FACTORS = (1, 5, 15, 75, 150)
STORE_ROOT_ENV = "TSLENS_STORE_ROOT"
CSV_COLUMNS = ("factor", "stage", "elements", "wall_seconds", "compute_count", "error")

_SAMPLE_SECONDS = 4
_SAMPLES_PER_DAY = 86_400 // _SAMPLE_SECONDS
_NOISE_SCALE = 0.1


def synthetic_series(n: int, seed: int = 0) -> TimeSeries:
    """Seeded solar-like series: one daily sinusoid cycle plus Gaussian noise
    on a single "power" channel at 4-second sampling."""
    if n < 1:
        raise InvalidInput(f"synthetic length must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    i = np.arange(n, dtype=np.float64)
    values = np.sin(2.0 * np.pi * i / _SAMPLES_PER_DAY)
    values += _NOISE_SCALE * rng.standard_normal(n)
    return TimeSeries(
        timestamps=np.arange(n, dtype=np.int64) * (_SAMPLE_SECONDS * 1_000_000_000),
        values=values.reshape(-1, 1),
        channel_names=("power",),
        frequency_seconds=Fraction(_SAMPLE_SECONDS),
    )


@dataclass(frozen=True)
class Scenario:
    dataset: str
    frequency_factors: Tuple[int, ...] = DEFAULT_FACTORS
    window: int = 48
    stride: int = 1
    encoder: EncoderConfig = EncoderConfig(variant="meanpool", pool=4)
    dr: Tuple[DRParams, ...] = (DRParams(algorithm="pca"),)
    clustering: ClusterParams = ClusterParams(min_cluster_size=100)
    repetitions: int = 1

    def __post_init__(self) -> None:
        factors = tuple(self.frequency_factors)
        object.__setattr__(self, "frequency_factors", factors)
        object.__setattr__(self, "dr", tuple(self.dr))
        if not factors:
            raise InvalidInput("frequency_factors must be non-empty")
        if any(f < 1 for f in factors):
            raise InvalidInput("frequency factors must be >= 1")
        if any(b <= a for a, b in zip(factors, factors[1:])):
            raise InvalidInput("frequency factors must be strictly increasing")
        if not self.dr:
            raise InvalidInput("at least one projection configuration is required")
        if self.repetitions < 1:
            raise InvalidInput("repetitions must be >= 1")


@dataclass(frozen=True)
class StageTiming:
    factor: int
    stage: str
    elements: int
    wall_seconds: float
    compute_count: int
    error: str = ""

    def __post_init__(self) -> None:
        if self.stage not in STAGES:
            raise InvalidInput(f"unknown stage {self.stage!r}")
        if self.factor < 1:
            raise InvalidInput("factor must be >= 1")
        if self.elements < 0:
            raise InvalidInput("elements must be >= 0")
        if self.wall_seconds < 0:
            raise InvalidInput("wall_seconds must be >= 0")


def _resolve_dataset(
    ref: str, store: Optional[ArtifactStore]
) -> Tuple[TimeSeries, str]:
    if ref.startswith("synthetic:"):
        text = ref.split(":", 1)[1]
        try:
            n = int(text)
        except ValueError:
            raise InvalidInput(f"synthetic length must be an integer, got {text!r}")
        return synthetic_series(n), fingerprint({"synthetic": n, "seed": 0})
    name, _, version_text = ref.partition("@")
    version = None
    if version_text:
        try:
            version = int(version_text)
        except ValueError:
            raise InvalidInput(f"artifact version must be an integer, got {version_text!r}")
    if store is None:
        raise InvalidInput("artifact dataset refs require a store root")
    artifact, payload = store.get_artifact("dataset", name, version)
    dataset = dataset_from_payload(payload, artifact.metadata, default_name=name)
    series = pick_series(dataset, None)
    return series, fingerprint({"artifact": artifact.id, "series": dataset.series_names[0]})


def _bench_params(scenario: Scenario, factor: int, dr: DRParams) -> PipelineParams:
    return PipelineParams(
        resample_factor=factor,
        window=scenario.window,
        stride=scenario.stride,
        encoder=scenario.encoder,
        dr=dr,
        clustering=scenario.clustering,
    )


def _run_chain(
    runner: PipelineRunner,
    cache: ReactiveCache,
    loader: Callable[[], TimeSeries],
    dataset_fp: str,
    scenario: Scenario,
    factor: int,
    elements: int,
) -> List[StageTiming]:
    rows: List[StageTiming] = []

    def timed(stage: str, fn: Callable[[], object]):
        before = cache.stats().per_stage[stage].compute_count
        start = time.monotonic()
        error = ""
        value = None
        try:
            value = fn()
        except Exception as exc:
            error = str(exc)
        wall = time.monotonic() - start
        delta = cache.stats().per_stage[stage].compute_count - before
        rows.append(StageTiming(factor, stage, elements, wall, delta, error))
        return value

    params = _bench_params(scenario, factor, scenario.dr[0])
    loaded = timed("load", lambda: runner.load(loader, dataset_fp, params))
    if loaded is None:
        return rows
    series, load_fp = loaded
    windowed = timed("windows", lambda: runner.windows(series, load_fp, params))
    if windowed is None:
        return rows
    wm, windows_fp = windowed
    embedded = timed("embed", lambda: runner.embed(wm, windows_fp, params))
    if embedded is None:
        return rows
    emb, embed_fp = embedded
    for dr in scenario.dr:
        params_dr = _bench_params(scenario, factor, dr)
        projected = timed("project", lambda: runner.project(emb, embed_fp, params_dr))
        if projected is None:
            continue
        proj, project_fp = projected
        clustered = timed("cluster", lambda: runner.cluster(proj, project_fp, params_dr))
        if clustered is None:
            continue
        clusters, cluster_fp = clustered
        result = PipelineResult(
            series=series,
            windows=wm,
            embedding=emb,
            projection=proj,
            clusters=clusters,
            fingerprints={
                "load": load_fp,
                "windows": windows_fp,
                "embed": embed_fp,
                "project": project_fp,
                "cluster": cluster_fp,
            },
            params=params_dr,
            dataset_fingerprint=dataset_fp,
        )
        timed("display", lambda: runner.display(result))
    return rows


def run_scenario(
    scenario: Scenario, store: Optional[ArtifactStore] = None
) -> List[StageTiming]:
    """Cold cache per factor; warm repetitions reuse the factor's cache."""
    series, dataset_fp = _resolve_dataset(scenario.dataset, store)

    def loader() -> TimeSeries:
        return series

    rows: List[StageTiming] = []
    for factor in scenario.frequency_factors:
        cache = ReactiveCache()
        runner = PipelineRunner(cache)
        elements = (series.n - 1) // factor + 1
        for _ in range(scenario.repetitions):
            rows.extend(
                _run_chain(runner, cache, loader, dataset_fp, scenario, factor, elements)
            )
    return rows


def write_timings_csv(timings: Sequence[StageTiming], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for t in timings:
            writer.writerow(
                [t.factor, t.stage, t.elements, repr(float(t.wall_seconds)), t.compute_count, t.error]
            )


def read_timings_csv(path) -> List[StageTiming]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(CSV_COLUMNS):
            raise InvalidInput(f"unexpected timings header {header!r}")
        return [
            StageTiming(int(f), s, int(e), float(w), int(c), err)
            for f, s, e, w, c, err in reader
        ]


def _format_block(label_rows: List[Tuple[str, List[str]]], header: List[str]) -> List[str]:
    label_width = max(len(h) for h in [header[0]] + [label for label, _ in label_rows])
    widths = []
    for col in range(1, len(header)):
        cells = [header[col]] + [row[col - 1] for _, row in label_rows]
        widths.append(max(len(c) for c in cells))
    lines = [
        "  ".join(
            [header[0].ljust(label_width)]
            + [header[i + 1].rjust(widths[i]) for i in range(len(widths))]
        )
    ]
    for label, cells in label_rows:
        lines.append(
            "  ".join(
                [label.ljust(label_width)]
                + [cells[i].rjust(widths[i]) for i in range(len(widths))]
            )
        )
    return lines


def render_table(timings: Sequence[StageTiming]) -> str:
    """Text report: wall-seconds table (stages x factors) and a block of
    column percentages; pure in its inputs, so regeneration from the CSV
    reproduces it byte for byte."""
    if not timings:
        raise InvalidInput("no timings to render")
    factors = sorted({t.factor for t in timings})
    wall = {}
    elements = {}
    for t in timings:
        wall[(t.factor, t.stage)] = wall.get((t.factor, t.stage), 0.0) + t.wall_seconds
        elements.setdefault(t.factor, t.elements)
    header = ["stage"] + [str(f) for f in factors]

    seconds_rows: List[Tuple[str, List[str]]] = [
        ("elements", [str(elements[f]) for f in factors])
    ]
    totals = {
        f: sum(wall.get((f, s), 0.0) for s in STAGES if (f, s) in wall) for f in factors
    }
    for stage in STAGES:
        cells = [
            f"{wall[(f, stage)]:.6f}" if (f, stage) in wall else "-" for f in factors
        ]
        seconds_rows.append((stage, cells))
    seconds_rows.append(("total", [f"{totals[f]:.6f}" for f in factors]))

    percent_rows: List[Tuple[str, List[str]]] = []
    for stage in STAGES:
        cells = []
        for f in factors:
            if (f, stage) not in wall:
                cells.append("-")
            elif totals[f] == 0.0:
                cells.append("0.00")
            else:
                cells.append(f"{100.0 * wall[(f, stage)] / totals[f]:.2f}")
        percent_rows.append((stage, cells))

    lines = ["wall seconds by stage and frequency factor", ""]
    lines.extend(_format_block(seconds_rows, header))
    lines.extend(["", "percent of factor total", ""])
    lines.extend(_format_block(percent_rows, header))
    errors = [t for t in timings if t.error]
    if errors:
        lines.extend(["", "errors"])
        for t in errors:
            lines.append(f"  factor={t.factor} stage={t.stage}: {t.error}")
    return "\n".join(lines) + "\n"


def render_report(timings: Sequence[StageTiming], out_dir) -> Tuple[Path, Path]:
    """Write timings.csv and report.txt under out_dir; returns both paths."""
    if not timings:
        raise InvalidInput("no timings to render")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "timings.csv"
    report_path = out / "report.txt"
    write_timings_csv(timings, csv_path)
    report_path.write_text(render_table(timings), encoding="utf-8")
    return csv_path, report_path


def _parse_factors(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise InvalidInput(f"factors must be comma-separated integers, got {text!r}")


def _parse_dr(text: str) -> Tuple[DRParams, ...]:
    out = []
    for name in text.split(","):
        if name not in ALGORITHMS:
            raise InvalidInput(f"unknown projection {name!r}; expected one of {ALGORITHMS}")
        out.append(DRParams(algorithm=name))
    return tuple(out)


def _encoder_from_args(args: argparse.Namespace) -> EncoderConfig:
    if args.encoder == "identity":
        return EncoderConfig(variant="identity")
    if args.encoder == "meanpool":
        return EncoderConfig(variant="meanpool", pool=args.pool)
    return EncoderConfig(variant="randproj", dims=args.dims, seed=args.encoder_seed)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="bench", description="Pipeline scalability bench harness."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario and write reports")
    run.add_argument("--dataset", required=True, help="artifact name[@version] or synthetic:N")
    run.add_argument("--factors", default="1,5,15,75,150", help="comma-separated frequency factors")
    run.add_argument("--window", type=int, default=48)
    run.add_argument("--stride", type=int, default=1)
    run.add_argument("--encoder", choices=("identity", "meanpool", "randproj"), default="meanpool")
    run.add_argument("--pool", type=int, default=4, help="meanpool width")
    run.add_argument("--dims", type=int, default=16, help="randproj output dims")
    run.add_argument("--encoder-seed", type=int, default=0)
    run.add_argument("--dr", default="pca", help="comma-separated projection algorithms")
    run.add_argument("--min-cluster-size", type=int, default=100)
    run.add_argument("--repetitions", type=int, default=1)
    run.add_argument("--out", default="bench-out", help="report output directory")
    run.add_argument(
        "--store-root",
        default=None,
        help=f"artifact store root (default: ${STORE_ROOT_ENV} or ./tslens-store)",
    )
    args = parser.parse_args(argv)

    try:
        scenario = Scenario(
            dataset=args.dataset,
            frequency_factors=_parse_factors(args.factors),
            window=args.window,
            stride=args.stride,
            encoder=_encoder_from_args(args),
            dr=_parse_dr(args.dr),
            clustering=ClusterParams(min_cluster_size=args.min_cluster_size),
            repetitions=args.repetitions,
        )
        store = None
        if not args.dataset.startswith("synthetic:"):
            root = args.store_root or os.environ.get(STORE_ROOT_ENV, "tslens-store")
            store = ArtifactStore(root)
        timings = run_scenario(scenario, store)
        csv_path, report_path = render_report(timings, args.out)
    except TsLensError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    sys.stdout.write(render_table(timings))
    print(f"csv: {csv_path}")
    print(f"report: {report_path}")
    errored = [t for t in timings if t.error]
    for t in errored:
        print(f"stage error: factor={t.factor} stage={t.stage}: {t.error}", file=sys.stderr)
    return 1 if errored else 0


if __name__ == "__main__":
    sys.exit(main())
