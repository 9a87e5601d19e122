"""Benchmark harness: hybrid vs. Zhang-mode vs. KNN vs. SVM on one split.

Usage::

    python -m knnsvm --dataset-images train-images.idx3-ubyte \\
        --dataset-labels train-labels.idx1-ubyte --feature hog \\
        --train-per-class 600 --test-per-class 100 \\
        --technique hybrid,zhang,knn --k 1 --m 3 --p 18 --c-reg 4 --gamma 0.0025

Options may also come from a ``--config`` file of ``key = value`` lines whose
keys are the flag names without the leading dashes; flags win over the file.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .dataset import Dataset, FormatError, SplitError, SplitSpec, load_csv, load_idx_dataset, take_split
from .features import GradientConfig, HogConfig, extract_all, extract_gradient_features, extract_hog, write_feature_csv
from .hybrid import HybridConfig, hybrid_classify, knn_classify
from .svm import DEFAULT_GAMMA, SvmTrainConfig, cross_kernel, predict_multiclass, train_multiclass

TECHNIQUES = ("hybrid", "zhang", "knn", "svm")
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    dataset_images: Optional[str] = None
    dataset_labels: Optional[str] = None
    dataset_csv: Optional[str] = None
    width: int = 28
    height: int = 28
    class_count: int = 10
    feature: str = "hog"
    n_blocks: Optional[int] = None
    binarize_threshold: int = 128
    cell_size: int = 4
    split: SplitSpec = SplitSpec(600, 100)
    techniques: tuple[str, ...] = ("hybrid",)
    hybrid: HybridConfig = HybridConfig()
    output: str = "text"
    threads: int = 1
    seed: int = 0
    dump_features: Optional[str] = None

    def feature_extractor(self):
        if self.feature == "hog":
            return extract_hog, HogConfig(cell_size=self.cell_size)
        n = self.n_blocks or GradientConfig.for_image_size(self.width).n_blocks
        return extract_gradient_features, GradientConfig(n, self.binarize_threshold)


@dataclass
class BenchmarkRow:
    technique: str
    metric: str
    accuracy: float  # fraction in [0, 1]
    timings: dict[str, float] = field(default_factory=dict)
    knn_routed: int = 0
    svm_routed: int = 0
    fallback: int = 0
    seed: int = 0


# --------------------------------------------------------------------------
# configuration

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="knnsvm", description="KNN/SVM hybrid digit-classification benchmark.")
    # every default is None so file values can be told apart from explicit flags
    p.add_argument("--config")
    p.add_argument("--dataset-images")
    p.add_argument("--dataset-labels")
    p.add_argument("--dataset-csv")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--class-count", type=int)
    p.add_argument("--feature", choices=("gradient", "hog"))
    p.add_argument("--n-blocks", type=int)
    p.add_argument("--binarize-threshold", type=int)
    p.add_argument("--cell-size", type=int)
    p.add_argument("--train-per-class", type=int)
    p.add_argument("--test-per-class", type=int)
    p.add_argument("--technique", action="append",
                   help="hybrid, zhang, knn or svm; repeat or comma-separate for several")
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--c-reg", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--metric", choices=("euclidean", "cosine"))
    p.add_argument("--threads", type=int)
    p.add_argument("--output", choices=("text", "csv"))
    p.add_argument("--seed", type=int, help="recorded in the output; nothing is randomised")
    p.add_argument("--dump-features", help="write test-set features as label,f0,f1,... CSV")
    return p


DEFAULTS = {
    "width": 28, "height": 28, "class_count": 10, "feature": "hog", "binarize_threshold": 128,
    "cell_size": 4, "train_per_class": 600, "test_per_class": 100, "technique": ["hybrid"],
    "k": 1, "m": 3, "p": 18, "c_reg": 1.0, "gamma": DEFAULT_GAMMA, "tol": 1e-3,
    "metric": "euclidean", "threads": os.cpu_count() or 1, "output": "text", "seed": 0,
}


def read_config_file(path: str | Path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def parse_config(argv: Sequence[str]) -> RunConfig:
    parser = build_parser()
    if not argv:
        raise UsageError("no arguments given; a dataset is required (see --help)")
    args = vars(parser.parse_args(list(argv)))

    merged = dict(DEFAULTS)
    if args["config"]:
        try:
            file_values = read_config_file(args["config"])
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        # coerce through the parser so file and flag values get identical validation
        file_argv = []
        for key, value in file_values.items():
            if key == "config" or key not in args:
                raise UsageError(f"unknown config key {key!r}")
            file_argv += [f"--{key.replace('_', '-')}", value]
        for key, value in vars(parser.parse_args(file_argv)).items():
            if value is not None and key != "config":
                merged[key] = value
    for key, value in args.items():
        if value is not None and key != "config":
            merged[key] = value

    if not merged.get("dataset_csv") and not (merged.get("dataset_images") and merged.get("dataset_labels")):
        raise UsageError("give --dataset-csv, or both --dataset-images and --dataset-labels")

    techniques = []
    for item in merged["technique"]:
        techniques += [t.strip() for t in item.split(",") if t.strip()]
    bad = [t for t in techniques if t not in TECHNIQUES]
    if bad or not techniques:
        raise UsageError(f"unknown technique(s) {bad}; choose from {TECHNIQUES}")

    try:
        svm = SvmTrainConfig(c_reg=merged["c_reg"], gamma=merged["gamma"], tol=merged["tol"])
        hybrid = HybridConfig(k_votes=merged["k"], gate_m=merged["m"], sift_p=merged["p"],
                              metric=merged["metric"], svm=svm)
        split = SplitSpec(merged["train_per_class"], merged["test_per_class"])
        if merged["threads"] < 1:
            raise ValueError("threads must be >= 1")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    return RunConfig(
        dataset_images=merged.get("dataset_images"), dataset_labels=merged.get("dataset_labels"),
        dataset_csv=merged.get("dataset_csv"), width=merged["width"], height=merged["height"],
        class_count=merged["class_count"], feature=merged["feature"], n_blocks=merged.get("n_blocks"),
        binarize_threshold=merged["binarize_threshold"], cell_size=merged["cell_size"], split=split,
        techniques=tuple(dict.fromkeys(techniques)), hybrid=hybrid, output=merged["output"],
        threads=merged["threads"], seed=merged["seed"], dump_features=merged.get("dump_features"),
    )


# --------------------------------------------------------------------------
# running

def load_dataset(config: RunConfig) -> Dataset:
    if config.dataset_csv:
        with open(config.dataset_csv) as f:
            return load_csv(f, config.width, config.height, config.class_count)
    return load_idx_dataset(config.dataset_images, config.dataset_labels, config.class_count)


def run_techniques(config: RunConfig, x_train, y_train, x_test, y_test,
                   feature_seconds: float = 0.0) -> list[BenchmarkRow]:
    """Run every requested technique on the same feature matrices."""
    rows = []
    for technique in config.techniques:
        timings = {"features": feature_seconds}
        if technique in ("hybrid", "zhang"):
            hc = config.hybrid
            if technique == "zhang":
                hc = HybridConfig(hc.k_votes, hc.gate_m, hc.sift_p, hc.metric, hc.svm, "overall")
            report = hybrid_classify(x_train, y_train, x_test, hc, y_test, threads=config.threads)
            timings.update(report.timings)
            rows.append(BenchmarkRow(technique, hc.metric, report.accuracy, timings, report.knn_routed_count,
                                     report.svm_routed_count, report.fallback_count, config.seed))
        elif technique == "knn":
            t0 = time.perf_counter()
            pred = knn_classify(x_train, y_train, x_test, config.hybrid.k_votes, config.hybrid.metric)
            timings["gate_knn"] = time.perf_counter() - t0
            rows.append(BenchmarkRow(technique, config.hybrid.metric, float((pred == y_test).mean()), timings,
                                     knn_routed=len(y_test), seed=config.seed))
        elif technique == "svm":
            t0 = time.perf_counter()
            model = train_multiclass(x_train, y_train, config.hybrid.svm)
            pred = predict_multiclass(model, cross_kernel(x_test, x_train, config.hybrid.svm.gamma))
            timings["svm"] = time.perf_counter() - t0
            rows.append(BenchmarkRow(technique, "-", float((pred == y_test).mean()), timings,
                                     svm_routed=len(y_test), seed=config.seed))
    return rows


def run_benchmark(config: RunConfig) -> list[BenchmarkRow]:
    if not config.techniques:
        raise ValueError("no techniques requested")
    train, test = take_split(load_dataset(config), config.split)
    extractor, fconfig = config.feature_extractor()
    t0 = time.perf_counter()
    x_train = extract_all(train.images, extractor, fconfig)
    x_test = extract_all(test.images, extractor, fconfig)
    feature_seconds = time.perf_counter() - t0
    if config.dump_features:
        with open(config.dump_features, "w") as f:
            write_feature_csv(x_test, test.labels, f)
    return run_techniques(config, x_train, train.labels, x_test, test.labels, feature_seconds)


# --------------------------------------------------------------------------
# output

PHASES = ("features", "distances", "gate_knn", "svm")
COLUMNS = ("technique", "metric", "accuracy") + tuple(f"t_{p}" for p in PHASES) + (
    "knn_routed", "svm_routed", "fallback", "seed")


def _cells(row: BenchmarkRow) -> list[str]:
    if not 0.0 <= row.accuracy <= 1.0:
        raise ValueError(f"accuracy {row.accuracy} outside [0, 1]")
    return ([row.technique, row.metric, f"{100 * row.accuracy:.2f}"]
            + [f"{row.timings.get(p, 0.0):.3f}" for p in PHASES]
            + [str(row.knn_routed), str(row.svm_routed), str(row.fallback), str(row.seed)])


def emit_report(rows: Sequence[BenchmarkRow], fmt: str = "text") -> str:
    """Render rows as an aligned table or CSV (accuracy in percent, times in seconds)."""
    if not rows:
        raise ValueError("no rows to report")
    table = [list(COLUMNS)] + [_cells(r) for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(table)
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown output format {fmt!r}")
    widths = [max(len(r[i]) for r in table) for i in range(len(COLUMNS))]
    lines = ["  ".join(c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
             for r in table]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        rows = run_benchmark(config)
    except (FormatError, SplitError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit code
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    sys.stdout.write(emit_report(rows, config.output))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
