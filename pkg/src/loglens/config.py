"""Job specifications: one config document drives every application.

A JobSpec nests the stage configs (loader, adapter, preprocessor,
partition, parser, representation, analysis, evaluation) and serializes
to a sorted-key YAML document that round-trips losslessly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import SpecValidation
from .evaluate import SplitProtocol
from .parsing import AelParams, DrainParams, IplomParams, ParserConfig
from .preprocess import PartitionConfig, PreprocessorConfig
from .records import DatasetAdapter, LoaderConfig

APPLICATIONS = ("summarize", "cluster", "detect_anomaly", "benchmark")
REPRESENTATION_KINDS = ("sequential", "quantitative", "tfidf", "categorical", "counters")
MATRIX_KINDS = ("quantitative", "tfidf", "categorical")
CLUSTER_ALGORITHMS = ("kmeans", "dbscan")
DETECT_ALGORITHMS = ("iforest", "lof", "ewma", "ets_additive", "ngram_topk")


@dataclass
class RepresentationConfig:
    kind: str = "sequential"
    weighting: str = "count"          # quantitative: count | tfidf
    vocab_limit: int | None = None    # tfidf vocabulary cap
    tfidf_unit: str = "body"          # tfidf documents: body | template
    fields: list[str] = field(default_factory=list)  # categorical source fields
    scheme: str = "label"             # categorical: label | one_hot | ordinal
    bucket_seconds: float = 60.0      # counters
    per_template: bool = False        # counters

    def validate(self) -> list[str]:
        errors = []
        if self.kind not in REPRESENTATION_KINDS:
            errors.append(f"representation.kind: unknown kind {self.kind!r}")
        if self.weighting not in ("count", "tfidf"):
            errors.append(f"representation.weighting: unknown weighting {self.weighting!r}")
        if self.vocab_limit is not None and self.vocab_limit < 1:
            errors.append("representation.vocab_limit: must be >= 1")
        if self.tfidf_unit not in ("body", "template"):
            errors.append(f"representation.tfidf_unit: unknown unit {self.tfidf_unit!r}")
        if self.scheme not in ("label", "one_hot", "ordinal"):
            errors.append(f"representation.scheme: unknown scheme {self.scheme!r}")
        if self.bucket_seconds <= 0:
            errors.append("representation.bucket_seconds: must be positive")
        return errors


@dataclass
class AnalysisConfig:
    algorithm: str = "ngram_topk"
    # clustering
    k: int = 3
    eps: float = 0.5
    min_pts: int = 5
    distance: str = "euclidean"
    # feature outlier detectors
    n_trees: int = 100
    subsample: int = 256
    lof_k: int = 10
    # counter baselines
    alpha: float = 0.3
    z_threshold: float = 3.0
    warmup: int = 10
    # sequence detector
    order: int = 2
    top_k: int = 10
    window: int | None = None
    flag_level: str = "partition"
    threshold: float | None = None  # overrides the detector default

    def validate(self) -> list[str]:
        errors = []
        known = CLUSTER_ALGORITHMS + DETECT_ALGORITHMS
        if self.algorithm not in known:
            errors.append(f"analysis.algorithm: unknown algorithm {self.algorithm!r}")
        if self.algorithm == "kmeans" and self.k < 1:
            errors.append("analysis.k: must be >= 1")
        if self.algorithm == "dbscan":
            if self.eps <= 0:
                errors.append("analysis.eps: must be positive")
            if self.min_pts < 1:
                errors.append("analysis.min_pts: must be >= 1")
        if self.distance not in ("euclidean", "cosine"):
            errors.append(f"analysis.distance: unknown distance {self.distance!r}")
        if self.algorithm == "iforest":
            if self.n_trees < 1:
                errors.append("analysis.n_trees: must be >= 1")
            if self.subsample < 2:
                errors.append("analysis.subsample: must be >= 2")
        if self.algorithm == "lof" and self.lof_k < 1:
            errors.append("analysis.lof_k: must be >= 1")
        if self.algorithm in ("ewma", "ets_additive"):
            if not 0 < self.alpha < 1:
                errors.append("analysis.alpha: must lie in (0, 1)")
            if self.warmup < 2:
                errors.append("analysis.warmup: must be >= 2")
        if self.algorithm == "ngram_topk":
            if self.order < 1:
                errors.append("analysis.order: must be >= 1")
            if self.top_k < 1:
                errors.append("analysis.top_k: must be >= 1")
            if self.window is not None and self.window < 1:
                errors.append("analysis.window: must be >= 1")
            if self.flag_level not in ("partition", "event"):
                errors.append(f"analysis.flag_level: unknown level {self.flag_level!r}")
        return errors


@dataclass
class JobSpec:
    application: str
    loader: LoaderConfig
    adapter: DatasetAdapter | None = None
    preprocessor: PreprocessorConfig = field(default_factory=PreprocessorConfig)
    partition: PartitionConfig | None = None
    parser: ParserConfig | None = None
    representation: RepresentationConfig = field(default_factory=RepresentationConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    evaluation: SplitProtocol | None = None
    seed: int = 0

    def validate(self) -> list[str]:
        errors = []
        if self.application not in APPLICATIONS:
            errors.append(f"application: unknown application {self.application!r}")
        errors.extend(self.loader.validate())
        if self.adapter is not None:
            errors.extend(self.adapter.validate())
        errors.extend(self.preprocessor.validate())
        if self.partition is not None:
            errors.extend(self.partition.validate())
        if self.parser is not None:
            errors.extend(self.parser.validate())
        errors.extend(self.representation.validate())
        errors.extend(self.analysis.validate())
        if self.evaluation is not None:
            errors.extend(self.evaluation.validate())
        errors.extend(self._cross_validate())
        return errors

    def _cross_validate(self) -> list[str]:
        errors = []
        app, algo, kind = self.application, self.analysis.algorithm, self.representation.kind
        if app == "summarize" and self.parser is None:
            errors.append("parser: required for summarization")
        if app == "cluster":
            if algo not in CLUSTER_ALGORITHMS:
                errors.append(f"analysis.algorithm: {algo!r} is not a clustering algorithm")
            if kind not in MATRIX_KINDS:
                errors.append(f"representation.kind: {kind!r} yields no feature matrix")
        if app in ("detect_anomaly", "benchmark"):
            if algo not in DETECT_ALGORITHMS:
                errors.append(f"analysis.algorithm: {algo!r} is not a detector")
            if algo in ("ewma", "ets_additive") and kind != "counters":
                errors.append("representation.kind: counter detectors need kind=counters")
            if algo == "ngram_topk" and kind != "sequential":
                errors.append("representation.kind: sequence detection needs kind=sequential")
            if algo in ("iforest", "lof") and kind not in MATRIX_KINDS:
                errors.append(f"representation.kind: {kind!r} yields no feature matrix")
        if app == "benchmark" and self.evaluation is None:
            errors.append("evaluation: required for benchmark runs")
        if app in ("cluster", "detect_anomaly", "benchmark"):
            # representation prerequisites only bind when it is consumed
            if kind == "quantitative" and self.parser is None:
                errors.append("parser: required for quantitative representation")
            if kind == "sequential" and self.partition is None:
                errors.append("partition: required for sequential representation")
            if kind == "quantitative" and self.partition is None:
                errors.append("partition: required for quantitative representation")
            if kind == "tfidf" and self.tfidf_needs_parser():
                errors.append("parser: required when tfidf_unit is template")
            if kind == "categorical" and not self.representation.fields:
                errors.append("representation.fields: required for categorical encoding")
        return errors

    def tfidf_needs_parser(self) -> bool:
        return self.representation.tfidf_unit == "template" and self.parser is None

    def to_dict(self) -> dict:
        def encode(obj):
            if dataclasses.is_dataclass(obj):
                return {f.name: encode(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
            if isinstance(obj, (list, tuple)):
                return [encode(v) for v in obj]
            if isinstance(obj, dict):
                return {k: encode(v) for k, v in obj.items()}
            return obj

        return encode(self)


def spec_to_yaml(spec: JobSpec) -> str:
    """Canonical sorted-key rendering used for report echo and persistence."""
    return yaml.safe_dump(spec.to_dict(), sort_keys=True, default_flow_style=False)


_SECTION_TYPES = {
    "loader": LoaderConfig,
    "adapter": DatasetAdapter,
    "preprocessor": PreprocessorConfig,
    "partition": PartitionConfig,
    "parser": ParserConfig,
    "representation": RepresentationConfig,
    "analysis": AnalysisConfig,
    "evaluation": SplitProtocol,
}
_PARSER_SUBSECTIONS = {"drain": DrainParams, "iplom": IplomParams, "ael": AelParams}
_OPTIONAL_SECTIONS = ("adapter", "partition", "parser", "evaluation")


def _build(cls, data, section: str, errors: list[str]):
    if not isinstance(data, dict):
        errors.append(f"{section}: expected a mapping")
        return None
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in names:
            errors.append(f"{section}.{key}: unknown field")
            continue
        if cls is ParserConfig and key in _PARSER_SUBSECTIONS:
            if value is None:
                continue
            built = _build(_PARSER_SUBSECTIONS[key], value, f"{section}.{key}", errors)
            if built is None:
                continue
            value = built
        if cls is PreprocessorConfig and key == "custom_replace_list":
            value = [tuple(pair) for pair in value]
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        errors.append(f"{section}: {exc}")
        return None


def spec_from_dict(data: dict) -> JobSpec:
    """Build a JobSpec from plain data, raising SpecValidation on any error."""
    errors: list[str] = []
    if not isinstance(data, dict):
        raise SpecValidation(["spec: expected a mapping"])
    known = {"application", "seed"} | set(_SECTION_TYPES)
    for key in data:
        if key not in known:
            errors.append(f"{key}: unknown section")

    application = data.get("application")
    if not isinstance(application, str):
        errors.append("application: required string")
        application = ""
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        errors.append("seed: must be an integer")
        seed = 0

    sections: dict = {}
    for name, cls in _SECTION_TYPES.items():
        raw = data.get(name)
        if raw is None:
            if name == "loader":
                errors.append("loader: required section")
            continue
        built = _build(cls, raw, name, errors)
        if built is not None:
            sections[name] = built

    if errors:
        raise SpecValidation(errors)
    spec = JobSpec(application=application, seed=seed, **sections)
    errors = spec.validate()
    if errors:
        raise SpecValidation(errors)
    return spec


def parse_spec(text: str) -> JobSpec:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SpecValidation([f"spec: invalid document: {exc}"]) from None
    return spec_from_dict(data)


def load_spec(path: str | Path) -> JobSpec:
    return parse_spec(Path(path).read_text(encoding="utf-8"))
