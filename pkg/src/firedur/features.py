"""Model-ready matrices: numeric features, categorical codes, temporal split
and train-fitted standardization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSplit, EmptyDataset, UnknownColumn

NUMERIC_COLUMNS = ("log_acres", "latitude", "longitude", "alarm_month", "alarm_day_of_year")
CATEGORICAL_COLUMNS = ("CAUSE", "AGENCY", "UNIT_ID", "C_METHOD", "OBJECTIVE")

TRAIN, TEST = "TRAIN", "TEST"
DEFAULT_SPLIT_YEAR = 2018

_CATEGORICAL_GETTERS = {
    "CAUSE": lambda r: r.cause_code,
    "AGENCY": lambda r: r.agency_code,
    "UNIT_ID": lambda r: r.unit_id,
    "C_METHOD": lambda r: r.c_method_code,
    "OBJECTIVE": lambda r: r.objective_code,
}


def _numeric_value(record, column):
    if column == "log_acres":
        return math.log1p(record.gis_acres or 0.0)
    if column == "latitude":
        return record.latitude
    if column == "longitude":
        return record.longitude
    if column == "alarm_month":
        return float(record.alarm_date.month)
    if column == "alarm_day_of_year":
        return float(record.alarm_date.timetuple().tm_yday)
    raise UnknownColumn(column)


def _categorical_value(record, column):
    getter = _CATEGORICAL_GETTERS.get(column)
    if getter is None:
        raise UnknownColumn(column)
    return getter(record)


@dataclass(frozen=True)
class FeatureSpec:
    """Column layout plus train-fitted category code maps.

    Codes are dense 0..k-1 in first-appearance order; code k is reserved for
    values never seen in training. Missing categoricals (None) count as a
    category of their own rather than being imputed.
    """

    numeric_columns: tuple = NUMERIC_COLUMNS
    categorical_columns: tuple = CATEGORICAL_COLUMNS
    category_maps: dict = field(default_factory=dict)

    @property
    def column_names(self) -> tuple:
        return self.numeric_columns + self.categorical_columns

    @property
    def width(self) -> int:
        return len(self.column_names)

    def unseen_code(self, column: str) -> int:
        return len(self.category_maps[column])

    def code_for(self, column: str, raw) -> int:
        return self.category_maps[column].get(raw, self.unseen_code(column))

    def to_json(self) -> str:
        payload = {
            "numeric_columns": list(self.numeric_columns),
            "categorical_columns": list(self.categorical_columns),
            # pairs, not an object: raw values keep their type (int/str/null)
            "category_maps": {
                column: [[raw, code] for raw, code in mapping.items()]
                for column, mapping in self.category_maps.items()
            },
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FeatureSpec":
        payload = json.loads(text)
        return cls(
            numeric_columns=tuple(payload["numeric_columns"]),
            categorical_columns=tuple(payload["categorical_columns"]),
            category_maps={
                column: {(None if raw is None else raw): code for raw, code in pairs}
                for column, pairs in payload["category_maps"].items()
            },
        )


@dataclass
class Dataset:
    features: np.ndarray      # (n, d): numeric columns then integer codes
    target: np.ndarray        # log1p(containment_days)
    target_days: np.ndarray
    spec: FeatureSpec
    split: np.ndarray         # per-row TRAIN/TEST labels

    @property
    def train_mask(self) -> np.ndarray:
        return self.split == TRAIN

    @property
    def test_mask(self) -> np.ndarray:
        return self.split == TEST


@dataclass(frozen=True)
class Standardizer:
    """Per-numeric-column mean/std fitted on TRAIN rows (population std).

    Constant columns are flagged and transform to all zeros; categorical
    code columns pass through untouched.
    """

    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray
    n_numeric: int

    def to_json(self) -> str:
        return json.dumps({
            "mean": [repr(v) for v in self.mean.tolist()],
            "std": [repr(v) for v in self.std.tolist()],
            "constant": self.constant.tolist(),
            "n_numeric": self.n_numeric,
        }, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Standardizer":
        payload = json.loads(text)
        return cls(
            mean=np.array([float(v) for v in payload["mean"]], dtype=float),
            std=np.array([float(v) for v in payload["std"]], dtype=float),
            constant=np.array(payload["constant"], dtype=bool),
            n_numeric=payload["n_numeric"],
        )


def build_feature_spec(train_records) -> FeatureSpec:
    """Fit category code maps from training records only."""
    if not train_records:
        raise EmptyDataset("cannot fit a feature spec on zero records")
    maps: dict = {}
    for column in CATEGORICAL_COLUMNS:
        mapping: dict = {}
        for record in train_records:
            raw = _categorical_value(record, column)
            if raw not in mapping:
                mapping[raw] = len(mapping)
        maps[column] = mapping
    return FeatureSpec(category_maps=maps)


def build_matrix(records, spec: FeatureSpec, split=None) -> Dataset:
    """Assemble the feature matrix. Deterministic and order-preserving.

    Nothing here reads CONT_DATE: the label's only source feeds the target
    vectors alone.
    """
    n = len(records)
    width = spec.width
    matrix = np.empty((n, width), dtype=float)
    target = np.empty(n, dtype=float)
    target_days = np.empty(n, dtype=float)
    for i, record in enumerate(records):
        col = 0
        for column in spec.numeric_columns:
            matrix[i, col] = _numeric_value(record, column)
            col += 1
        for column in spec.categorical_columns:
            matrix[i, col] = spec.code_for(column, _categorical_value(record, column))
            col += 1
        target[i] = record.log_cont_days
        target_days[i] = record.containment_days
    if split is None:
        split = np.full(n, TRAIN, dtype=object)
    return Dataset(features=matrix, target=target, target_days=target_days,
                   spec=spec, split=np.asarray(split, dtype=object))


def temporal_split(records, threshold_year: int = DEFAULT_SPLIT_YEAR) -> np.ndarray:
    """TRAIN before the threshold alarm year, TEST from it onward.

    The split looks only at ALARM_DATE; the digitization year is never
    consulted.
    """
    labels = np.array(
        [TRAIN if r.alarm_date.year < threshold_year else TEST for r in records],
        dtype=object,
    )
    if len(labels) == 0 or (labels == TRAIN).all() or (labels == TEST).all():
        raise DegenerateSplit(
            f"alarm years do not straddle {threshold_year}: "
            f"{int((labels == TRAIN).sum())} train / {int((labels == TEST).sum())} test")
    return labels


def fit_standardizer(dataset: Dataset) -> Standardizer:
    """Fit per-numeric-column mean/std on TRAIN rows only (population std)."""
    train = dataset.features[dataset.train_mask]
    if train.shape[0] == 0:
        raise EmptyDataset("standardizer needs at least one training row")
    n_numeric = len(dataset.spec.numeric_columns)
    block = train[:, :n_numeric]
    mean = block.mean(axis=0)
    std = block.std(axis=0)  # ddof=0
    constant = std == 0.0
    return Standardizer(mean=mean, std=np.where(constant, 1.0, std),
                        constant=constant, n_numeric=n_numeric)


def apply_standardizer(standardizer: Standardizer, matrix: np.ndarray) -> np.ndarray:
    out = np.array(matrix, dtype=float, copy=True)
    n = standardizer.n_numeric
    out[:, :n] = (out[:, :n] - standardizer.mean) / standardizer.std
    out[:, :n][:, standardizer.constant] = 0.0
    return out


# --- persistence -------------------------------------------------------------


def dataset_to_csv(dataset: Dataset) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(list(dataset.spec.column_names) + ["log_cont_days", "containment_days", "split"])
    for i in range(dataset.features.shape[0]):
        row = [repr(v) for v in dataset.features[i].tolist()]
        row.append(repr(float(dataset.target[i])))
        row.append(repr(float(dataset.target_days[i])))
        row.append(str(dataset.split[i]))
        writer.writerow(row)
    return out.getvalue()


def dataset_from_csv(text: str, spec: FeatureSpec) -> Dataset:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    expected = list(spec.column_names) + ["log_cont_days", "containment_days", "split"]
    if header != expected:
        raise UnknownColumn(",".join(header))
    rows, target, days, split = [], [], [], []
    for row in reader:
        rows.append([float(v) for v in row[:spec.width]])
        target.append(float(row[spec.width]))
        days.append(float(row[spec.width + 1]))
        split.append(row[spec.width + 2])
    return Dataset(
        features=np.array(rows, dtype=float).reshape(len(rows), spec.width),
        target=np.array(target, dtype=float),
        target_days=np.array(days, dtype=float),
        spec=spec,
        split=np.array(split, dtype=object),
    )
