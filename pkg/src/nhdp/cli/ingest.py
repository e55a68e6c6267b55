"""Reading areal tables into two-level datasets."""

from pathlib import Path
from typing import List

import numpy as np
import pandas as pd
from pydantic import ValidationError

from nhdp.cli import logger
from nhdp.cli.models import ArealRecord
from nhdp.common.exceptions import DataException
from nhdp.model.transforms import standardize as standardize_values
from nhdp.state.models import TwoLevelDataset

ID_COLUMNS = ("unit_id", "parent_id")
AREAL_COLUMNS = ["unit_id", "parent_id", "count", "area", "density"]


def read_areal_table(path: Path) -> List[ArealRecord]:
    """
    Parse an areal CSV into validated records.

    The table needs unit_id and parent_id and either a density column or
    count and area columns. When all three are present they must agree.

    Raises:
        DataException: On a missing column, a duplicate or parentless unit,
            a non-positive area or inconsistent densities
    """
    try:
        frame = pd.read_csv(path, dtype={"unit_id": str, "parent_id": str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataException(f"cannot read {path}: {exc}") from exc

    missing = [c for c in ID_COLUMNS if c not in frame.columns]
    if missing:
        raise DataException(f"{path} is missing columns: {', '.join(missing)}")
    has_density = "density" in frame.columns
    has_count_area = {"count", "area"} <= set(frame.columns)
    if not (has_density or has_count_area):
        raise DataException(f"{path} needs a density column or count and area columns")

    if frame["unit_id"].isna().any():
        raise DataException(f"{path} has rows without unit_id")
    duplicated = frame["unit_id"][frame["unit_id"].duplicated()].unique()
    if duplicated.size:
        raise DataException(f"duplicate unit_id: {', '.join(map(str, duplicated))}")
    parentless = frame["unit_id"][frame["parent_id"].isna()]
    if parentless.size:
        raise DataException(f"units without parent_id: {', '.join(map(str, parentless))}")

    columns = [c for c in ("count", "area", "density") if c in frame.columns]
    frame = frame.astype({c: float for c in columns})
    records = []
    for row in frame[list(ID_COLUMNS) + columns].itertuples(index=False):
        fields = {k: v for k, v in row._asdict().items() if not (k in columns and pd.isna(v))}
        try:
            records.append(ArealRecord(**fields))
        except ValidationError as exc:
            raise DataException(f"invalid unit {fields['unit_id']}: {exc}") from exc
    return records


def records_to_dataset(records: List[ArealRecord], standardize: bool = True) -> TwoLevelDataset:
    """Build a dataset of densities, optionally standardized with its transform recorded."""
    if not records:
        raise DataException("no areal units to ingest")
    density = np.array([r.density for r in records], dtype=float)
    has_counts = all(r.count is not None and r.area is not None for r in records)
    transform = None
    values = density
    if standardize:
        values, mean, sd = standardize_values(density)
        transform = (mean, sd)
    return TwoLevelDataset.from_arrays(
        values,
        [r.parent_id for r in records],
        unit_ids=[r.unit_id for r in records],
        areas=np.array([r.area for r in records], dtype=float) if has_counts else None,
        counts=np.array([r.count for r in records], dtype=float) if has_counts else None,
        transform=transform,
    )


def ingest_table(path: Path, standardize: bool = True) -> TwoLevelDataset:
    """
    Read an areal CSV into a dataset of (optionally standardized) densities.

    Args:
        path: CSV with unit_id, parent_id and density or count and area
        standardize: Replace densities by z-scores and record the transform

    Returns:
        The dataset
    """
    dataset = records_to_dataset(read_areal_table(Path(path)), standardize)
    logger.info(
        f"Ingested {dataset.n_customers} units in {dataset.n_groups} groups from {path}"
    )
    return dataset


def records_frame(records: List[ArealRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.model_dump() for r in records], columns=AREAL_COLUMNS)


def dataset_frame(data: TwoLevelDataset, raw: np.ndarray) -> pd.DataFrame:
    """Areal table of a dataset with its values on the density scale."""
    frame = pd.DataFrame(
        {
            "unit_id": list(data.unit_ids),
            "parent_id": [data.group_ids[g] for g in data.group_of],
        }
    )
    if data.counts is not None and data.areas is not None:
        frame["count"] = data.counts
        frame["area"] = data.areas
    frame["density"] = raw
    return frame
