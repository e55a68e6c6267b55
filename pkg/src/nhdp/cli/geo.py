"""Point-in-polygon aggregation of geolocated events into areal units."""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import geojson
import numpy as np
import pandas as pd
from pydantic import ValidationError
from shapely import points as make_points
from shapely.geometry import shape
from shapely.geometry.base import BaseGeometry
from shapely.ops import transform
from shapely.strtree import STRtree

from nhdp.cli import logger
from nhdp.cli.models import ArealRecord
from nhdp.common.exceptions import DataException

EARTH_RADIUS_KM = 6371.0088
UNASSIGNED = -1


@dataclass(frozen=True)
class Unit:
    unit_id: str
    parent_id: str
    geometry: BaseGeometry


def read_polygons(path: Path) -> List[Unit]:
    """
    Load areal units from a GeoJSON FeatureCollection.

    Every feature needs unit_id and parent_id properties and a Polygon or
    MultiPolygon geometry with closed rings.

    Raises:
        DataException: If the file is not valid GeoJSON of that shape
    """
    try:
        with open(path, encoding="utf-8") as f:
            collection = geojson.load(f)
    except (OSError, ValueError) as exc:
        raise DataException(f"cannot read GeoJSON {path}: {exc}") from exc
    if not isinstance(collection, geojson.FeatureCollection):
        raise DataException(f"{path} is not a GeoJSON FeatureCollection")
    if not collection.is_valid:
        raise DataException(f"invalid GeoJSON in {path}: {collection.errors()}")

    units = []
    for i, feature in enumerate(collection["features"]):
        props = feature.get("properties") or {}
        geometry = feature.get("geometry")
        if geometry is None or geometry["type"] not in ("Polygon", "MultiPolygon"):
            raise DataException(f"feature {i} of {path} is not a polygon")
        if "unit_id" not in props or "parent_id" not in props:
            raise DataException(f"feature {i} of {path} lacks unit_id or parent_id")
        units.append(Unit(str(props["unit_id"]), str(props["parent_id"]), shape(geometry)))
    if not units:
        raise DataException(f"{path} has no features")
    ids = [u.unit_id for u in units]
    duplicated = sorted({i for i in ids if ids.count(i) > 1})
    if duplicated:
        raise DataException(f"duplicate unit_id in {path}: {', '.join(duplicated)}")
    return units


def equal_area_projection(lon0: float, lat0: float):
    """
    Cylindrical equal-area projection with standard parallel lat0, in km.

    x = R (lon - lon0) cos(lat0), y = R sin(lat) / cos(lat0).
    """
    cos0 = np.cos(np.radians(lat0))

    def project(x, y, z=None):
        x = np.radians(np.asarray(x) - lon0) * EARTH_RADIUS_KM * cos0
        y = np.sin(np.radians(np.asarray(y))) * EARTH_RADIUS_KM / cos0
        return x, y

    return project


def unit_areas(units: List[Unit]) -> np.ndarray:
    """Areas in km^2, projected around the centre of the units' bounding box."""
    bounds = np.array([u.geometry.bounds for u in units])
    lon0 = (bounds[:, 0].min() + bounds[:, 2].max()) / 2.0
    lat0 = (bounds[:, 1].min() + bounds[:, 3].max()) / 2.0
    project = equal_area_projection(lon0, lat0)
    return np.array([transform(project, u.geometry).area for u in units])


def assign_points(lon: np.ndarray, lat: np.ndarray, units: List[Unit]) -> np.ndarray:
    """
    Index of the unit covering each point, UNASSIGNED when none does.

    A point on a shared edge goes to the first unit in file order.
    """
    tree = STRtree([u.geometry for u in units])
    point_idx, unit_idx = tree.query(make_points(lon, lat), predicate="covered_by")
    assigned = np.full(np.asarray(lon).size, len(units), dtype=np.int64)
    np.minimum.at(assigned, point_idx, unit_idx)
    assigned[assigned == len(units)] = UNASSIGNED
    return assigned


def read_points(path: Path) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """lon, lat and year of every event; year is 0 when the file has no year column."""
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataException(f"cannot read {path}: {exc}") from exc
    if not {"lon", "lat"} <= set(frame.columns):
        raise DataException(f"{path} needs lon and lat columns")
    frame = frame.dropna(subset=["lon", "lat"])
    columns = ["lon", "lat"] + (["year"] if "year" in frame.columns else [])
    numeric = frame[columns].apply(pd.to_numeric, errors="coerce")
    for name in columns:
        bad = numeric[name].isna() | ~np.isfinite(numeric[name])
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise DataException(
                f"{path}: {name} is missing or not numeric in row {row}", stage="ingest"
            )
    if "year" in frame.columns:
        if (numeric["year"] % 1 != 0).any():
            raise DataException(f"{path}: year must be a whole number", stage="ingest")
        year = numeric["year"].to_numpy(dtype=np.int64)
    else:
        year = np.zeros(len(frame), dtype=np.int64)
    return numeric["lon"].to_numpy(dtype=float), numeric["lat"].to_numpy(dtype=float), year


def aggregate_points(points_path: Path, polygons_path: Path) -> List[ArealRecord]:
    """
    Count events per areal unit and divide by area.

    Counts are averaged over every year from the first to the last year in
    the file, years without events included. Points outside every unit are
    tallied and reported.

    Args:
        points_path: CSV with lon, lat and an optional year column
        polygons_path: GeoJSON FeatureCollection of the units

    Returns:
        One record per unit, in file order
    """
    units = read_polygons(Path(polygons_path))
    lon, lat, year = read_points(Path(points_path))
    n_years = int(year.max() - year.min()) + 1 if year.size else 1

    assigned = assign_points(lon, lat, units)
    unassigned = int(np.sum(assigned == UNASSIGNED))
    if unassigned:
        logger.warning(f"{unassigned} of {assigned.size} points fall outside every unit")
    counts = np.bincount(assigned[assigned != UNASSIGNED], minlength=len(units)) / n_years
    areas = unit_areas(units)

    try:
        records = [
            ArealRecord(unit_id=u.unit_id, parent_id=u.parent_id, count=float(c), area=float(a))
            for u, c, a in zip(units, counts, areas)
        ]
    except ValidationError as exc:
        raise DataException(f"invalid areal unit: {exc}") from exc
    logger.info(
        f"Aggregated {assigned.size - unassigned} points over {n_years} years "
        f"into {len(records)} units"
    )
    return records
