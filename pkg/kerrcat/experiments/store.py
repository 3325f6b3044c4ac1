import json
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger

from kerrcat.exceptions import InvalidArgumentError

FLOAT_FORMAT = '%.12e'


@dataclass(frozen=True, eq=False)
class ResultTable:
    name: str
    columns: list[str]
    units: list[str]
    rows: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim == 1:
            rows = rows.reshape(-1, len(self.columns)) if rows.size else np.empty((0, len(self.columns)))
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise InvalidArgumentError(f"Table '{self.name}': rows of width {rows.shape[-1]} "
                                       f"do not match {len(self.columns)} columns")
        if len(self.units) != len(self.columns):
            raise InvalidArgumentError(f"Table '{self.name}': {len(self.units)} units for {len(self.columns)} columns")
        object.__setattr__(self, 'rows', rows)

    @classmethod
    def from_columns(cls, name: str, data: dict[str, tuple[str, Any]], metadata: dict | None = None) -> "ResultTable":
        """Build from {column: (unit, values)}; scalars broadcast to the longest column."""
        length = max(np.size(values) for _, values in data.values())
        columns = [np.broadcast_to(np.asarray(values, dtype=float), (length,)) for _, values in data.values()]
        return cls(name=name, columns=list(data), units=[unit for unit, _ in data.values()],
                   rows=np.column_stack(columns) if columns else np.empty((0, 0)), metadata=metadata or {})

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=self.columns)

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]


def _canonical(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _canonical(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(item) for item in value]
    if isinstance(value, np.ndarray):
        return _canonical(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


class ResultStore:
    """Writes CSV tables with JSON metadata sidecars into one run directory."""

    def __init__(self, directory: str):
        self.directory = directory
        self.written: list[str] = []

    def _path(self, name: str, suffix: str) -> str:
        return os.path.join(self.directory, f"{name}.{suffix}")

    def add(self, table: ResultTable) -> str:
        logger.info(f"Writing table '{table.name}' with {table.rows.shape[0]} rows")
        sidecar = {'columns': table.columns, 'units': table.units, 'metadata': _canonical(table.metadata)}
        try:
            table.to_frame().to_csv(self._path(table.name, 'csv'), index=False, float_format=FLOAT_FORMAT,
                                    lineterminator='\n')
            with open(self._path(table.name, 'json'), 'w', encoding='utf-8') as handle:
                json.dump(sidecar, handle, indent=2, sort_keys=True)
                handle.write('\n')
        except OSError as e:
            logger.error(f"Error while writing table '{table.name}': {e}")
            raise
        self.written.append(table.name)
        return self._path(table.name, 'csv')

    def add_many(self, tables: list[ResultTable]) -> list[str]:
        return [self.add(table) for table in tables]

    def add_json(self, name: str, payload: dict) -> str:
        path = self._path(name, 'json')
        try:
            with open(path, 'w', encoding='utf-8') as handle:
                json.dump(_canonical(payload), handle, indent=2, sort_keys=True)
                handle.write('\n')
        except OSError as e:
            logger.error(f"Error while writing '{name}.json': {e}")
            raise
        return path

    def find(self, name: str) -> ResultTable | None:
        csv_path = self._path(name, 'csv')
        if not os.path.exists(csv_path):
            logger.info(f"Table '{name}' not found in {self.directory}")
            return None
        try:
            frame = pd.read_csv(csv_path)
            with open(self._path(name, 'json'), encoding='utf-8') as handle:
                sidecar = json.load(handle)
        except OSError as e:
            logger.error(f"Error while reading table '{name}': {e}")
            raise
        return ResultTable(name=name, columns=sidecar['columns'], units=sidecar['units'],
                           rows=frame.to_numpy(dtype=float), metadata=sidecar['metadata'])
