"""CSV ingestion with a missing-value mask.

Cells are numeric; the empty string is the missing marker (stored as NaN
with the mask bit set).  Errors name the offending line/column.
"""

import csv

import numpy as np

__all__ = ["CsvError", "load_csv"]


class CsvError(ValueError):
    pass


def load_csv(path, target_column, feature_columns=None):
    """Reads a UTF-8 CSV with a header row.

    Returns (X, y, mask, feature_names): the feature matrix, the target
    vector, and a boolean missing mask aligned with X.  Missing targets
    are an error.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvError(f"{path}: empty file") from None
        if target_column not in header:
            raise CsvError(f"{path}: target column {target_column!r} not in header")
        if feature_columns is None:
            feature_columns = [h for h in header if h != target_column]
        for col in feature_columns:
            if col not in header:
                raise CsvError(f"{path}: feature column {col!r} not in header")
        t_idx = header.index(target_column)
        f_idx = [header.index(c) for c in feature_columns]

        rows, targets, mask = [], [], []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(header):
                raise CsvError(
                    f"{path}: line {lineno} has {len(rec)} fields, header has "
                    f"{len(header)}"
                )
            cell = rec[t_idx].strip()
            if cell == "":
                raise CsvError(f"{path}: line {lineno}: missing target value")
            try:
                targets.append(float(cell))
            except ValueError:
                raise CsvError(
                    f"{path}: line {lineno}, column {target_column!r}: "
                    f"non-numeric value {cell!r}"
                ) from None
            vals, miss = [], []
            for col, j in zip(feature_columns, f_idx):
                cell = rec[j].strip()
                if cell == "":
                    vals.append(np.nan)
                    miss.append(True)
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise CsvError(
                        f"{path}: line {lineno}, column {col!r}: "
                        f"non-numeric value {cell!r}"
                    ) from None
                miss.append(False)
            rows.append(vals)
            mask.append(miss)

    X = np.asarray(rows, dtype=float).reshape(len(rows), len(feature_columns))
    return (
        X,
        np.asarray(targets, dtype=float),
        np.asarray(mask, dtype=bool).reshape(X.shape),
        list(feature_columns),
    )
