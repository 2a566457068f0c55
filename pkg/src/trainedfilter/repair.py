"""Run-time filtering: classify each pixel and apply that class's trained weights."""
from __future__ import annotations

import numpy as np

from .classify import ClassifierSpec, aperture_stack, class_ids
from .frame_io import as_plane, to_pixels
from .lsq_train import CoefficientTable


def classify_map(plane, spec: ClassifierSpec) -> np.ndarray:
    plane = as_plane(plane)
    return class_ids(aperture_stack(plane), spec)


def _check(table: CoefficientTable, spec: ClassifierSpec) -> None:
    if table.class_bits != spec.class_bits:
        raise ValueError(
            f"table has {table.class_bits}-bit classes but classifier "
            f"'{spec.complexity_mode}' produces {spec.class_bits}-bit classes"
        )


def filter_values(plane, table: CoefficientTable, spec: ClassifierSpec,
                  return_classes: bool = False):
    """Unrounded filter output (float64), optionally with the class map used."""
    _check(table, spec)
    plane = as_plane(plane)
    ap = aperture_stack(plane)
    ids = class_ids(ap, spec)
    values = np.einsum("hwk,hwk->hw", ap, table.weights[ids])
    if return_classes:
        return values, ids
    return values


def repair_plane(plane, table: CoefficientTable, spec: ClassifierSpec,
                 return_classes: bool = False):
    if return_classes:
        values, ids = filter_values(plane, table, spec, return_classes=True)
        return to_pixels(values), ids
    return to_pixels(filter_values(plane, table, spec))

