"""Source-spec file format: a JSON document with explicit dims and covariance.

Example:

    {
      "dims": {"n_x": 1, "n_s": 1, "n_y": 1},
      "covariance": [[1.0, 1.0, 1.0], [1.0, 1.5, 1.0], [1.0, 1.0, 2.0]],
      "label": "scalar-example"
    }

Dimensions are explicit rather than inferred because the block partition of
the covariance is exactly the input ambiguity worth guarding against.
Unknown keys are rejected so typos cannot silently change the instance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import GaussianSourceSpec, validate_spec
from .errors import SpecFileError

_TOP_KEYS = {"dims", "covariance", "label"}
_DIM_KEYS = {"n_x", "n_s", "n_y"}


@dataclass(frozen=True)
class SourceSpecFile:
    spec: GaussianSourceSpec
    label: str | None


def parse_spec_document(doc) -> SourceSpecFile:
    """Validate a parsed JSON document and build the GaussianSourceSpec.

    Raises SpecFileError naming the offending field for structural problems;
    covariance-level rejections (asymmetry, indefiniteness, singular side
    information) propagate from validate_spec.
    """
    if not isinstance(doc, dict):
        raise SpecFileError("spec document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise SpecFileError(f"unknown key {sorted(unknown)[0]!r} in spec document")
    for key in ("dims", "covariance"):
        if key not in doc:
            raise SpecFileError(f"missing required key {key!r}")

    dims = doc["dims"]
    if not isinstance(dims, dict):
        raise SpecFileError("'dims' must be an object with n_x, n_s, n_y")
    unknown = set(dims) - _DIM_KEYS
    if unknown:
        raise SpecFileError(f"unknown key {sorted(unknown)[0]!r} in 'dims'")
    sizes = []
    for key in ("n_x", "n_s", "n_y"):
        value = dims.get(key)
        if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
            raise SpecFileError(f"'dims.{key}' must be a positive integer, got {value!r}")
        sizes.append(value)

    cov = doc["covariance"]
    try:
        matrix = np.array(cov, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecFileError(f"'covariance' is not a numeric matrix: {exc}") from exc
    if matrix.ndim != 2:
        raise SpecFileError(f"'covariance' must be a nested 2-d array, got {matrix.ndim}-d")

    label = doc.get("label")
    if label is not None and not isinstance(label, str):
        raise SpecFileError(f"'label' must be a string, got {type(label).__name__}")

    try:
        spec = validate_spec(matrix, tuple(sizes))
    except ValueError as exc:
        raise SpecFileError(f"'covariance' rejected: {exc}") from exc
    return SourceSpecFile(spec=spec, label=label)


def load_spec_file(path: str | Path) -> SourceSpecFile:
    """Read and parse a spec file from disk."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFileError(f"spec file is not valid JSON: {exc}") from exc
    return parse_spec_document(doc)


def dump_spec_document(spec: GaussianSourceSpec, label: str | None = None) -> dict:
    """Document form of a validated spec; round-trips through parse_spec_document."""
    doc = {
        "dims": {"n_x": spec.n_x, "n_s": spec.n_s, "n_y": spec.n_y},
        "covariance": spec.q.tolist(),
    }
    if label is not None:
        doc["label"] = label
    return doc
