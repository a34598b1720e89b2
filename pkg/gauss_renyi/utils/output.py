"""Writers for the files a CLI run leaves in its output directory."""
import hashlib
import json
import logging
import os
from typing import Any, Dict, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from gauss_renyi.errors import SchemaValidationError
from gauss_renyi.utils.schema import validate_schema

CSV_FORMAT = "%.17g"


def ensure_dir(out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def write_csv(path: str, header: Sequence[str], columns: Sequence[np.ndarray], formats=None) -> str:
    """Comma-separated columns with a header row, 17 significant digits, '\\n' line ends."""
    table = np.column_stack([np.asarray(c) for c in columns])
    np.savetxt(
        path,
        table,
        fmt=formats or CSV_FORMAT,
        delimiter=",",
        header=",".join(header),
        comments="",
        newline="\n",
        encoding="utf-8",
    )
    logging.info(f"Wrote {path}")
    return path


def to_jsonable(document: Any) -> Any:
    if isinstance(document, BaseModel):
        return document.model_dump(mode="json")
    return document


def write_json(path: str, document: Any, schema_name: Optional[str] = None) -> str:
    """Dump a model or dict as UTF-8 JSON after checking it against ``schema_name``, if given."""
    data = to_jsonable(document)
    if schema_name:
        _, valid = validate_schema(data, schema_name)
        if not valid:
            raise SchemaValidationError(f"{os.path.basename(path)} does not match {schema_name}")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
        f.write("\n")
    logging.info(f"Wrote {path}")
    return path


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def digests(paths: Sequence[str]) -> Dict[str, str]:
    return {os.path.basename(path): sha256_file(path) for path in paths}
