import json
import os
import logging
from typing import Dict, Any, Tuple

import jsonschema


def load_schema(schema_name: str) -> Dict[str, Any]:
    schema_path = os.path.join(os.path.dirname(__file__), '..', 'schemas', schema_name)
    with open(schema_path, 'r', encoding='utf-8') as f:
        return json.load(f)


def validate_schema(data: Dict[str, Any], schema_name: str) -> Tuple[str, bool]:
    """
    Validate an output document against one of the bundled JSON schemas.

    Args:
        data: The JSON-ready dict to validate
        schema_name: File name under gauss_renyi/schemas, e.g. 'run-manifest.json'

    Returns:
        tuple[str, bool]: (schema_name, is_valid)
    """
    try:
        jsonschema.validate(instance=data, schema=load_schema(schema_name))
        return schema_name, True

    except jsonschema.exceptions.ValidationError as e:
        logging.error(f"Schema validation error ({schema_name}): {e.message}")
        return schema_name, False
    except Exception as e:
        logging.error(f"Schema validation failed ({schema_name}): {str(e)}")
        return schema_name, False
