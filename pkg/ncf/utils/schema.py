import json
import os
import logging
from functools import lru_cache
from typing import Dict, Any, List, Tuple

import jsonschema

SWEEP_CONFIG_SCHEMA = 'sweep-config.json'


@lru_cache(maxsize=None)
def load_schema(schema_type: str = SWEEP_CONFIG_SCHEMA) -> Dict[str, Any]:
    """Load a JSON schema shipped in ncf/schemas."""
    schema_path = os.path.join(os.path.dirname(__file__), '..', 'schemas', schema_type)
    with open(schema_path, 'r') as f:
        return json.load(f)


def schema_type_of(key: str, schema_type: str = SWEEP_CONFIG_SCHEMA) -> str:
    """JSON type declared for a top-level key, or '' for keys the schema does not know."""
    return load_schema(schema_type)['properties'].get(key, {}).get('type', '')


def schema_violations(input_data: Dict[str, Any], schema_type: str = SWEEP_CONFIG_SCHEMA) -> List[Tuple[str, str]]:
    """(top-level key, message) per violation, ordered by key; the key is '' for document-level errors."""
    schema = load_schema(schema_type)
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(input_data), key=lambda e: [str(p) for p in e.absolute_path])

    violations = []
    for error in errors:
        key = str(error.absolute_path[0]) if error.absolute_path else ''
        path = '.'.join(str(p) for p in error.absolute_path)
        violations.append((key, f"{path}: {error.message}" if path else error.message))
    return violations


def validate_schema(input_data: Dict[str, Any], schema_type: str = SWEEP_CONFIG_SCHEMA) -> List[str]:
    """
    Validate a configuration document against a schema using jsonschema.

    Args:
        input_data: The configuration keys to validate
        schema_type: File name of the schema in ncf/schemas

    Returns:
        list[str]: One message per violation, ordered by key; empty when the document is valid
    """
    messages = []
    for _, message in schema_violations(input_data, schema_type):
        messages.append(message)
        logging.debug(f"Schema validation error: {message}")
    return messages
