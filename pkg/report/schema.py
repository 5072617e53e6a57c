import jsonschema

SCHEMA_VERSION = 1

_number_matrix = {
    "type": "array",
    "minItems": 3,
    "maxItems": 3,
    "items": {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": ["number", "null"]}},
}

_vector3 = {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number"}}

_environment = {
    "type": "object",
    "description": "Interpreter, numpy and platform the report was produced with.",
    "properties": {
        "python": {"type": "string"},
        "numpy": {"type": "string"},
        "platform": {"type": "string"},
    },
    "required": ["python", "numpy", "platform"],
}

_checks = {
    "type": "object",
    "description": "Verdict per named check; the report passes only if all are true.",
    "additionalProperties": {"type": "boolean"},
}

_common = {
    "schema_version": {"const": SCHEMA_VERSION},
    "command": {"type": "string"},
    "config": {"type": "object"},
    "environment": _environment,
    "checks": _checks,
    "passed": {"type": "boolean"},
    "timing": {"type": "object", "additionalProperties": {"type": "number"}},
}

verify_schema = {
    "description": "Constant flag curvature verification over chart samples",
    "type": "object",
    "properties": {
        **_common,
        "command": {"const": "verify"},
        "samples": {
            "type": "array",
            "items": {
                "type": "object",
                "description": "One sample point. dif is raw K^i_k - K tau^i_k; quot is null where undefined.",
                "properties": {
                    "label": {"type": "string"},
                    "K": {"type": "number"},
                    "p": _vector3,
                    "y": _vector3,
                    "F": {"type": "number"},
                    "dif": _number_matrix,
                    "normalized": _number_matrix,
                    "quot": _number_matrix,
                    "max_normalized": {"type": "number"},
                    "max_quot_deviation": {"type": "number"},
                    "max_scaled_quot_deviation": {"type": "number"},
                    "flag_curvature": {"type": ["number", "null"]},
                },
                "required": ["label", "K", "p", "y", "F", "dif", "normalized", "quot", "max_normalized"],
            },
        },
        "max_normalized": {"type": "number"},
        "max_quot_deviation": {"type": "number"},
        "max_scaled_quot_deviation": {"type": "number"},
    },
    "required": ["schema_version", "command", "config", "environment", "checks", "passed", "samples", "max_normalized"],
}

ys_schema = {
    "description": "Yasuda-Shimada criteria for one (K, lambda, epsilon)",
    "type": "object",
    "properties": {
        **_common,
        "command": {"const": "ys-criteria"},
        "criteria": {"type": "object"},
        "riemannian": {"type": "boolean"},
    },
    "required": ["schema_version", "command", "config", "environment", "checks", "passed", "criteria"],
}

projective_schema = {
    "description": "Projective Weyl and Douglas magnitudes with the projective flatness verdict",
    "type": "object",
    "properties": {
        **_common,
        "command": {"const": "projective"},
        "weyl": {"type": "array", "items": {"type": "number"}},
        "douglas": {"type": "array", "items": {"type": "number"}},
        "max_weyl": {"type": "number"},
        "max_douglas": {"type": "number"},
        "verdict": {"type": "string"},
    },
    "required": ["schema_version", "command", "config", "environment", "checks", "passed", "max_weyl", "max_douglas", "verdict"],
}

geodesic_schema = {
    "description": "Conservation summary of one geodesic run",
    "type": "object",
    "properties": {
        **_common,
        "command": {"const": "geodesic"},
        "initial": {"type": "object"},
        "max_drift": {"type": "number"},
        "steps": {"type": "integer"},
        "status": {"enum": ["completed", "chart_exit"]},
        "final_time": {"type": "number"},
        "recenterings": {"type": "integer"},
        "trajectory_csv": {"type": ["string", "null"]},
    },
    "required": ["schema_version", "command", "config", "environment", "checks", "passed", "max_drift", "steps", "status"],
}

schemas = {
    "verify": verify_schema,
    "ys-criteria": ys_schema,
    "projective": projective_schema,
    "geodesic": geodesic_schema,
}


def validate_report(data: dict):
    """Raise jsonschema.ValidationError if ``data`` does not match the schema of its command."""
    command = data.get("command")
    if command not in schemas:
        raise ValueError(f"unknown report command {command!r}; expected one of {sorted(schemas)}")
    jsonschema.validate(instance=data, schema=schemas[command])
