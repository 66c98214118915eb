"""The shipped scenario schema matches what the parser accepts."""

import json
import os

import pytest
from jsonschema import Draft202012Validator

from cyclic_swarm.model import ConfigError, ScenarioConfig

SCHEMA_PATH = os.path.join(os.path.dirname(__file__), "..", "schemas", "scenario.schema.json")


@pytest.fixture(scope="module")
def validator():
    with open(SCHEMA_PATH) as fp:
        schema = json.load(fp)
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


def base_doc():
    return {
        "model": "linear", "n": 3, "dt": 1e-3, "t_end": 5.0, "seed": 4,
        "output_stride": 100,
        "init": {"kind": "box", "low": [-5, -5], "high": [5, 5]},
        "schedule": [{"t_start": 0.0, "u_c": [5.0, 1.0], "leaders": [0, 1, 0]}],
    }


VALID_VARIANTS = [
    base_doc(),
    {**base_doc(), "model": "bugs", "epsilon": 1e-3,
     "schedule": [{"t_start": 0.0, "u_c": [0.5, 0.0], "leaders": [0, 1, 0]}]},
    {"model": "linear", "n": 3, "t_end": 1.0,
     "schedule": [{"t_start": 0.0, "u_c": [0, 0], "leaders": [True, False, False]}]},
    {**base_doc(), "init": {"kind": "explicit", "positions": [[0, 0], [1, 0], [0, 1]]}},
    {**base_doc(), "schedule": [
        {"t_start": 0.0, "u_c": [5, 1], "leaders": [0, 1, 0]},
        {"t_start": 2.0, "u_c": [-1, 0], "leaders": [1, 1, 1]},
    ]},
]

INVALID_VARIANTS = [
    {k: v for k, v in base_doc().items() if k != "model"},
    {k: v for k, v in base_doc().items() if k != "schedule"},
    {**base_doc(), "model": "quadratic"},
    {**base_doc(), "n": 1},
    {**base_doc(), "n": 3.5},
    {**base_doc(), "dt": 0},
    {**base_doc(), "seed": -1},
    {**base_doc(), "output_stride": 0},
    {**base_doc(), "schedule": []},
    {**base_doc(), "schedule": [{"t_start": 0.0, "u_c": [5.0], "leaders": [0, 1, 0]}]},
    {**base_doc(), "schedule": [{"t_start": 0.0, "u_c": [5, 1, 2], "leaders": [0, 1, 0]}]},
    {**base_doc(), "schedule": [{"u_c": [5, 1], "leaders": [0, 1, 0]}]},
    {**base_doc(), "init": {"kind": "sphere", "low": [-5, -5], "high": [5, 5]}},
    {**base_doc(), "init": {"kind": "box", "low": [-5, -5]}},
]

# Schema-only rejections: the parser coerces any truthy value to a flag, the
# schema documents the canonical 0/1/boolean encoding.
SCHEMA_ONLY_INVALID = [
    {**base_doc(), "schedule": [{"t_start": 0.0, "u_c": [5, 1], "leaders": [0, 2, 0]}]},
]


@pytest.mark.parametrize("doc", VALID_VARIANTS)
def test_valid_documents_pass_schema_and_parser(validator, doc):
    validator.validate(doc)
    ScenarioConfig.from_json_dict(doc)


@pytest.mark.parametrize("doc", INVALID_VARIANTS + SCHEMA_ONLY_INVALID)
def test_invalid_documents_fail_schema(validator, doc):
    errors = list(validator.iter_errors(doc))
    assert errors, f"schema accepted invalid doc: {doc}"


@pytest.mark.parametrize("doc", INVALID_VARIANTS)
def test_invalid_documents_fail_parser_too(doc):
    with pytest.raises(ConfigError):
        ScenarioConfig.from_json_dict(doc)


def test_round_trip_output_validates(validator):
    cfg = ScenarioConfig.from_json_dict(base_doc())
    validator.validate(cfg.to_json_dict())
