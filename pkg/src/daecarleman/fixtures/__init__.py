"""Bundled example models, loadable by name."""
from __future__ import annotations

import json
from importlib import resources

from ..errors import ModelError
from ..expr import ModelSpec, model_from_document

FIXTURES = ("test1", "test1-ode", "test2", "test2-ode", "test3")


def fixture_document(name: str) -> dict:
    if name not in FIXTURES:
        raise ModelError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    text = resources.files(__name__).joinpath(f"{name}.json").read_text()
    return json.loads(text)


def load_fixture(name: str) -> ModelSpec:
    return model_from_document(fixture_document(name))


def reference_fixture(name: str) -> str | None:
    """Name of the substituted-ODE companion of a DAE fixture, if bundled."""
    ref = f"{name}-ode"
    return ref if ref in FIXTURES else None
