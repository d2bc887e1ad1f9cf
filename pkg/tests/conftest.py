import functools

import pytest

from daecarleman import analyze, carleman_dae, load_fixture


@functools.lru_cache(maxsize=None)
def analyzed(name):
    model = load_fixture(name)
    eq, coeffs = analyze(model)
    return model, eq, coeffs


@functools.lru_cache(maxsize=None)
def reduced(name, order):
    return carleman_dae(analyzed(name)[2], order)


@pytest.fixture
def test1():
    return analyzed("test1")


@pytest.fixture
def test2():
    return analyzed("test2")


@pytest.fixture
def test3():
    return analyzed("test3")


_VERDICTS = {}


def verdict(number, ok, detail):
    """Record the outcome of one acceptance criterion."""
    _VERDICTS[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(_VERDICTS[number])


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[n])
