import pathlib

import pytest

from ordlang.opm import get_opm

ROOT = pathlib.Path(__file__).resolve().parent.parent
PROGRAMS = ROOT / "programs"
SMOKE = PROGRAMS / "smoke"
GOLDEN = pathlib.Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def regex_opm():
    return get_opm("regex")


@pytest.fixture(scope="session")
def ownership_opm():
    return get_opm("ownership")


def program_source(name: str) -> str:
    return (PROGRAMS / name).read_text()


def smoke_programs() -> list[pathlib.Path]:
    return sorted(SMOKE.glob("*.ord"))
