import json
from fractions import Fraction
from pathlib import Path

import pytest

from sintegral.curve import PlaceSet, RationalPoint, validate_curve
from sintegral.pipeline import parse_problem, run_pipeline

ROOT = Path(__file__).resolve().parent.parent
DATA = Path(__file__).resolve().parent / "data"

RANK4_BASIS_XY = [(12, 13), (-14, 13), (-1, 26), (38, 221)]
RANK2_LONG = (0, 1, 1, -2, 0)


def load_rank4_points():
    doc = json.loads((DATA / "rank4_points.json").read_text())
    return doc


def corrected_rows():
    out = []
    for row in load_rank4_points()["rows"]:
        r = dict(row)
        r.update({k: v for k, v in row.get("correction", {}).items() if k != "note"})
        out.append(r)
    return out


@pytest.fixture(scope="session")
def rank4():
    C = validate_curve(-172, 505)
    B = [RationalPoint.from_xy(x, y) for x, y in RANK4_BASIS_XY]
    return C, B, PlaceSet((3, 5, 7))


@pytest.fixture(scope="session")
def rank2_short():
    C = validate_curve(-3024, 46224)
    B = [RationalPoint.from_xy(12, 108), RationalPoint.from_xy(48, 108)]
    return C, B, PlaceSet((3, 5))


def _solve(name, **over):
    doc = json.loads((ROOT / "problems" / f"{name}.json").read_text())
    return run_pipeline(parse_problem(doc, over))


@pytest.fixture(scope="session")
def rank4_result():
    return _solve("rank4")


@pytest.fixture(scope="session")
def rank2_result():
    return _solve("rank2")


@pytest.fixture(scope="session")
def rank2_integral_result():
    return _solve("rank2_integral")


def frac_xy(P):
    return Fraction(P.xi, P.zeta ** 2), Fraction(P.eta, P.zeta ** 3)
