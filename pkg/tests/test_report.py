import json
import math

from hypothesis import given
from hypothesis import strategies as st

from fourierdirac.report import ReportEntry, all_pass, render_json, render_markdown


@given(st.floats(allow_nan=True), st.floats(min_value=1e-300, max_value=1.0))
def test_pass_iff_within_tolerance(residual, tol):
    e = ReportEntry("x", "a = b", "p", residual, tol)
    assert e.passed == (math.isfinite(residual) and residual <= tol)
    assert e.as_dict()["pass"] == e.passed


def test_rendering():
    good = ReportEntry("one", "a = b", "p=1", 1e-9, 1e-6)
    bad = ReportEntry("two", "c = d", "p=2", 1e-3, 1e-6)
    assert all_pass([good]) and not all_pass([good, bad])
    doc = json.loads(render_json([good, bad]))
    assert doc["identities"] == ["one", "two"] and doc["pass"] is False
    md = render_markdown([good, bad])
    assert "FAIL" in md and "`a = b`" in md
