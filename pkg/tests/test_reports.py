import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from annulus_nev.reports import FAIL, PASS, PASS_SMALL, Row, assemble, overall_verdict, reports_csv, reports_json, verdicts_by_id


def rows_from(residuals, regressor=1.0):
    return [Row(float(i + 2), float(i + 2), 1.0, [("a", 1.0 + res)], regressor) for i, res in enumerate(residuals)]


def test_all_nonnegative_is_pass():
    reps = assemble("X", rows_from([0.0, 0.5, 2.0]))
    assert {r.verdict for r in reps} == {PASS}
    assert overall_verdict(reps) == PASS


def test_small_term_envelope():
    reps = assemble("X", rows_from([-3.0, 1.0], regressor=2.0), limit=100)
    assert reps[0].verdict == PASS_SMALL and reps[1].verdict == PASS
    assert reps[0].fit.coefficient == pytest.approx(1.5)
    reps = assemble("X", rows_from([-300.0], regressor=2.0), limit=100)
    assert reps[0].verdict == FAIL


def test_regressor_floor_of_one():
    reps = assemble("X", rows_from([-50.0], regressor=0.01), limit=100)
    assert reps[0].fit.coefficient == pytest.approx(50.0)


def test_bounded_rule():
    ok = assemble("B", rows_from([-1.0, -5.0, -10.5]), "bounded")
    assert overall_verdict(ok) == PASS_SMALL
    bad = assemble("B", rows_from([-1.0, -5.0, -11.5]), "bounded")
    assert overall_verdict(bad) == FAIL
    with pytest.raises(ValueError):
        assemble("B", rows_from([0.0]), "nope")


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=8))
def test_residual_is_recomputable(res):
    for rep in assemble("X", rows_from(res)):
        assert rep.residual == rep.recomputed_residual()
        assert rep.residual == pytest.approx(rep.rhs - rep.lhs, abs=1e-12)


def test_verdict_ordering_and_grouping():
    a = assemble("A", rows_from([1.0]))
    b = assemble("B", rows_from([-1000.0]))
    assert verdicts_by_id(a + b) == {"A": PASS, "B": FAIL}
    assert overall_verdict(a + b) == FAIL
    assert overall_verdict([]) == PASS


def test_csv_and_json_serialisation():
    reps = assemble("A", rows_from([0.25, -0.5]))
    text = reports_csv(reps)
    assert text.splitlines()[0] == "inequality_id,r,adjusted_r,lhs,a,residual,verdict"
    assert text.splitlines()[1] == "A,2,2,1,1.25,0.25,pass"
    assert text.endswith("\n") and "\r" not in text
    data = json.loads(reports_json(reps))
    assert data[1]["rhs_terms"] == [{"name": "a", "value": 0.5}]
    assert reports_csv(reps) == reports_csv(list(reversed(reps)))
