import pytest

from formacalc import checks
from formacalc.checks import SUITES, run_suite
from formacalc.derham import Form
from formacalc.errors import DomainError
from formacalc.formal import FormalFunction, Space


@pytest.mark.parametrize("name", sorted(SUITES))
def test_every_suite_passes_on_a_small_space(name):
    space = Space(1, 1, 3) if name != "poincare-formal" else Space(0, 1, 3)
    result = run_suite(name, space, samples=3, seed=2)
    assert result.passed, result.witness
    assert result.checked > 0
    assert result.to_json()["suite"] == name


def test_results_are_seed_deterministic():
    a = run_suite("leibniz", Space(2, 1, 3), samples=5, seed=9)
    b = run_suite("leibniz", Space(2, 1, 3), samples=5, seed=9)
    assert a.dumps() == b.dumps()


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope", Space(1, 0, 0))


def test_low_truncation_is_refused():
    with pytest.raises(DomainError):
        run_suite("dd", Space(1, 1, 1))


def test_a_broken_operator_is_caught(monkeypatch):
    real_d = checks.d

    def broken(w):
        # adds x1 dx2 on functions, which is not closed
        out = real_d(w)
        if w.degree == 0:
            out = out + Form.dx(w.space, 2) * FormalFunction.x(w.space, 1)
        return out

    monkeypatch.setattr(checks, "d", broken)
    result = run_suite("dd", Space(2, 0, 0), samples=3, seed=1)
    assert not result.passed and result.witness
