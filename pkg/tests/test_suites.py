import pytest

from qrelent.io import report_json
from qrelent.suites import SUITES, run_suite

QUICK = {
    "dpi": dict(trials=30),
    "donald": dict(trials=15),
    "sums": dict(trials=20),
    "scaling": dict(trials=20),
    "pinching": dict(trials=10),
    "lemma2": dict(trials=3),
    "lemma3": dict(),
    "dini": dict(trials=3),
    "ladder": dict(),
    "oracle": dict(trials=20),
}


@pytest.mark.parametrize("name", sorted(QUICK))
def test_suite_passes_and_reports_schema(name):
    report = run_suite(name, seed=99, **QUICK[name])
    assert report["pass"] is True
    for key in ("check", "params", "seed", "residuals", "trials", "runtime_ms"):
        assert key in report
    assert report["check"] == name and report["seed"] == 99
    # serializable without surprises
    assert report_json(report).startswith("{")


def test_registry_is_complete():
    assert set(QUICK) == set(SUITES)


def test_unknown_suite_rejected():
    with pytest.raises(ValueError):
        run_suite("bogus", seed=1)


def test_seed_changes_trials_but_not_schema():
    a = run_suite("dpi", seed=1, trials=5)
    b = run_suite("dpi", seed=2, trials=5)
    assert a["trials"] != b["trials"]


def test_same_seed_reproduces():
    a = run_suite("donald", seed=5, trials=5)
    b = run_suite("donald", seed=5, trials=5)
    a.pop("runtime_ms"), b.pop("runtime_ms")
    assert report_json(a) == report_json(b)
