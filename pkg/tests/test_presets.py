"""Experiment presets: structure, outcome evaluation, reproducibility."""

import pytest

from fragsim.presets import (
    PRESET_NAMES,
    duso_zechner_model,
    run_duso_zechner,
    run_preset,
    run_threshold_scan,
)
from fragsim.lyapunov import classify_regime


def test_preset_names_dispatch():
    with pytest.raises(ValueError):
        run_preset("bogus", 0)
    assert set(PRESET_NAMES) == {
        "threshold-scan",
        "duso-zechner",
        "explosivity-probe",
        "projection-crn",
    }


def test_threshold_scan_structure():
    result = run_threshold_scan(0, count=6)
    assert set(result["ensembles"]) == {"kappa_F=1.9", "kappa_F=2.0", "kappa_F=2.1"}
    assert len(result["rows"]) == 18
    out = result["outcome"]
    # the boundary ensemble is reported but not part of the pass criteria
    assert out["boundary_reported_only"] == "kappa_F=2.0"
    assert set(out) >= {
        "empty_return_fraction_low",
        "median_mass_ratio",
        "passed",
    }


def test_duso_zechner_outcome():
    result = run_duso_zechner(0)
    out = result["outcome"]
    assert out["relative_gap"] <= 0.10
    assert out["reference_return_fraction"] >= 0.95
    assert out["passed"]


def test_duso_zechner_model_is_positive_recurrent():
    cls = classify_regime(duso_zechner_model())
    assert cls.kind == "positive_recurrent"
    assert cls.condition == "a"


def test_preset_reproducibility():
    a = run_preset("projection-crn", 3, count=4)
    b = run_preset("projection-crn", 3, count=4)
    assert a == b
