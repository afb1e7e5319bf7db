"""Acceptance criteria, one test and one printed PASS/FAIL line each.

The measurements come from ``suslov verify all --seed 42`` run through the CLI;
the run is repeated once to check the report is byte-identical.
"""

import json

import pytest

from suslov.cli import main
from suslov.harness.verify import rk4_order_ratio, check_rng

SEED = 42

CRITERIA = {
    "1": ("energy conservation, full and reduced", ["energy_conservation"]),
    "2": ("measure preservation, field and weighted EL1", ["measure_preservation", "weighted_divergence"]),
    "3": ("span rank law on and off e_nn = 0", ["span_rank_law"]),
    "4": ("Poisson commutation and f_i drift", ["poisson_commutation", "fi_drift"]),
    "5": ("torus frequencies n = 3 and n = 5", ["kt_frequencies"]),
    "6": ("full vs reduced oracle", ["full_reduced_agreement"]),
    "7": ("Hamiltonization oracle and Kharlamova parabola", ["hamiltonization_oracle", "kharlamova_parabola"]),
    "8": ("Kharlamova closure and Sigma equilibria", ["kharlamova_closure", "sigma_equilibria"]),
    "9": ("topology tags and case (ii) component count", ["topology_classification", "case_ii_components"]),
    "10": ("Lagrange integrals, pendulum residual and period",
           ["lagrange_integrals", "spherical_pendulum", "pendulum_period"]),
    "11": ("RK4 order, CSV round trip, verify determinism", ["rk4_order", "csv_roundtrip", "verify_determinism"]),
}


@pytest.fixture(scope="module")
def reports(tmp_path_factory):
    out = tmp_path_factory.mktemp("verify")
    texts, codes = [], []
    for k in range(2):
        path = out / f"all_{k}.json"
        codes.append(main(["verify", "all", "--seed", str(SEED), "--out", str(path)]))
        texts.append(path.read_bytes())
    return codes, texts, {c["name"]: c for c in json.loads(texts[0])["checks"]}


def _line(capsys, text):
    with capsys.disabled():
        print(f"\n    {text}", end="")


@pytest.mark.parametrize("criterion", list(CRITERIA), ids=[f"criterion_{k}" for k in CRITERIA])
def test_criterion(criterion, reports, capsys):
    label, names = CRITERIA[criterion]
    codes, texts, checks = reports
    parts, ok = [], True
    for name in names:
        c = checks[name]
        ok &= c["status"] == "pass"
        parts.append(f"{name}={c['value']:.3g}<{c['tolerance']:.0e}")
    if criterion == "11":
        same = texts[0] == texts[1]
        ok &= same
        parts.append(f"verify_all_twice_identical={same}")
    _line(capsys, f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {label}: {'; '.join(parts)}")
    assert ok, {n: checks[n] for n in names}


def test_verify_all_exit_code(reports):
    codes, _, checks = reports
    assert codes == [0, 0], [c for c in checks.values() if c["status"] == "fail"]


def test_rk4_ratio_close_to_sixteen():
    ratio, _, _ = rk4_order_ratio(check_rng("rk4_order", SEED))
    assert 14.0 < ratio < 18.0
    # without projection the classical rate is unchanged
    ratio_raw, _, _ = rk4_order_ratio(check_rng("rk4_order", SEED), reproject=False)
    assert 14.0 < ratio_raw < 18.0
