# -*- coding: utf-8 -*-
import json

import numpy as np
import pytest

from characterize import CLAUSES, HOLOMORPHY_BANNER, check, default_xi_grid, positivity_sweep
from config import RunConfig
from core_types import BlockDims
from direct import WeylSamples, constant_potential_weyl_oracle, zeta_grid
from transform import synthetic_phi1

SCALAR = BlockDims(1, 1)


def constant_samples(value, a=200.0, nz=1024):
    zeta = zeta_grid(a, nz)
    return WeylSamples(SCALAR, 1.0, zeta, np.full((nz, 1, 1), value, dtype=complex))


def test_zero_function_is_accepted():
    report = check(constant_samples(0.0, a=50.0, nz=256), 2.0, 64)
    assert report.accepted
    assert report.verdict == "accept"
    assert report.failing_clause is None
    assert report.banner == HOLOMORPHY_BANNER


def test_constant_half_fails_origin_clause():
    report = check(constant_samples(0.5), 2.0, 128)
    assert report.contractivity["pass"]
    assert not report.origin["pass"]
    assert report.failing_clause == "origin"
    assert report.verdict == "reject"


def test_non_contractive_samples_fail_first_clause():
    report = check(constant_samples(1.5), 2.0, 64)
    assert report.failing_clause == "contractivity"
    assert report.contractivity["max_sigma"] == pytest.approx(1.5)


def test_true_weyl_function_is_accepted():
    zeta = zeta_grid(200.0, 1024)
    values = np.array([constant_potential_weyl_oracle(1.0, x + 1j) for x in zeta]).reshape(-1, 1, 1)
    report = check(WeylSamples(SCALAR, 1.0, zeta, values), 2.0, 128)
    assert report.accepted, report.failing_clause
    assert report.positivity["monotone"]


def test_positivity_sweep_brackets_half_pi():
    n, L = 512, 2.0
    h = L / n
    phi = synthetic_phi1(SCALAR, lambda x: x, lambda x: 1.0, L, n)
    sweep = positivity_sweep(phi, default_xi_grid(L, n, 16))
    assert not sweep["pass"]
    assert abs(sweep["critical_xi"] - np.pi / 2) <= 2 * h
    assert sweep["smallest_failing_xi"] >= sweep["critical_xi"]
    assert sweep["monotone"]
    lam = dict(zip(sweep["xi"], sweep["min_eig"]))
    assert lam[1.0] == pytest.approx(1 - (2 / np.pi) ** 2, abs=1e-3)


def test_default_xi_grid_lies_on_cells():
    grid = default_xi_grid(2.0, 64, 16)
    assert grid[-1] == pytest.approx(2.0)
    np.testing.assert_allclose(grid / (2.0 / 64), np.round(grid / (2.0 / 64)))
    assert len(grid) == 16


def test_report_serializes_with_stable_keys():
    config = RunConfig(L=2.0, n=64, xi_count=4)
    report = check(constant_samples(0.0, a=50.0, nz=256), 2.0, 64, config=config)
    data = json.loads(report.to_json())
    for name in CLAUSES:
        assert "pass" in data[name]
    assert data["verdict"] == "accept"
    assert len(data["positivity"]["xi"]) == 4


def test_aliased_samples_are_rejected_not_raised():
    # δζ = 400/15，远大于 π/(2L)
    report = check(constant_samples(0.0, a=200.0, nz=16), 2.0, 64)
    assert report.contractivity["pass"]
    assert report.failing_clause == "origin"
    for name in ("origin", "square_integrability", "positivity"):
        assert not getattr(report, name)["pass"]
        assert "AliasingError" in getattr(report, name)["error"]
    data = json.loads(report.to_json())
    assert data["verdict"] == "reject"
    assert data["positivity"]["xi"] == []
