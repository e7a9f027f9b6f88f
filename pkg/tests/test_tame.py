"""Cancellation defects, envelope metric, covering profiles, equicontinuity."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from semicascade import systems, tame, ulam
from semicascade.errors import InputError, ResourceBudgetError

F = Fraction

COS1 = ulam.trig_bank(2, 1)[1]
GRID = systems.equispaced_points(256, 1)


def test_koopman_value_matrix_rotation_oracle():
    spec = systems.circle_rotation(F(1, 8))
    grid = systems.equispaced_points(16, 1)
    vals = tame.koopman_value_matrix(spec, COS1[1], [1, 2, 3], grid)
    assert vals.shape == (3, 16)
    t = grid[:, 0]
    for row, p in enumerate([1, 2, 3]):
        direct = np.cos(2.0 * math.pi * (t + p / 8.0))
        assert np.allclose(vals[row], direct, atol=1e-12)
    with pytest.raises(InputError):
        tame.koopman_value_matrix(spec, COS1[1], [2, 1], grid)
    with pytest.raises(InputError):
        tame.koopman_value_matrix(spec, COS1[1], [-1, 0], grid)
    with pytest.raises(InputError):
        tame.koopman_value_matrix(spec, COS1[1], [1], np.zeros((4, 2)))


def test_cancellation_defect_single_row():
    defect, coeffs, report = tame.cancellation_defect(np.array([[0.3, -0.7]]))
    assert defect == pytest.approx(0.7)
    assert coeffs == pytest.approx([1.0])
    assert report["sign_patterns"] == 1


def test_cancellation_defect_opposing_rows():
    defect, coeffs, report = tame.cancellation_defect(
        np.array([[1.0, -0.5], [1.0, -0.5]]))
    assert defect <= 1e-12
    ## perfect cancellation needs opposite signs at equal weight
    assert np.sort(coeffs) == pytest.approx([-0.5, 0.5])
    assert report["sign_patterns"] == 2


def test_rotation_three_term_identity():
    ## shifted cosines of a rotation satisfy an exact three-term linear
    ## dependence; the solver must find a combination at least as flat as
    ## the closed-form coefficients (1, -2 cos(2 pi a), 1) / norm
    alpha = systems.GOLDEN
    spec = systems.circle_rotation(alpha)
    vals = tame.koopman_value_matrix(spec, COS1[1], [1, 2, 3], GRID)
    c = np.array([1.0, -2.0 * math.cos(2.0 * math.pi * alpha), 1.0])
    c /= np.abs(c).sum()
    closed_form = float(np.max(np.abs(c.dot(vals))))
    assert closed_form <= 1e-12
    rep = tame.tameness_profile(spec, COS1, 4, GRID)
    assert rep.defect_per_k[3] <= closed_form + 1e-10
    assert rep.defect_per_k[4] <= rep.defect_per_k[3] + 1e-10
    assert rep.defect_per_k[2] == pytest.approx(0.3624, abs=0.02)
    assert np.abs(rep.coefficients).sum() == pytest.approx(1.0)
    js = rep.as_jsonable()
    assert js["strategy"] == "fixed" and set(js["defect_per_k"]) == {"2", "3", "4"}


def test_doubling_defect_against_signed_lattice():
    ## independent route: brute-force all l1-normalized coefficient vectors
    ## on the (1/64)-lattice; the LP may only improve on the lattice, and
    ## the lattice may only exceed the LP by its own resolution
    spec = systems.doubling_map()
    vals = tame.koopman_value_matrix(spec, COS1[1], [1, 2, 3], GRID)
    level = 64
    lattice = []
    for k1, k2 in itertools.product(range(level + 1), range(-level, level + 1)):
        k3_abs = level - k1 - abs(k2)
        if k3_abs < 0:
            continue
        lattice.append((k1, k2, k3_abs))
        if k3_abs > 0:
            lattice.append((k1, k2, -k3_abs))
    coeff = np.asarray(lattice, dtype=np.float64) / level
    lattice_min = float(np.min(np.max(np.abs(coeff.dot(vals)), axis=1)))
    defect, coeffs, _ = tame.cancellation_defect(vals)
    assert -1e-9 <= lattice_min - defect <= 0.05
    assert defect == pytest.approx(0.6366, abs=0.02)
    assert float(np.max(np.abs(coeffs.dot(vals)))) == pytest.approx(defect, abs=1e-9)


def test_fixed_profile_nonincreasing():
    rep = tame.tameness_profile(systems.doubling_map(), COS1, 5, GRID)
    ks = sorted(rep.defect_per_k)
    assert ks == [2, 3, 4, 5]
    for a, b in zip(ks, ks[1:]):
        assert rep.defect_per_k[b] <= rep.defect_per_k[a] + 1e-10
    assert rep.defect_per_k[5] >= 0.3  # expanding maps refuse to cancel


def test_adversarial_at_least_fixed():
    spec = systems.doubling_map()
    fixed = tame.tameness_profile(spec, COS1, 3, GRID)
    adv = tame.tameness_profile(spec, COS1, 3, GRID, strategy="adversarial")
    assert adv.defect_per_k[3] >= fixed.defect_per_k[3] - 1e-12
    assert adv.strategy == "adversarial"
    assert len(adv.subsequence) == 3


def test_tameness_validation_and_budget():
    with pytest.raises(InputError):
        tame.tameness_profile(systems.doubling_map(), COS1, 1, GRID)
    with pytest.raises(InputError):
        tame.tameness_profile(systems.doubling_map(), COS1, 3, GRID, strategy="greedy")
    with pytest.raises(ResourceBudgetError):
        tame.cancellation_defect(np.ones((15, 4)))
    with pytest.raises(InputError):
        tame.cancellation_defect(np.ones(4))


# ---------------------------------------------------------------------------
# envelope metric and covering


def test_envelope_metric_properties():
    spec = systems.doubling_map()
    d01 = tame.envelope_metric(spec, 0, 1)
    d12 = tame.envelope_metric(spec, 1, 2)
    d02 = tame.envelope_metric(spec, 0, 2)
    assert tame.envelope_metric(spec, 3, 3) == 0.0
    assert tame.envelope_metric(spec, 1, 0) == d01
    assert d02 <= d01 + d12 + 1e-12
    assert d01 > 0.01


def test_envelope_metric_periodic_rotation():
    spec = systems.circle_rotation(F(1, 8))
    assert tame.envelope_metric(spec, 0, 8) <= 1e-12
    assert tame.envelope_metric(spec, 3, 11) <= 1e-12
    assert tame.envelope_metric(spec, 0, 4) > 0.05
    with pytest.raises(InputError):
        tame.envelope_metric(spec, -1, 2)
    with pytest.raises(InputError):
        tame.envelope_metric(spec, 0, 2, bank_count=0)


def test_covering_rotation_saturates_at_period():
    spec = systems.circle_rotation(F(1, 8))
    prof = tame.covering_profile(spec, 64, [0.5, 0.1, 0.02])
    assert prof.counts == (3, 8, 8)
    ## finer eps never shrinks the net
    assert all(a <= b for a, b in zip(prof.counts, prof.counts[1:]))
    assert prof.truncation_bound == pytest.approx(2.0 * 2.0 ** -15, rel=1e-12)
    js = prof.as_jsonable()
    assert js["counts"] == [3, 8, 8] and js["horizon"] == 64


def test_covering_monotone_in_horizon():
    spec = systems.doubling_map()
    small = tame.covering_profile(spec, 32, [0.05])
    large = tame.covering_profile(spec, 64, [0.05])
    assert large.counts[0] >= small.counts[0]
    assert large.counts[0] > 8  # keeps opening centers


def test_covering_validation_and_budget():
    spec = systems.circle_rotation(F(1, 8))
    with pytest.raises(InputError):
        tame.covering_profile(spec, 0, [0.1])
    with pytest.raises(InputError):
        tame.covering_profile(spec, 8, [0.0])
    with pytest.raises(ResourceBudgetError):
        tame.covering_profile(spec, 3000, [0.1])


def test_equicontinuity_rigid_vs_expanding():
    delta = 1.0 / 256
    rigid = tame.equicontinuity_probe(systems.circle_rotation(systems.GOLDEN),
                                      [delta], 8)
    assert rigid[delta] <= delta
    assert rigid[delta] >= 0.9 * delta
    wild = tame.equicontinuity_probe(systems.doubling_map(), [delta], 8)
    assert wild[delta] >= 0.49
    cat = tame.equicontinuity_probe(systems.cat_map(), [delta], 8)
    assert cat[delta] > rigid[delta]
    with pytest.raises(InputError):
        tame.equicontinuity_probe(systems.doubling_map(), [0.6], 4)
    with pytest.raises(InputError):
        tame.equicontinuity_probe(systems.doubling_map(), [delta], -1)


def test_csv_exports(tmp_path):
    rep = tame.tameness_profile(systems.circle_rotation(F(1, 8)), COS1, 3, GRID)
    tpath = tmp_path / "tameness.csv"
    tame.tameness_to_csv(rep, str(tpath))
    lines = tpath.read_text().strip().splitlines()
    assert lines[0] == "K,defect"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["2", "3"]
    prof = tame.covering_profile(systems.circle_rotation(F(1, 8)), 16, [0.5, 0.1])
    cpath = tmp_path / "covering.csv"
    tame.covering_to_csv(prof, str(cpath))
    lines = cpath.read_text().strip().splitlines()
    assert lines[0] == "horizon,epsilon,count"
    assert len(lines) == 3 and lines[1].startswith("16,")
