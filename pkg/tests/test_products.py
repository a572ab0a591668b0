"""Canonical products: primary factors, derivatives at zeros, balance."""

import math

import numpy as np
import pytest

from discosc import (CanonicalProduct, ZeroSequence, blaschke_sum,
                     generate_radial_geometric, log_derivative_envelope,
                     log_primary_factor, node_targets, primary_factor)

ONE = ZeroSequence(np.array([0.5], dtype=complex), label="one")
PAIR = ZeroSequence(np.array([0.5, -0.5], dtype=complex), label="pair")


def test_primary_factor_values():
    assert primary_factor(0.5, 0) == pytest.approx(0.5, rel=1e-14)
    assert primary_factor(0.5, 1) == pytest.approx(0.5 * math.exp(0.5),
                                                   rel=1e-14)
    assert primary_factor(0.5, 2) == pytest.approx(
        0.5 * math.exp(0.5 + 0.125), rel=1e-14)
    w = 0.3 + 0.2j
    assert np.exp(log_primary_factor(w, 3)) == pytest.approx(
        primary_factor(w, 3), rel=1e-13)


def test_one_point_values_genus0():
    # P(z) = 1 - w(z) with w(z) = (1 - 0.25)/(1 - 0.5 z)
    prod = CanonicalProduct(ONE, 0)
    assert prod.eval(0.0) == pytest.approx(0.25, rel=1e-13)
    assert abs(prod.eval(0.5)) < 1e-15
    assert prod.derivative_at_zero(0) == pytest.approx(-2.0 / 3.0, rel=1e-12)
    assert prod.second_derivative_at_zero(0) == pytest.approx(-8.0 / 9.0,
                                                              rel=1e-12)


def test_one_point_values_genus1():
    prod = CanonicalProduct(ONE, 1)
    assert prod.eval(0.0) == pytest.approx(0.25 * math.exp(0.75), rel=1e-13)
    assert prod.derivative_at_zero(0) == pytest.approx(-2.0 * math.e / 3.0,
                                                       rel=1e-12)


def test_contour_derivative_matches_closed_form():
    prod = CanonicalProduct(ONE, 1)
    assert prod.contour_derivative_at_zero(0) == pytest.approx(
        -2.0 * math.e / 3.0, rel=1e-10)


def test_derivative_routes_agree_on_geometric():
    prod = CanonicalProduct(generate_radial_geometric(0.8, 20), 1)
    for k in (0, 7, 19):
        direct = prod.derivative_at_zero(k)
        contour = prod.contour_derivative_at_zero(k)
        assert contour == pytest.approx(direct, rel=1e-10)


def test_log_derivative_sums_one_point():
    # genus 1: P = (1 - w) e^w gives P'/P(0) = -1.125 and P''/P(0) = -2.109375
    prod = CanonicalProduct(ONE, 1)
    lam, lam2 = prod.log_derivative_sums(np.array([0.0 + 0.0j]))
    assert lam[0] == pytest.approx(-1.125, rel=1e-12)
    assert lam2[0] == pytest.approx(-2.109375, rel=1e-12)


def test_node_targets_one_point():
    assert node_targets(CanonicalProduct(ONE, 0))[0] == pytest.approx(
        -2.0 / 3.0, rel=1e-12)
    assert node_targets(CanonicalProduct(ONE, 1))[0] == pytest.approx(
        -4.0 / 3.0, rel=1e-12)


def test_origin_node_factor_is_z():
    seq = ZeroSequence(np.array([0.0, 0.5], dtype=complex), label="origin")
    prod = CanonicalProduct(seq, 0)
    z = 0.2
    w = 0.75 / (1.0 - 0.5 * z)
    assert prod.eval(z) == pytest.approx(z * (1.0 - w), rel=1e-13)
    assert abs(prod.eval(0.0)) < 1e-15


def test_deleted_product_identity():
    prod = CanonicalProduct(PAIR, 1)
    z = np.array([0.2 + 0.1j])
    w0 = (1.0 - 0.25) / (1.0 - 0.5 * z[0])
    factor = primary_factor(w0, 1)
    assert prod.deleted_eval(0, z)[0] * factor == pytest.approx(
        prod.eval(z)[0], rel=1e-12)


def test_deleted_log_at_single_node_is_zero():
    prod = CanonicalProduct(ONE, 1)
    assert np.exp(prod.node_deleted_log(0)) == pytest.approx(1.0, rel=1e-13)


def test_blaschke_sum_geometric_closed_forms():
    seq = generate_radial_geometric(0.5, 4)
    s0 = blaschke_sum(seq, 0)
    assert s0.value == pytest.approx(1.0 - 0.5 ** 4, rel=1e-14)
    assert s0.tail == pytest.approx(0.5 ** 5 / 0.5, rel=1e-12)
    s1 = blaschke_sum(seq, 1)
    assert s1.value == pytest.approx(0.25 * (1.0 - 0.5 ** 8) / 0.75,
                                     rel=1e-14)


def test_exclusion_rule_quarter_neighbour_eighth_gap():
    prod = CanonicalProduct(PAIR, 0)
    # neighbour distance 1.0 gives 0.25; gap 0.5 gives 0.0625; min wins
    np.testing.assert_allclose(prod.exclusion_radii, [0.0625, 0.0625],
                               rtol=1e-13)
    bad, idx = prod.in_exclusion(np.array([0.5 + 0.05j, 0.5 + 0.1j]))
    assert bad.tolist() == [True, False]
    assert idx[0] == 0


def test_exclusion_override():
    prod = CanonicalProduct(PAIR, 0, exclusion_radii=[0.01, 0.01])
    bad, _ = prod.in_exclusion(np.array([0.5 + 0.05j]))
    assert not bad[0]


def test_circle_log_max_one_point():
    # |1 - 0.75/(1 - 0.5 z)| on |z| = 0.8 peaks at z = -0.8
    prod = CanonicalProduct(ONE, 0)
    assert prod.circle_log_max(0.8) == pytest.approx(
        math.log(1.0 - 0.75 / 1.4), rel=1e-9)


def test_balance_constant_consistency():
    prod = CanonicalProduct(generate_radial_geometric(0.8, 20), 1)
    c = prod.balance_constant(0.5)
    assert 0.0 < c < 50.0
    for k in (0, 5, 19):
        lhs, rhs = prod.balance_check(k, 0.5)
        assert lhs <= c * rhs + 1e-12


def test_log_derivative_envelope_shape():
    prod = CanonicalProduct(generate_radial_geometric(0.5, 6), 1)
    q1, q2, rows = log_derivative_envelope(prod, [0.3, 0.6], samples=128)
    assert np.isfinite(q1) and np.isfinite(q2)
    assert [r for r, _, _ in rows] == [0.3, 0.6]
    # the log-derivative singularity strengthens toward the boundary
    assert rows[1][1] > rows[0][1]
    assert all(m1 > 0.0 and m2 > 0.0 for _, m1, m2 in rows)


def test_genus_validation():
    with pytest.raises(ValueError):
        CanonicalProduct(ONE, -1)
