"""Tests for fields, modes, normal ordering, and the Virasoro action."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from voa.scalars import Context, ContextMismatchError
from voa.state_space import (
    BasisMonomial,
    Vector,
    charge_pair_vector,
    charged_vacuum,
    conformal_vector,
    enumerate_basis,
    vacuum,
    vector_to_json,
    weight4_primary,
)
from voa.vertex_engine import (
    eminus_apply,
    eplus_coefficient,
    find_locality_order,
    heis_apply,
    mode_request,
    translation_covariance_defect,
    vertex_mode,
    vertex_mode_physics,
    vertex_window,
    virasoro_apply,
    virasoro_field_of,
)


def mono(ctx, parts, charge, coeff=1):
    return Vector.monomial(ctx, parts, charge, coeff)


def basis_vectors(ctx, max_weight):
    return [
        mono(ctx, m.partition, m.charge)
        for w in range(max_weight + 1)
        for m in enumerate_basis(ctx, w)
    ]


# ---------------------------------------------------------------- Heisenberg


def test_heis_apply_basics():
    ctx = Context(N=2)
    assert heis_apply(-2, vacuum(ctx)) == mono(ctx, (-2,), 0)
    assert heis_apply(1, mono(ctx, (-1, -1), 0)) == mono(ctx, (-1,), 0, 2)
    assert heis_apply(3, mono(ctx, (-3, -1), 0)) == mono(ctx, (-1,), 0, 3)
    assert heis_apply(2, mono(ctx, (-3, -1), 0)).is_zero()
    assert heis_apply(1, vacuum(ctx)).is_zero()
    # J_0 is charge * sqrt(2N)
    assert heis_apply(0, charged_vacuum(ctx, 3)) == charged_vacuum(ctx, 3).scale(
        ctx.sqrt_2n() * 3
    )
    assert heis_apply(0, vacuum(ctx)).is_zero()
    ctx3 = Context(N=3)
    v = heis_apply(0, charged_vacuum(ctx3, -1))
    assert v == charged_vacuum(ctx3, -1).scale(-ctx3.sqrt_2n())


@pytest.mark.parametrize("n_lat", [1, 3])
def test_heisenberg_commutation_on_low_weights(n_lat):
    ctx = Context(N=n_lat)
    for v in basis_vectors(ctx, 4):
        for m in range(-3, 4):
            for n in range(-3, 4):
                lhs = heis_apply(m, heis_apply(n, v)) - heis_apply(n, heis_apply(m, v))
                rhs = v.scale(m) if m == -n else Vector.zero(ctx)
                assert lhs == rhs, (m, n, v)


# ------------------------------------------------------------------ Virasoro


def test_virasoro_low_mode_values():
    ctx = Context(N=1)
    nu = conformal_vector(ctx)
    # L_{-2} vacuum recreates the conformal vector; L_2 nu reads off c/2
    assert virasoro_apply(-2, vacuum(ctx)) == nu
    assert virasoro_apply(2, nu) == vacuum(ctx).scale(Fraction(1, 2))
    assert virasoro_apply(1, mono(ctx, (-2,), 0)) == mono(ctx, (-1,), 0, 2)
    assert virasoro_apply(4, mono(ctx, (-3, -1), 0)) == vacuum(ctx).scale(3)
    assert virasoro_apply(1, nu).is_zero()
    assert virasoro_apply(3, nu).is_zero()
    # L_0 is the weight
    for v in basis_vectors(ctx, 5):
        assert virasoro_apply(0, v) == v.scale(v.weight())


def test_virasoro_on_charged_vacua():
    ctx = Context(N=3)
    e = charged_vacuum(ctx, 1)
    root = ctx.sqrt_2n()
    assert virasoro_apply(-1, e) == mono(ctx, (-1,), 1).scale(root)
    assert virasoro_apply(1, e).is_zero()
    assert virasoro_apply(0, e) == e.scale(3)
    # L_1 J_{-1} e^{alpha} = sqrt(2N) e^{alpha}
    assert virasoro_apply(1, mono(ctx, (-1,), 1)) == e.scale(root)


def test_weight4_vector_is_killed_by_positive_virasoro():
    for n_lat in (1, 2, 5):
        ctx = Context(N=n_lat)
        u = weight4_primary(ctx)
        for m in (1, 2, 3, 4):
            assert virasoro_apply(m, u).is_zero(), (n_lat, m)


def test_weight4_related_descendants():
    ctx = Context(N=1)
    nu = conformal_vector(ctx)
    assert virasoro_apply(-2, nu) == Vector(
        ctx,
        {
            BasisMonomial((-1, -1, -1, -1), 0): Fraction(1, 4),
            BasisMonomial((-3, -1), 0): 1,
        },
    )
    assert virasoro_apply(-4, vacuum(ctx)) == Vector(
        ctx,
        {
            BasisMonomial((-2, -2), 0): Fraction(1, 2),
            BasisMonomial((-3, -1), 0): 1,
        },
    )


@pytest.mark.parametrize("n_lat", [1, 2])
def test_virasoro_commutation_with_central_term(n_lat):
    ctx = Context(N=n_lat)
    vecs = basis_vectors(ctx, 4)
    for m in range(-2, 3):
        for n in range(m, 3):
            for v in vecs:
                lhs = virasoro_apply(m, virasoro_apply(n, v)) - virasoro_apply(
                    n, virasoro_apply(m, v)
                )
                rhs = virasoro_apply(m + n, v).scale(m - n)
                if m + n == 0:
                    rhs = rhs + v.scale(Fraction(m**3 - m, 12))
                assert lhs == rhs, (m, n, v)


def test_virasoro_heisenberg_mixed_commutator():
    ctx = Context(N=2)
    vecs = basis_vectors(ctx, 4)
    for m in range(-2, 3):
        for n in range(-2, 3):
            for v in vecs:
                lhs = virasoro_apply(m, heis_apply(n, v)) - heis_apply(
                    n, virasoro_apply(m, v)
                )
                assert lhs == heis_apply(m + n, v).scale(-n), (m, n, v)


# ------------------------------------------------------- exponential factors


def test_eplus_coefficients_low_orders():
    ctx = Context(N=2)
    g = ctx.sqrt_2n()  # folds to 2
    assert eplus_coefficient(ctx, 1, 0) == (((), ctx.one()),)
    assert eplus_coefficient(ctx, 0, 3) == ()
    terms = dict(eplus_coefficient(ctx, 1, 1))
    assert terms == {(-1,): g}

    quartic = dict(eplus_coefficient(ctx, 1, 4))
    assert quartic[(-4,)] == g * Fraction(1, 4)
    assert quartic[(-2, -2)] == g * g * Fraction(1, 8)
    assert quartic[(-3, -1)] == g * g * Fraction(1, 3)
    assert quartic[(-2, -1, -1)] == g**3 * Fraction(1, 4)
    assert quartic[(-1, -1, -1, -1)] == g**4 * Fraction(1, 24)
    # charge -1 flips the sign of odd-length partitions
    neg = dict(eplus_coefficient(ctx, -1, 4))
    assert neg[(-4,)] == -g * Fraction(1, 4)
    assert neg[(-2, -2)] == g * g * Fraction(1, 8)


def test_eminus_action_on_conformal_vector():
    # E_-(2J, z)(nu (x) e^{2J}) = nu e - 2 J_{-1} e z^{-1} + 2 e z^{-2} in V_{L_4}
    ctx = Context(N=2)
    carrier = mono(ctx, (-1, -1), 1, Fraction(1, 2))
    out = eminus_apply(ctx, 1, carrier, range(-4, 1))
    expect = [
        (0, carrier),
        (-1, mono(ctx, (-1,), 1, -2)),
        (-2, mono(ctx, (), 1, 2)),
    ]
    assert out == expect
    # negative charge flips the middle sign
    out = eminus_apply(ctx, -1, carrier, range(-4, 1))
    assert out[1] == (-1, mono(ctx, (-1,), 1, 2))
    # window filtering
    assert eminus_apply(ctx, 1, carrier, range(-1, 1)) == expect[:2]


# ------------------------------------------------------------- vertex modes


def test_vacuum_field_is_identity():
    ctx = Context(N=2)
    targets = [conformal_vector(ctx), charged_vacuum(ctx, -1), mono(ctx, (-2, -1), 1)]
    for b in targets:
        assert vertex_mode(vacuum(ctx), -1, b) == b
        assert vertex_mode(vacuum(ctx), 0, b).is_zero()
        assert vertex_mode(vacuum(ctx), -3, b).is_zero()


def test_creation_axiom():
    ctx = Context(N=2)
    states = [
        mono(ctx, (-1,), 0),
        mono(ctx, (-3, -1), 0),
        conformal_vector(ctx),
        charged_vacuum(ctx, 1),
        mono(ctx, (-2, -1, -1), -1),
        weight4_primary(ctx),
    ]
    for a in states:
        assert vertex_mode(a, -1, vacuum(ctx)) == a, a
        for n in range(0, 4):
            assert vertex_mode(a, n, vacuum(ctx)).is_zero(), (a, n)


def test_heisenberg_field_matches_mode_action():
    ctx = Context(N=3)
    j = mono(ctx, (-1,), 0)
    for b in basis_vectors(ctx, 4):
        for m in range(-3, 4):
            assert vertex_mode(j, m, b) == heis_apply(m, b), (m, b)


def test_conformal_field_matches_virasoro_action():
    for n_lat in (1, 2, 3):
        ctx = Context(N=n_lat)
        nu = conformal_vector(ctx)
        for b in basis_vectors(ctx, 4):
            for m in range(-3, 4):
                assert virasoro_field_of(nu, m, b) == virasoro_apply(m, b), (n_lat, m, b)
                assert vertex_mode_physics(nu, m, b) == virasoro_apply(m, b)


def test_virasoro_field_rejects_wrong_weight():
    ctx = Context(N=1)
    with pytest.raises(ValueError):
        virasoro_field_of(mono(ctx, (-1,), 0), 0, vacuum(ctx))


def test_charged_vacuum_pair_products():
    for n_lat in (2, 3):
        ctx = Context(N=n_lat)
        g = ctx.sqrt_2n()
        ep, em = charged_vacuum(ctx, 1), charged_vacuum(ctx, -1)
        n = 2 * n_lat - 2
        assert vertex_mode(ep, n, em) == mono(ctx, (-1,), 0).scale(g)
        assert vertex_mode(em, n, ep) == mono(ctx, (-1,), 0).scale(-g)
        # one mode deeper picks up the charge-zero vacuum
        assert vertex_mode(ep, n + 1, em) == vacuum(ctx)
        # the first mode below the pole is the full charge-2 vacuum
        assert vertex_mode(ep, -2 * n_lat - 1, ep) == charged_vacuum(ctx, 2)
        assert vertex_mode(ep, -2 * n_lat, ep).is_zero()
        assert vertex_mode(ep, -1, ep).is_zero()


def test_charge_pair_mode_gives_quartic_vector():
    # (e^g_b)_(g^2-5) (e^g_b) = b * v_g with v_g the quartic Heisenberg combination
    for n_lat, b_name in [(2, "one"), (2, "i"), (3, "one"), (3, "i")]:
        ctx = Context(N=n_lat)
        b = ctx.one() if b_name == "one" else ctx.i()
        gsq = 2 * n_lat
        e = charge_pair_vector(ctx, 1, b)
        got = vertex_mode(e, gsq - 5, e)
        vg = Vector(
            ctx,
            {
                BasisMonomial((-1, -1, -1, -1), 0): Fraction(gsq * gsq, 12),
                BasisMonomial((-3, -1), 0): Fraction(2 * gsq, 3),
                BasisMonomial((-2, -2), 0): Fraction(gsq, 4),
            },
        )
        assert got == vg.scale(b), (n_lat, b_name)


def test_opposite_charge_weight2_products():
    # building blocks of the conformal-candidate equation at N = 2
    ctx = Context(N=2)
    ep, em = charged_vacuum(ctx, 1), charged_vacuum(ctx, -1)
    j2 = mono(ctx, (-2,), 0)
    j11 = mono(ctx, (-1, -1), 0)
    assert vertex_mode(ep, 1, em) == j2 + j11.scale(2)
    assert vertex_mode(em, 1, ep) == -j2 + j11.scale(2)
    # their sum is 8 nu: the J_{-2} parts cancel
    total = vertex_mode(ep, 1, em) + vertex_mode(em, 1, ep)
    assert total == conformal_vector(ctx).scale(8)
    # nu_(1) acts as L_0, reading off the weight N = 2
    assert vertex_mode(conformal_vector(ctx), 1, ep + em) == (ep + em).scale(2)
    assert vertex_mode(ep, 3, em) == vacuum(ctx)


def test_mode_grading_contract():
    rng = random.Random(2026)
    for n_lat in (1, 2, 3):
        ctx = Context(N=n_lat)
        pool = basis_vectors(ctx, 5)
        for _ in range(25):
            a = pool[rng.randrange(len(pool))]
            b = pool[rng.randrange(len(pool))]
            wa, wb = a.weight(), b.weight()
            for n in range(-4, wa + wb):
                out = vertex_mode(a, n, b)
                if not out.is_zero():
                    assert out.weight() == wa + wb - n - 1, (a, n, b)


def test_translation_covariance():
    rng = random.Random(31337)
    for n_lat in (1, 2):
        ctx = Context(N=n_lat)
        pool = basis_vectors(ctx, 4)
        for _ in range(15):
            a = pool[rng.randrange(len(pool))]
            b = pool[rng.randrange(len(pool))]
            for n in range(-3, 5):
                assert translation_covariance_defect(a, n, b).is_zero(), (a, n, b)


def test_vertex_window_agrees_with_single_modes():
    ctx = Context(N=2)
    a = conformal_vector(ctx) + charged_vacuum(ctx, 1)
    b = mono(ctx, (-2,), -1) + vacuum(ctx)
    win = vertex_window(a, b, 8)
    lo = min(win)
    for n in range(lo, 8):
        expect = vertex_mode(a, n, b)
        got = win.get(n, Vector.zero(ctx))
        # entries above the weight window are simply absent
        if not expect.is_zero() and max(expect.weights()) <= 8:
            assert got == expect, n
    assert all(max(v.weights()) <= 8 for v in win.values())


def test_locality_orders():
    ctx = Context(N=2)
    j = mono(ctx, (-1,), 0)
    nu = conformal_vector(ctx)
    ep, em = charged_vacuum(ctx, 1), charged_vacuum(ctx, -1)
    assert find_locality_order(j, j, test_weight=2) == 2
    assert find_locality_order(j, ep, test_weight=2) == 1
    assert find_locality_order(nu, ep, test_weight=2) == 2
    assert find_locality_order(ep, ep, test_weight=2) == 0
    assert find_locality_order(ep, em, test_weight=2) == 4
    assert find_locality_order(nu, nu, test_weight=2) == 4


def test_mode_request_round_trip():
    ctx = Context(N=2)
    ep = charged_vacuum(ctx, 1)
    em = charged_vacuum(ctx, -1)
    req = {
        "N": 2,
        "n": 2,
        "a": vector_to_json(ep),
        "b": vector_to_json(em),
    }
    out = mode_request(req)
    assert out["weight_check"] is True
    assert out["result"] == vector_to_json(mono(ctx, (-1,), 0, 2))

    with pytest.raises(ContextMismatchError):
        mode_request({"N": 3, "n": 0, "a": vector_to_json(ep), "b": vector_to_json(em)})
