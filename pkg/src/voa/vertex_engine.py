"""Vertex operators, modes, and the Virasoro structure of V_{L_{2N}}.

Fields are expanded in the a_(n) convention: Y(a, z) = sum a_(n) z^{-n-1},
so the grading contract is wt(a_(n) b) = wt(a) + wt(b) - n - 1 and the
Virasoro modes are L_n = nu_(n+1) for the conformal vector nu.

The generating field of a monomial J_{n_1}...J_{n_s} Omega (x) e^{c alpha}
is the normally ordered product of the divided-power derivative fields
d^{(k_j)} J(z), k_j = -n_j - 1, with the exponential vertex operator

    Y(Omega (x) e^{c alpha}, z) = e_{c alpha} z^{c alpha_0} E_+(c alpha, z) E_-(c alpha, z),

where E_+ collects the creation half of the exponential and E_- the
annihilation half.  Normal ordering is taken in grouped form, every
creation factor to the left of every annihilation factor; for these free
fields all nestings of the ordering agree, and J_0 factors act on the
charge of the right input (before the e_alpha shift).

Everything is computed exactly; mode products of basis monomial pairs
are cached per requested weight window.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb

from .scalars import Context, ContextMismatchError, Scalar
from .state_space import (
    BasisMonomial,
    Vector,
    partitions_of,
    vector_from_json,
    vector_to_json,
)

_RAT_ONE = (Fraction(1),)
_F0 = Fraction(0)
_F1 = Fraction(1)


def _mk_mono(partition: tuple, charge: int) -> BasisMonomial:
    # trusted fast path: partition already ascending and negative
    m = object.__new__(BasisMonomial)
    object.__setattr__(m, "partition", partition)
    object.__setattr__(m, "charge", charge)
    object.__setattr__(m, "_hash", hash((partition, charge)))
    return m


def _raw(ctx: Context, terms: dict) -> Vector:
    out = Vector.__new__(Vector)
    out.ctx = ctx
    out.terms = terms
    return out


def _clean(ctx: Context, terms: dict) -> Vector:
    return _raw(ctx, {m: c for m, c in terms.items() if not c.is_zero()})


def heis_apply(m: int, v: Vector) -> Vector:
    """Heisenberg mode J_m; [J_m, J_n] = m delta_{m,-n} and J_0 = charge * sqrt(2N)."""
    ctx = v.ctx
    if m == 0:
        root = ctx.sqrt_2n()
        out = {}
        for mono, c in v.terms.items():
            if mono.charge:
                out[mono] = c * (root * mono.charge)
        return _clean(ctx, out)
    out: dict = {}
    if m < 0:
        for mono, c in v.terms.items():
            new = BasisMonomial(tuple(sorted(mono.partition + (m,))), mono.charge)
            prev = out.get(new)
            out[new] = c if prev is None else prev + c
    else:
        for mono, c in v.terms.items():
            cnt = mono.partition.count(-m)
            if not cnt:
                continue
            parts = list(mono.partition)
            parts.remove(-m)
            new = BasisMonomial(tuple(parts), mono.charge)
            add = c * (cnt * m)
            prev = out.get(new)
            out[new] = add if prev is None else prev + add
    return _clean(ctx, out)


@lru_cache(maxsize=None)
def _virasoro_mono(ctx: Context, m: int, mono: BasisMonomial) -> Vector:
    one = _raw(ctx, {mono: ctx.one()})
    if m == 0:
        return one.scale(mono.weight(ctx.N))
    fock = -sum(mono.partition)
    acc = Vector.zero(ctx)
    # L_m = (1/2) sum_j :J_j J_{m-j}:, and for m != 0 the two factors always
    # commute, so each term is applied annihilator first; the sum is finite
    # because J_j needs a part of size at most the Fock weight on each side.
    for j in range(m - fock, fock + 1):
        p, q = sorted((j, m - j))
        w = heis_apply(q, one)
        if w.is_zero():
            continue
        w = heis_apply(p, w)
        if not w.is_zero():
            acc = acc + w
    return acc.scale(Fraction(1, 2))


def virasoro_apply(m: int, v: Vector) -> Vector:
    """Virasoro mode L_m of the free boson conformal vector, central charge 1."""
    acc = Vector.zero(v.ctx)
    for mono, c in v.terms.items():
        img = _virasoro_mono(v.ctx, m, mono)
        if not img.is_zero():
            acc = acc + img.scale(c)
    return acc


def _zsym(parts) -> int:
    out = 1
    mult: dict = {}
    for p in parts:
        mult[p] = mult.get(p, 0) + 1
    for p, a in mult.items():
        fact = 1
        for t in range(2, a + 1):
            fact *= t
        out *= p**a * fact
    return out


@lru_cache(maxsize=None)
def _eplus_pairs(n_lat: int, k: int, m: int) -> tuple:
    """z^m coefficient of E_+(k alpha, z) as (creation partition, f, odd) triples.

    The scalar weight of a partition lambda is g^{len(lambda)}/z_lambda
    with g = k sqrt(2N); it is carried as the rational f = k^len *
    (2N)^(len//2) / z_lambda together with the parity bit of the
    leftover sqrt(2N) factor.
    """
    if m < 0:
        return ()
    if m == 0:
        return (((), _F1, False),)
    if k == 0:
        return ()
    two_n = 2 * n_lat
    out = []
    for parts in partitions_of(m):
        ln = len(parts)
        f = Fraction(k**ln * two_n ** (ln // 2), _zsym(parts))
        out.append((tuple(-p for p in parts), f, bool(ln & 1)))
    return tuple(out)


@lru_cache(maxsize=None)
def _eminus_pairs(n_lat: int, k: int, q: int) -> tuple:
    """z^{-q} coefficient of E_-(k alpha, z) as (annihilator modes, f, odd) triples."""
    if q < 0:
        return ()
    if q == 0:
        return (((), _F1, False),)
    if k == 0:
        return ()
    two_n = 2 * n_lat
    out = []
    for parts in partitions_of(q):
        ln = len(parts)
        sign = -1 if ln % 2 else 1
        f = Fraction(sign * k**ln * two_n ** (ln // 2), _zsym(parts))
        out.append((parts, f, bool(ln & 1)))
    return tuple(out)


def _pair_scalar(ctx: Context, f: Fraction, odd: bool) -> Scalar:
    return ctx.scalar(0, f) if odd else ctx.from_fraction(f)


def eplus_coefficient(ctx: Context, k: int, m: int) -> tuple:
    """z^m coefficient of E_+(k alpha, z) as (creation partition, Scalar) pairs.

    E_+ = exp(sum_{j>0} g J_{-j} z^j / j) with g = k sqrt(2N), so the z^m
    coefficient is sum over partitions lambda of m of g^{len(lambda)}/z_lambda
    times the corresponding creation monomial.
    """
    return tuple(
        (parts, _pair_scalar(ctx, f, odd)) for parts, f, odd in _eplus_pairs(ctx.N, k, m)
    )


def _eminus_poly(ctx: Context, k: int, q: int) -> tuple:
    """z^{-q} coefficient of E_-(k alpha, z) as (annihilator mode tuple, Scalar) pairs."""
    return tuple(
        (parts, _pair_scalar(ctx, f, odd)) for parts, f, odd in _eminus_pairs(ctx.N, k, q)
    )


def _apply_annihilators(modes, vec: dict, ctx: Context) -> dict:
    """Apply a product of positive-mode factors to a monomial dict."""
    cur = vec
    for m in modes:
        nxt: dict = {}
        for mono, c in cur.items():
            cnt = mono.partition.count(-m)
            if not cnt:
                continue
            parts = list(mono.partition)
            parts.remove(-m)
            new = _mk_mono(tuple(parts), mono.charge)
            add = c * (cnt * m)
            prev = nxt.get(new)
            nxt[new] = add if prev is None else prev + add
        if not nxt:
            return {}
        cur = nxt
    return cur


def _pair_int(c, t: int):
    c0, c1 = c
    return (c0 * t if c0 else _F0, c1 * t if c1 else _F0)


def _pair_coeff(c, f: Fraction, odd: bool, two_n: int):
    # multiply the pair c0 + c1 sqrt(2N) by f or by f sqrt(2N)
    c0, c1 = c
    if odd:
        return (c1 * f * two_n if c1 else _F0, c0 * f if c0 else _F0)
    return (c0 * f if c0 else _F0, c1 * f if c1 else _F0)


def _pair_add(a, b):
    a0, a1 = a
    b0, b1 = b
    return (a0 + b0 if a0 and b0 else (a0 or b0), a1 + b1 if a1 and b1 else (a1 or b1))


def _annihilate_pairs(modes, vec: dict) -> dict:
    cur = vec
    for m in modes:
        nxt: dict = {}
        for mono, c in cur.items():
            cnt = mono.partition.count(-m)
            if not cnt:
                continue
            parts = list(mono.partition)
            parts.remove(-m)
            new = _mk_mono(tuple(parts), mono.charge)
            add = _pair_int(c, cnt * m)
            prev = nxt.get(new)
            nxt[new] = add if prev is None else _pair_add(prev, add)
        if not nxt:
            return {}
        cur = nxt
    return cur


def eminus_apply(ctx: Context, k: int, v: Vector, z_window) -> list:
    """Nonzero terms of E_-(k alpha, z) v with z-exponents in the window.

    Returns (z_exponent, Vector) pairs, exponents descending from 0.
    """
    if v.ctx != ctx:
        raise ContextMismatchError("vector context does not match")
    wanted = set(z_window)
    fmax = max((-sum(m.partition) for m in v.terms), default=0)
    out = []
    for q in range(0, fmax + 1):
        if -q not in wanted:
            continue
        acc: dict = {}
        for modes, coeff in _eminus_poly(ctx, k, q):
            piece = _apply_annihilators(modes, v.terms, ctx)
            for mono, c in piece.items():
                add = coeff * c
                prev = acc.get(mono)
                acc[mono] = add if prev is None else prev + add
        vec = _clean(ctx, acc)
        if not vec.is_zero():
            out.append((-q, vec))
    return out


def _field_coeff(k: int, m: int) -> int:
    """Coefficient of J_m z^{-m-k-1} in the k-th divided-power derivative of J(z)."""
    if m >= 0:
        c = comb(m + k, k)
        return -c if k % 2 else c
    if m <= -k - 1:
        return comb(-m - 1, k)
    return 0


@lru_cache(maxsize=200_000)
def _mono_products(ctx: Context, amono: BasisMonomial, bmono: BasisMonomial, wmax: int) -> dict:
    """All modes a_(n) b for two basis monomials, output weight <= wmax.

    Returns {n: {monomial: Scalar}}.  Enumerates, per J-factor of a, the
    annihilation-mode and creation-mode choices (merged on equal
    z-exponent and pending-creation multiset), then applies E_-, the
    z^{(a|b)} shift from z^{alpha_0} at b's original charge, the charge
    shift, and the E_+ and pending creation halves.
    """
    n_lat = ctx.N
    two_n = 2 * n_lat
    ca, cb = amono.charge, bmono.charge
    ctot = ca + cb
    base = n_lat * ctot * ctot
    fmax = wmax - base
    if fmax < 0:
        return {}
    wa, wb = amono.weight(n_lat), bmono.weight(n_lat)
    fcb = Fraction(cb)

    # coefficients are (q0, q1) pairs meaning q0 + q1 sqrt(2N); canonical
    # Scalars are only built once per final block entry
    # stage 1: one mode choice per J-factor of a
    entries: dict = {(0, ()): {bmono: (_F1, _F0)}}
    for part in amono.partition:
        k = -part - 1
        new: dict = {}

        def put(key, vec_terms, factor):
            if not vec_terms:
                return
            cur = new.get(key)
            if cur is None:
                new[key] = (
                    dict(vec_terms)
                    if factor == 1
                    else {m: _pair_int(c, factor) for m, c in vec_terms.items()}
                )
                return
            for m, c in vec_terms.items():
                add = _pair_int(c, factor) if factor != 1 else c
                prev = cur.get(m)
                cur[m] = add if prev is None else _pair_add(prev, add)

        for (zexp, pend), vec in entries.items():
            pend_sum = -sum(pend)
            # annihilation choices: J_0 (nonzero charge) and every part size
            if cb:
                scaled = {m: _pair_coeff(c, fcb, True, two_n) for m, c in vec.items()}
                put((zexp - k - 1, pend), scaled, _field_coeff(k, 0))
            sizes = sorted({-p for m in vec for p in m.partition})
            for s in sizes:
                img = _annihilate_pairs((s,), vec)
                put((zexp - s - k - 1, pend), img, _field_coeff(k, s))
            # creation choices: modes -k-1, -k-2, ... within the Fock budget
            for s in range(k + 1, fmax - pend_sum + 1):
                put(
                    (zexp + s - k - 1, tuple(sorted(pend + (-s,)))),
                    vec,
                    _field_coeff(k, -s),
                )
        entries = {
            key: {m: c for m, c in vec.items() if c[0] or c[1]}
            for key, vec in new.items()
        }
        entries = {key: vec for key, vec in entries.items() if vec}
        if not entries:
            return {}

    # stage 2: E_-, charge shift, E_+, pending creations
    zshift = 2 * n_lat * ca * cb
    result: dict = {}
    for (zexp, pend), vec in entries.items():
        vfock = max((-sum(m.partition) for m in vec), default=0)
        for q in range(0, vfock + 1):
            acc: dict = {}
            for modes, f, odd in _eminus_pairs(n_lat, ca, q):
                piece = _annihilate_pairs(modes, vec)
                for mono, c in piece.items():
                    add = _pair_coeff(c, f, odd, two_n)
                    prev = acc.get(mono)
                    acc[mono] = add if prev is None else _pair_add(prev, add)
            acc = {m: c for m, c in acc.items() if c[0] or c[1]}
            if not acc:
                continue
            e1 = zexp - q + zshift
            # output weight wa + wb - n - 1 = wa + wb + e1 + p must lie in [base, wmax]
            p_lo = max(0, base - wa - wb - e1)
            p_hi = wmax - wa - wb - e1
            for p in range(p_lo, p_hi + 1):
                for cparts, f, odd in _eplus_pairs(n_lat, ca, p):
                    ext = cparts + pend
                    n = -(e1 + p) - 1
                    block = result.setdefault(n, {})
                    for mono, c in acc.items():
                        new_mono = _mk_mono(tuple(sorted(mono.partition + ext)), ctot)
                        add = _pair_coeff(c, f, odd, two_n)
                        prev = block.get(new_mono)
                        block[new_mono] = add if prev is None else _pair_add(prev, add)

    out: dict = {}
    for n, block in result.items():
        clean = {}
        for m, (q0, q1) in block.items():
            s = ctx.scalar(q0, q1)
            if not s.is_zero():
                clean[m] = s
        if clean:
            out[n] = clean
    return out


def vertex_mode(a: Vector, n: int, b: Vector) -> Vector:
    """The mode a_(n) b; bilinear in both slots, exact grading."""
    if a.ctx != b.ctx:
        raise ContextMismatchError("vertex mode needs a common context")
    ctx = a.ctx
    n_lat = ctx.N
    acc: dict = {}
    for am, cav in a.terms.items():
        wa = am.weight(n_lat)
        for bm, cbv in b.terms.items():
            need = wa + bm.weight(n_lat) - n - 1
            if need < 0:
                continue
            block = _mono_products(ctx, am, bm, need).get(n)
            if not block:
                continue
            f = cav * cbv
            unit = not f.rad and f.rat == _RAT_ONE
            for mono, c in block.items():
                add = c if unit else f * c
                prev = acc.get(mono)
                acc[mono] = add if prev is None else prev + add
    return _clean(ctx, acc)


def vertex_window(a: Vector, b: Vector, wmax: int) -> dict:
    """All modes a_(n) b with output weight <= wmax, as {n: Vector}.

    Shares one cache entry per monomial pair, so it is the right call in
    loops that sweep many modes of the same vectors.
    """
    if a.ctx != b.ctx:
        raise ContextMismatchError("vertex mode needs a common context")
    ctx = a.ctx
    acc: dict = {}
    for am, cav in a.terms.items():
        for bm, cbv in b.terms.items():
            f = cav * cbv
            unit = not f.rad and f.rat == _RAT_ONE
            for n, block in _mono_products(ctx, am, bm, wmax).items():
                dst = acc.setdefault(n, {})
                for mono, c in block.items():
                    add = c if unit else f * c
                    prev = dst.get(mono)
                    dst[mono] = add if prev is None else prev + add
    out = {}
    for n, terms in acc.items():
        vec = _clean(ctx, terms)
        if not vec.is_zero():
            out[n] = vec
    return out


def vertex_mode_physics(a: Vector, n: int, b: Vector) -> Vector:
    """Physics-convention mode a_n = a_(n + wt a - 1) for homogeneous a.

    Documented convenience only; the whole engine speaks a_(n).
    """
    return vertex_mode(a, n + a.weight() - 1, b)


def virasoro_field_of(omega: Vector, m: int, v: Vector) -> Vector:
    """Mode L^omega_m = omega_(m+1) v of a weight-2 conformal candidate."""
    if omega.is_zero() or omega.weight() != 2:
        raise ValueError("conformal candidates must be homogeneous of weight 2")
    return vertex_mode(omega, m + 1, v)


def translation_covariance_defect(a: Vector, n: int, b: Vector) -> Vector:
    """(L_{-1} a)_(n) b + n a_(n-1) b; zero exactly when translation covariance holds."""
    return vertex_mode(virasoro_apply(-1, a), n, b) + vertex_mode(a, n - 1, b).scale(n)


def _commutator_coefficient_kills(a: Vector, b: Vector, order: int, c: Vector, wf_max: int) -> bool:
    """Check (z-w)^order [Y(a,z), Y(b,w)] c = 0 on a finite exponent window."""
    wa, wb = a.weight(), b.weight()
    wc = c.weight()
    for wf in range(0, wf_max + 1):
        rs = wa + wb + wc - order - 2 - wf
        r_lo = rs - wb - wc + 1 - order
        r_hi = wa + wc - 1 + order
        for r in range(r_lo, r_hi + 1):
            s = rs - r
            acc = Vector.zero(a.ctx)
            for i in range(order + 1):
                sign = -1 if i % 2 else 1
                f = sign * comb(order, i)
                t1 = vertex_mode(a, r + order - i, vertex_mode(b, s + i, c))
                t2 = vertex_mode(b, s + i, vertex_mode(a, r + order - i, c))
                acc = acc + (t1 - t2).scale(f)
            if not acc.is_zero():
                return False
    return True


def find_locality_order(a: Vector, b: Vector, test_weight: int = 4, max_order: int = 12):
    """Smallest order with (z-w)^order [Y(a,z), Y(b,w)] = 0 on low-weight states.

    The commutator is tested against every basis vector of weight at most
    test_weight over a finite exponent window wide enough to cover all
    potentially nonzero coefficients at those weights.  Returns None when
    no order up to max_order works.
    """
    from .state_space import enumerate_basis

    ctx = a.ctx
    tests = [
        Vector.monomial(ctx, m.partition, m.charge)
        for w in range(test_weight + 1)
        for m in enumerate_basis(ctx, w)
    ]
    for order in range(max_order + 1):
        if all(
            _commutator_coefficient_kills(a, b, order, c, test_weight + 2)
            for c in tests
        ):
            return order
    return None


def mode_request(data: dict, ctx: Context | None = None) -> dict:
    """Serve a serialized mode computation {"N", "n", "a", "b"}.

    Returns {"result": vector JSON, "weight_check": bool}; the weight
    check confirms wt(a_(n) b) = wt(a) + wt(b) - n - 1 on every pair of
    homogeneous components.
    """
    n = data["n"]
    a = vector_from_json(data["a"], ctx)
    b = vector_from_json(data["b"], a.ctx if a.terms else ctx)
    if a.ctx != b.ctx:
        if not a.terms:
            a = Vector.zero(b.ctx)
        elif not b.terms:
            b = Vector.zero(a.ctx)
        else:
            raise ContextMismatchError("operands live in different scalar contexts")
    if data.get("N") != a.ctx.N:
        raise ContextMismatchError("request N does not match operand contexts")
    ok = True
    for wa, acomp in a.weight_components().items():
        for wb, bcomp in b.weight_components().items():
            part = vertex_mode(acomp, n, bcomp)
            if not part.is_zero() and part.weights() != {wa + wb - n - 1}:
                ok = False
    return {"result": vector_to_json(vertex_mode(a, n, b)), "weight_check": ok}
