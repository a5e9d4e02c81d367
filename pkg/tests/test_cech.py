"""Nerves, Cech cohomology, twists, the comparison morphism and matrix."""

import random
from fractions import Fraction

import pytest

from hkrlab.coeff import CoeffAlgebra
from hkrlab.extension_dg import build_extension
from hkrlab.chain_core import homology
from hkrlab.modules import LinMap
from hkrlab.cech_twist import (
    Cochain,
    Nerve,
    NerveError,
    TwistFamily,
    UnsupportedTwistError,
    atiyah_twist,
    build_t_last_level,
    canonical_representative,
    cech_cohomology,
    cech_complex,
    cech_delta,
    circle_nerve,
    class_coordinates,
    cochain_wedge,
    codim2_matrix,
    cohomologous,
    conjecture_probe,
    delta_entries_cohomologous,
    delta_matrix,
    delta_product,
    divisor_class,
    eta_recursion,
    hom_lam_module,
    identity_hom_cochain,
    is_cocycle,
    l_operator,
    q_operator_is_chain_map,
    random_hom_twist,
    random_wedge_cochains,
    sphere_nerve,
    t_operator,
    torus_nerve,
    translation_fixes_wedge_classes,
    twisted_resolution_homology_check,
    wedge_family,
    yoneda_compose,
    zeta_recursion,
)
from hkrlab.connections import Connection, DerivationChi, KahlerModule

QQ = CoeffAlgebra.rationals()


def ext_of(r, algebra=QQ):
    return build_extension(algebra, r)


def h1_generator_cochain(ext, nerve):
    C = cech_complex(nerve, ext.lam_i(1))
    H = homology(C, 1)
    rep = H.representatives[0]
    out = Cochain(nerve, 1, ext.lam_i(1))
    for (s, lab), poly in rep.data.items():
        out[s] = out.value(s) + ext.lam_i(1).basis_vec(lab, poly)
    return out


# -- nerves and plain cohomology ----------------------------------------------


def test_nerve_face_closure_and_depth():
    n = Nerve.build([0, 1, 2], [(0, 1, 2)])
    assert n.depth == 2
    assert n.has((0, 1)) and n.has((2,))
    with pytest.raises(NerveError):
        Nerve.build([0, 1], [(0, 2)])


def test_nerve_json_round_trip():
    n = circle_nerve()
    assert Nerve.from_json(n.to_json()) == n


def test_single_vertex():
    n = Nerve.build([0], [])
    assert cech_cohomology(n, ext_of(1).lam_i(0), 0).dim == 1


def test_circle_cohomology():
    n = circle_nerve()
    M = ext_of(1).lam_i(0)
    assert cech_cohomology(n, M, 0).dim == 1
    assert cech_cohomology(n, M, 1).dim == 1
    with pytest.raises(NerveError):
        cech_cohomology(n, M, 2)


def test_sphere_cohomology():
    n = sphere_nerve(2)
    M = ext_of(1).lam_i(0)
    assert [cech_cohomology(n, M, k).dim for k in range(3)] == [1, 0, 1]
    n3 = sphere_nerve(3)
    assert [cech_cohomology(n3, M, k).dim for k in range(4)] == [1, 0, 0, 1]


def test_torus_cohomology_and_cup():
    n = torus_nerve()
    ext = ext_of(2)
    M = ext.lam_i(0)
    assert [cech_cohomology(n, M, k).dim for k in range(3)] == [1, 2, 1]
    # cup of two independent degree-1 scalar classes: nonzero, antisymmetric
    C = cech_complex(n, M)
    H = homology(C, 1)
    assert H.dim == 2

    def from_rep(t):
        c = Cochain(n, 1, M)
        for (s, lab), poly in H.representatives[t].data.items():
            c[s] = c.value(s) + M.basis_vec(lab, poly)
        return c

    u, v = from_rep(0), from_rep(1)
    wf = lambda a, b: a.scale(b.coeff(()))
    uv = cochain_wedge(wf, u, v, M)
    vu = cochain_wedge(wf, v, u, M)
    assert is_cocycle(n, uv)
    assert any(class_coordinates(n, uv))
    assert cohomologous(n, uv, vu.scale(-1))


def test_cochain_wedge_leibniz():
    rng = random.Random(3)
    ext = ext_of(2)
    for nerve in (circle_nerve(), torus_nerve()):
        x = Cochain(nerve, 0, ext.lam_i(1))
        for s in nerve.simplices_of_dim(0):
            x[s] = ext.lam_i(1).basis_vec((0,), rng.randint(-2, 2)) + ext.lam_i(1).basis_vec(
                (1,), rng.randint(-2, 2)
            )
        y = Cochain(nerve, 1, ext.lam_i(1))
        for s in nerve.simplices_of_dim(1):
            y[s] = ext.lam_i(1).basis_vec((0,), rng.randint(-2, 2))
        wf = lambda a, b: ext.wedge_i(a, b)
        lhs = cech_delta(cochain_wedge(wf, x, y, ext.lam_i(2)))
        rhs = cochain_wedge(wf, cech_delta(x), y, ext.lam_i(2)) + cochain_wedge(
            wf, x, cech_delta(y), ext.lam_i(2)
        )  # deg(x) = 0: no sign
        assert (lhs - rhs).is_zero()


# -- operators -------------------------------------------------------------------


def test_l_operator_unit():
    ext = ext_of(2)
    nerve = circle_nerve()
    one = Cochain(nerve, 0, ext.lam_i(0))
    for s in nerve.simplices_of_dim(0):
        one[s] = ext.lam_i(0).basis_vec(())
    got = l_operator(ext, nerve, 1, 1, one)
    assert (got - identity_hom_cochain(ext, nerve, 1)).is_zero()


def test_q_operator_chain_map():
    ext = ext_of(2)
    nerve = circle_nerve()
    v = h1_generator_cochain(ext, nerve)
    assert q_operator_is_chain_map(ext, nerve, 2, 1, v)
    assert q_operator_is_chain_map(ext, nerve, 1, 0, v)


def test_yoneda_rule_against_cup():
    ext = ext_of(2)
    nerve = torus_nerve()
    C = cech_complex(nerve, ext.lam_i(1))
    H = homology(C, 1)

    def from_rep(t):
        c = Cochain(nerve, 1, ext.lam_i(1))
        for (s, lab), poly in H.representatives[t].data.items():
            c[s] = c.value(s) + ext.lam_i(1).basis_vec(lab, poly)
        return c

    v, w = from_rep(0), from_rep(2)
    lv = l_operator(ext, nerve, 2, 1, v)
    lw = l_operator(ext, nerve, 1, 0, w)
    got = yoneda_compose(lv, lw, hom_lam_module(ext, 0, 2))
    cup = cochain_wedge(lambda a, b: ext.wedge_i(a, b), v, w, ext.lam_i(2))
    want = l_operator(ext, nerve, 2, 0, cup).scale((-1) ** (1 * 1))
    assert cohomologous(nerve, got, want)


def test_t_operator_identity_at_m_zero():
    ext = ext_of(3)
    nerve = circle_nerve()
    v = h1_generator_cochain(ext, nerve)
    u = l_operator(ext, nerve, 2, 1, v)
    assert (t_operator(ext, nerve, 2, 1, 0, u) - u).is_zero()


def test_t_operator_translation_identity():
    for r in (2, 3):
        ext = ext_of(r)
        nerve = circle_nerve()
        v = h1_generator_cochain(ext, nerve)
        for p in range(r):
            for m in range(r - p):
                assert translation_fixes_wedge_classes(ext, nerve, p + 1, p, m, v)


def test_t_operator_general_hom_value():
    ext = ext_of(2)
    nerve = circle_nerve()
    rng = random.Random(2)
    tw = random_hom_twist(ext, nerve, 0, rng)
    out = t_operator(ext, nerve, 1, 0, 1, tw.cochain)
    assert out.module == hom_lam_module(ext, 1, 2)
    assert is_cocycle(nerve, out)


# -- recursion spot values ----------------------------------------------------------


def test_eta_recursion_spot_values():
    ext = ext_of(3)
    nerve = circle_nerve()
    rng = random.Random(5)
    cs = random_wedge_cochains(ext, nerve, rng)
    ds = random_wedge_cochains(ext, nerve, rng)
    etas = eta_recursion(ext, nerve, cs, ds)
    assert (etas[(1, 0)] - (cs[0] - ds[0])).is_zero()
    want21 = (cs[0] - ds[0] + cs[1] - ds[1]).scale(Fraction(1, 2))
    assert (etas[(2, 1)] - want21).is_zero()
    wf = lambda a, b: ext.wedge_i(a, b)
    # the degree-2 entry keeps the 1/(i+1) prefactor (on this nerve both
    # sides vanish; the torus test below pins the normalization)
    want20 = cochain_wedge(wf, cs[0] - ds[1], cs[0] - ds[0], ext.lam_i(2)).scale(
        Fraction(-1, 2)
    )
    assert (etas[(2, 0)] - want20).is_zero()


def test_eta_two_zero_normalization_forced_by_chain_equations():
    # on a depth-2 nerve the (2,0) component without the 1/2 prefactor
    # fails the comparison chain equations; with it, they hold
    from hkrlab.cech_twist import TMorphism, build_t_wedge, merge_wedge, t_chain_check
    from hkrlab.modules import LinMap

    ext = ext_of(2)
    nerve = sphere_nerve(2)
    rng = random.Random(13)
    cs = random_wedge_cochains(ext, nerve, rng)
    ds = random_wedge_cochains(ext, nerve, rng)
    lam = wedge_family(ext, nerve, cs)
    mu = wedge_family(ext, nerve, ds)
    T, etas = build_t_wedge(ext, nerve, cs, ds)
    assert t_chain_check(ext, lam, mu, T)
    # rebuild with the doubled (2,0) component: the equations must fail
    bad = dict(T.components)
    for s in nerve.simplices_of_dim(2):
        comp = T.component(0, 2, s)
        bad[(0, 2, s)] = comp.scale(2)
    assert not t_chain_check(ext, lam, mu, TMorphism(ext, nerve, bad))


def test_eta_vanishes_above_diagonal_when_twists_agree():
    ext = ext_of(3)
    nerve = circle_nerve()
    rng = random.Random(9)
    cs = random_wedge_cochains(ext, nerve, rng)
    etas = eta_recursion(ext, nerve, cs, cs)
    for i in range(4):
        for j in range(i):
            assert etas[(i, j)].is_zero()


# -- the comparison morphism and matrix ----------------------------------------------


@pytest.mark.parametrize("r", [2, 3])
def test_wedge_comparison_on_circle(r):
    ext = ext_of(r)
    nerve = circle_nerve()
    rng = random.Random(40 + r)
    for _ in range(3):
        cs = random_wedge_cochains(ext, nerve, rng)
        ds = random_wedge_cochains(ext, nerve, rng)
        lam = wedge_family(ext, nerve, cs)
        mu = wedge_family(ext, nerve, ds)
        assert lam.transition_cocycle_check()
        delta, T = delta_matrix(ext, nerve, lam, mu, "wedge")
        assert delta.diagonal_is_identity()
        cs_canon = [canonical_representative(nerve, c) for c in cs]
        ds_canon = [canonical_representative(nerve, d) for d in ds]
        zetas = zeta_recursion(ext, nerve, cs_canon, ds_canon)
        for i in range(r + 1):
            for j in range(i):
                if i - j > nerve.depth:
                    continue
                want = l_operator(ext, nerve, i, j, zetas[(i, j)])
                assert cohomologous(nerve, delta.entry(i, j), want)


def test_wedge_comparison_equal_twists_identity_matrix():
    ext = ext_of(2)
    nerve = circle_nerve()
    rng = random.Random(7)
    cs = random_wedge_cochains(ext, nerve, rng)
    lam = wedge_family(ext, nerve, cs)
    mu = wedge_family(ext, nerve, cs)
    delta, _ = delta_matrix(ext, nerve, lam, mu, "wedge")
    assert delta.diagonal_is_identity()
    for i in range(3):
        for j in range(i):
            if i - j <= nerve.depth:
                hom = hom_lam_module(ext, j, i)
                assert cohomologous(nerve, delta.entry(i, j), Cochain(nerve, i - j, hom))


def test_wedge_comparison_on_sphere_with_coboundary_twists():
    ext = ext_of(2)
    nerve = sphere_nerve(2)
    rng = random.Random(11)
    cs = random_wedge_cochains(ext, nerve, rng)  # pure coboundaries here
    ds = random_wedge_cochains(ext, nerve, rng)
    lam = wedge_family(ext, nerve, cs)
    mu = wedge_family(ext, nerve, ds)
    delta, _ = delta_matrix(ext, nerve, lam, mu, "wedge")
    assert delta.diagonal_is_identity()
    for i in range(3):
        for j in range(i):
            if i - j <= nerve.depth:
                hom = hom_lam_module(ext, j, i)
                assert cohomologous(nerve, delta.entry(i, j), Cochain(nerve, i - j, hom))


def test_wedge_comparison_on_torus_quadratic_entry():
    ext = ext_of(2)
    nerve = torus_nerve()
    rng = random.Random(23)
    cs = random_wedge_cochains(ext, nerve, rng)
    ds = random_wedge_cochains(ext, nerve, rng)
    lam = wedge_family(ext, nerve, cs)
    mu = wedge_family(ext, nerve, ds)
    delta, _ = delta_matrix(ext, nerve, lam, mu, "wedge")
    zetas = zeta_recursion(ext, nerve, cs, ds)
    for i in range(3):
        for j in range(i):
            want = l_operator(ext, nerve, i, j, zetas[(i, j)])
            assert cohomologous(nerve, delta.entry(i, j), want)


def test_composition_law_at_class_level():
    ext = ext_of(2)
    nerve = circle_nerve()
    rng = random.Random(29)
    cs = random_wedge_cochains(ext, nerve, rng)
    ds = random_wedge_cochains(ext, nerve, rng)
    zeros = [Cochain(nerve, 1, ext.lam_i(1)) for _ in range(2)]
    lam = wedge_family(ext, nerve, cs)
    mu = wedge_family(ext, nerve, ds)
    zero_fam = wedge_family(ext, nerve, zeros)
    d_mu_lam, _ = delta_matrix(ext, nerve, lam, mu, "wedge")
    d_0_lam, _ = delta_matrix(ext, nerve, lam, zero_fam, "wedge")
    d_0_mu, _ = delta_matrix(ext, nerve, mu, zero_fam, "wedge")
    lhs = delta_product(ext, nerve, d_0_mu, d_mu_lam)
    assert delta_entries_cohomologous(nerve, lhs, d_0_lam)


@pytest.mark.parametrize("r", [2, 3])
def test_last_level_comparison(r):
    ext = ext_of(r)
    nerve = circle_nerve()
    rng = random.Random(60 + r)
    shared = [random_hom_twist(ext, nerve, n, rng) for n in range(r - 1)]
    lam = TwistFamily(ext, nerve, shared + [random_hom_twist(ext, nerve, r - 1, rng)])
    mu = TwistFamily(ext, nerve, shared + [random_hom_twist(ext, nerve, r - 1, rng)])
    delta, T = delta_matrix(ext, nerve, lam, mu, "last-level")
    assert delta.diagonal_is_identity()
    want = (lam.cocycles[r - 1].cochain - mu.cocycles[r - 1].cochain).scale(Fraction(1, r))
    assert cohomologous(nerve, delta.entry(r, r - 1), want)
    for i in range(r + 1):
        for j in range(i):
            if (i, j) == (r, r - 1) or i - j > nerve.depth:
                continue
            hom = hom_lam_module(ext, j, i)
            assert cohomologous(nerve, delta.entry(i, j), Cochain(nerve, i - j, hom))


def test_last_level_requires_matching_lower_levels():
    ext = ext_of(2)
    nerve = circle_nerve()
    rng = random.Random(71)
    lam = TwistFamily(ext, nerve, [random_hom_twist(ext, nerve, n, rng) for n in range(2)])
    mu = TwistFamily(ext, nerve, [random_hom_twist(ext, nerve, n, rng) for n in range(2)])
    with pytest.raises(UnsupportedTwistError):
        build_t_last_level(ext, nerve, lam, mu)


def test_delta_matrix_unsupported_shape():
    ext = ext_of(2)
    nerve = circle_nerve()
    lam = TwistFamily.zero(ext, nerve)
    with pytest.raises(UnsupportedTwistError):
        delta_matrix(ext, nerve, lam, lam, "general")


def test_twisted_resolution_homology():
    ext = ext_of(2)
    nerve = circle_nerve()
    rng = random.Random(31)
    lam = wedge_family(ext, nerve, random_wedge_cochains(ext, nerve, rng))
    assert twisted_resolution_homology_check(ext, lam, {0: 1, 1: 1})


# -- curvature twists, the rank-2 matrix, the divisor class ------------------------


def polynomial_setup(r, D=3):
    algebra = CoeffAlgebra.polynomial(1, D)
    ext = build_extension(algebra, r)
    kah = KahlerModule(algebra)
    return algebra, ext, kah


def test_atiyah_difference_flat_is_zero_twist():
    algebra, ext, kah = polynomial_setup(1)
    nerve = circle_nerve()
    nablas = {v: Connection(ext, kah) for v in nerve.vertices}
    chi = DerivationChi(ext, kah, [ext.lam_i(1).basis_vec((0,))])
    res = atiyah_twist(ext, kah, nerve, {}, nablas, chi=chi, level=0)
    assert res["difference_cocycle"]
    assert res["twist"].cochain.is_zero()
    assert res["conjugation"]


def test_atiyah_difference_with_unit_transitions():
    # rank one, unit transitions satisfying the cocycle law on a triangle
    algebra, ext, kah = polynomial_setup(1)
    nerve = Nerve.build([0, 1, 2], [(0, 1, 2)])
    u = algebra.one() + algebra.gen(0)

    def scale_map(p):
        m = LinMap(ext.lam_i(1), ext.lam_i(1))
        m.set_column((0,), ext.lam_i(1).basis_vec((0,), p))
        return m

    transitions = {
        (0, 1): scale_map(u),
        (1, 2): scale_map(u),
        (0, 2): scale_map(u * u),
    }
    gammas = {
        0: None,
        1: Connection(ext, kah).form_module(1).basis_vec(((0,), (0,)), algebra.gen(0)),
        2: Connection(ext, kah).form_module(1).basis_vec(((0,), (0,))),
    }
    nablas = {
        v: Connection(ext, kah, {0: g} if g is not None else None) for v, g in gammas.items()
    }
    res = atiyah_twist(ext, kah, nerve, transitions, nablas, level=1)
    assert res["difference_cocycle"]


def test_atiyah_nonflat_gives_conjugation():
    algebra, ext, kah = polynomial_setup(2)
    nerve = circle_nerve()
    base = Connection(ext, kah)
    forms = base.form_module(1)
    nablas = {
        0: Connection(ext, kah),
        1: Connection(ext, kah, {0: forms.basis_vec(((0,), (1,)), algebra.gen(0)), 1: forms.zero()}),
        2: Connection(ext, kah, {0: forms.zero(), 1: forms.basis_vec(((0,), (0,)))}),
    }
    chi = DerivationChi(ext, kah, [ext.lam_i(1).basis_vec((1,))])
    res = atiyah_twist(ext, kah, nerve, {}, nablas, chi=chi, level=1)
    assert res["difference_cocycle"]
    assert res["conjugation"]


def test_codim2_matrix_flat_is_identity():
    algebra, ext, kah = polynomial_setup(2)
    nerve = circle_nerve()
    nablas = {v: Connection(ext, kah) for v in nerve.vertices}
    chi = DerivationChi(ext, kah, [ext.lam_i(1).basis_vec((0,))])
    delta, theta, checks = codim2_matrix(ext, kah, nerve, nablas, chi)
    assert theta.is_zero()
    assert all(checks.values()), checks


def test_codim2_matrix_nonflat():
    algebra, ext, kah = polynomial_setup(2)
    nerve = circle_nerve()
    base = Connection(ext, kah)
    forms = base.form_module(1)
    nablas = {
        0: Connection(ext, kah),
        1: Connection(ext, kah, {0: forms.basis_vec(((0,), (1,))), 1: forms.zero()}),
        2: Connection(ext, kah),
    }
    chi = DerivationChi(ext, kah, [ext.lam_i(1).basis_vec((0,))])
    delta, theta, checks = codim2_matrix(ext, kah, nerve, nablas, chi)
    assert all(checks.values()), checks


def test_divisor_class_zero():
    nerve = circle_nerve()
    ext = ext_of(1)
    zero = Cochain(nerve, 1, ext.lam_i(1))
    q0, q1 = divisor_class(nerve, zero)
    assert q0 == 1
    assert cohomologous(nerve, q1, zero)


def test_divisor_class_generator():
    nerve = circle_nerve()
    ext = ext_of(1)
    gen = h1_generator_cochain(ext, nerve)
    q0, q1 = divisor_class(nerve, gen)
    assert q0 == 1
    assert cohomologous(nerve, q1, gen)
    assert any(class_coordinates(nerve, q1))


def test_divisor_class_coboundary_input():
    nerve = circle_nerve()
    ext = ext_of(1)
    noise = Cochain(nerve, 0, ext.lam_i(1))
    noise[(1,)] = ext.lam_i(1).basis_vec((0,), 3)
    cob = cech_delta(noise)
    q0, q1 = divisor_class(nerve, cob)
    assert q0 == 1
    assert cohomologous(nerve, q1, Cochain(nerve, 1, ext.lam_i(1)))


# -- the recursion probe ---------------------------------------------------------


def test_probe_agrees_on_wedge_domain():
    ext = ext_of(2)
    nerve = circle_nerve()
    rng = random.Random(97)
    lam = wedge_family(ext, nerve, random_wedge_cochains(ext, nerve, rng))
    mu = wedge_family(ext, nerve, random_wedge_cochains(ext, nerve, rng))
    report = conjecture_probe(ext, nerve, lam, mu, shape="wedge")
    assert report["agrees"] is True


def test_probe_agrees_on_last_level_domain():
    ext = ext_of(2)
    nerve = circle_nerve()
    rng = random.Random(98)
    shared = [random_hom_twist(ext, nerve, 0, rng)]
    lam = TwistFamily(ext, nerve, shared + [random_hom_twist(ext, nerve, 1, rng)])
    mu = TwistFamily(ext, nerve, shared + [random_hom_twist(ext, nerve, 1, rng)])
    report = conjecture_probe(ext, nerve, lam, mu, shape="last-level")
    assert report["agrees"] is True


def test_probe_general_case_reports_untestable():
    ext = ext_of(3)
    nerve = sphere_nerve(2)
    rng = random.Random(99)
    lam = TwistFamily(ext, nerve, [random_hom_twist(ext, nerve, n, rng) for n in range(3)])
    mu = TwistFamily(ext, nerve, [random_hom_twist(ext, nerve, n, rng) for n in range(3)])
    report = conjecture_probe(ext, nerve, lam, mu, shape=None)
    assert report["agrees"] is None
    assert all(v["status"] == "untestable" for v in report["entries"].values())
    assert all(v["cocycle"] for v in report["entries"].values())


def test_divisor_class_depends_only_on_class():
    nerve = circle_nerve()
    ext = ext_of(1)
    gen = h1_generator_cochain(ext, nerve)
    noise = Cochain(nerve, 0, ext.lam_i(1))
    noise[(0,)] = ext.lam_i(1).basis_vec((0,), 7)
    shifted = gen + cech_delta(noise)
    q0a, q1a = divisor_class(nerve, gen)
    q0b, q1b = divisor_class(nerve, shifted)
    assert q0a == q0b == 1
    assert cohomologous(nerve, q1a, q1b)


def test_divisor_on_larger_circle():
    nerve = circle_nerve(5)
    ext = ext_of(1)
    gen = h1_generator_cochain(ext, nerve)
    q0, q1 = divisor_class(nerve, gen.scale(3))
    assert q0 == 1
    assert cohomologous(nerve, q1, gen.scale(3))


def test_codim2_theta_nonflat_cochain():
    # per-vertex connections on a trivialized module always give a
    # coboundary difference cocycle, so the entry class vanishes even when
    # the cochain does not; the cochain-level matrix match is the content
    # (nonzero entry classes are exercised by the last-level suite, whose
    # Hom-valued twists are genuine degree-1 classes)
    algebra, ext, kah = polynomial_setup(2)
    nerve = circle_nerve()
    forms = Connection(ext, kah).form_module(1)
    nablas = {
        0: Connection(ext, kah),
        1: Connection(ext, kah, {0: forms.basis_vec(((0,), (1,))), 1: forms.zero()}),
        2: Connection(ext, kah, {0: forms.basis_vec(((0,), (1,)), algebra.const(2)), 1: forms.zero()}),
    }
    chi = DerivationChi(ext, kah, [ext.lam_i(1).basis_vec((0,))])
    delta, theta, checks = codim2_matrix(ext, kah, nerve, nablas, chi)
    assert all(checks.values()), checks
    assert not theta.is_zero()
    assert not any(class_coordinates(nerve, theta))


def test_probe_documents_cup_sign_tension_on_torus():
    # on a nerve with nonvanishing cups the literal recursion reading
    # disagrees with the verified comparison matrix at exactly the entries
    # with odd degree gap >= 2 nonzero cup terms, while wedging the extra
    # (-1)^{i-j} onto the composed term restores agreement everywhere
    ext = ext_of(2)
    nerve = torus_nerve()
    rng = random.Random(5)
    lam = wedge_family(ext, nerve, random_wedge_cochains(ext, nerve, rng))
    mu = wedge_family(ext, nerve, random_wedge_cochains(ext, nerve, rng))
    report = conjecture_probe(ext, nerve, lam, mu, shape="wedge")
    assert report["agrees"] is False
    assert report["entries"]["2,0"]["status"] == "disagree"
    assert report["agrees_corrected"] is True


def test_twisted_local_system_cohomology():
    # a sign-monodromy local system on the circle has no cohomology
    from hkrlab.modules import LinMap

    ext = ext_of(1)
    nerve = circle_nerve()
    M = ext.lam_i(1)

    def transitions(a, b):
        m = LinMap(M, M)
        sign = -1 if (a, b) in ((0, 1), (1, 0)) else 1
        m.set_column((0,), M.basis_vec((0,), sign))
        return m

    assert cech_cohomology(nerve, M, 0, transitions=transitions).dim == 0
    assert cech_cohomology(nerve, M, 1, transitions=transitions).dim == 0
    # trivial transitions recover the constant coefficients
    assert cech_cohomology(nerve, M, 0).dim == 1
