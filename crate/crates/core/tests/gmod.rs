use std::sync::Arc;

use klr::cartan::{extend_cartan, lambda_pm, preset, Sign};
use klr::gmod::{self, Module};
use klr::perm;
use klr::poly::Laurent;
use klr::qha::{default_qparams, Alg};
use proptest::prelude::*;

fn alg(name: &str) -> Arc<Alg> {
    Alg::canonical(&preset(name).unwrap())
}

fn letter(a: &Arc<Alg>, i: usize) -> Module {
    Module::simple_letter(a, i)
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

// shuffle product of characters, degrees from the associator directly
fn shuffle_character(a: &Alg, m: &gmod::Character, n: &gmod::Character) -> gmod::Character {
    let mut out = gmod::Character::new();
    for (u, lu) in m {
        for (v, lv) in n {
            let (hu, hv) = (u.len(), v.len());
            let mut uv = u.clone();
            uv.extend_from_slice(v);
            for sh in perm::shuffles(&[hu, hv]) {
                let mut d = 0;
                for p in 0..hu {
                    for qq in hu..hu + hv {
                        if sh[p] > sh[qq] {
                            d += a.lam.eval(uv[qq] as usize, uv[p] as usize);
                        }
                    }
                }
                let w = perm::act(&sh, &uv);
                let e = out.entry(w).or_insert_with(Laurent::zero);
                *e = e.add(&lu.mul(lv).shift(2 * d));
            }
        }
    }
    out.retain(|_, l| !l.is_zero());
    out
}

#[test]
fn simple_powers_have_factorial_dimension() {
    for name in ["A2", "B2"] {
        let a = alg(name);
        for i in 0..2 {
            for n in 1..=4 {
                let m = gmod::simple_power(&a, i, n).unwrap();
                assert_eq!(m.dim(), factorial(n), "{} i={} n={}", name, i, n);
                assert!(m.check_relations().is_empty());
                let ch = m.character();
                let dch = m.dual_star().character();
                assert_eq!(ch, dch, "self-dual {} {}", name, n);
            }
        }
    }
}

#[test]
fn square_of_letter_character() {
    // <i^2> has character q_i^{-1} + q_i on the word ii
    let a = alg("B2");
    for i in 0..2 {
        let m = gmod::simple_power(&a, i, 2).unwrap();
        let ch = m.character();
        let d = a.datum.sym[i];
        let mut expect = Laurent::zero();
        expect.add_term(-2 * d, 1);
        expect.add_term(2 * d, 1);
        assert_eq!(ch[&vec![i as u8, i as u8]], expect);
    }
}

#[test]
fn cyclotomic_power_matches_convolution_power() {
    for name in ["A2", "B2"] {
        let a = alg(name);
        for c in 1..=3 {
            let cyc = gmod::cyclotomic_power(&a, 0, c).unwrap();
            assert_eq!(cyc.dim(), factorial(c));
            assert!(cyc.check_relations().is_empty());
            // x_c is nilpotent of order exactly c
            let mut v = cyc.x[c - 1].clone();
            for _ in 1..c {
                assert!(!v.is_zero());
                v = cyc.x[c - 1].mul(&v);
            }
            assert!(v.is_zero());
            let pw = gmod::simple_power(&a, 0, c).unwrap();
            let cyc = gmod::self_dual_normalize(&cyc);
            assert!(gmod::find_isomorphism(&cyc, &pw, 0).unwrap().is_some(), "{} c={}", name, c);
        }
    }
}

#[test]
fn convolutions_satisfy_relations() {
    for name in ["A2", "B2"] {
        let a = alg(name);
        let (l1, l2) = (letter(&a, 0), letter(&a, 1));
        for ms in [vec![&l1, &l2], vec![&l1, &l2, &l1], vec![&l2, &l2, &l1], vec![&l2, &l1, &l2, &l1]] {
            let m = Module::convolve_all(&ms).unwrap();
            let bad = m.check_relations();
            assert!(bad.is_empty(), "{}: {:?}", m.label, &bad[..bad.len().min(5)]);
        }
    }
}

#[test]
fn extended_and_affine_convolutions_satisfy_relations() {
    let d = preset("A2").unwrap();
    for sign in [Sign::Plus, Sign::Minus] {
        let e = extend_cartan(&d, 0, sign).unwrap();
        let lam = lambda_pm(&e, 0, sign).unwrap();
        let a = Alg::new(e.clone(), lam, default_qparams(&e)).unwrap();
        let m = Module::convolve_all(&[&letter(&a, 2), &letter(&a, 0), &letter(&a, 1)]).unwrap();
        assert!(m.check_relations().is_empty());
        let z = Module::letter_affine(&a, 0, 3, 0);
        let w = Module::letter_affine(&a, 2, 3, 1);
        let m = z.convolution(&w).unwrap();
        assert!(m.check_relations().is_empty());
        assert_eq!(m.dim(), 18);
    }
}

#[test]
fn convolution_character_is_shuffle_product() {
    let a = alg("B2");
    let m = Module::convolve_all(&[&letter(&a, 0), &letter(&a, 1), &letter(&a, 1)]).unwrap();
    let step = shuffle_character(&a, &letter(&a, 0).character(), &letter(&a, 1).character());
    let step = shuffle_character(&a, &step, &letter(&a, 1).character());
    assert_eq!(m.character(), step);
}

#[test]
fn head_and_socle_of_two_letters() {
    let a = alg("A2");
    let m = letter(&a, 0).convolution(&letter(&a, 1)).unwrap();
    assert_eq!(m.dim(), 2);
    let (h, _) = m.head();
    assert_eq!(h.dim(), 1);
    assert_eq!(h.words[0], vec![0, 1]);
    assert!(gmod::is_simple(&h).unwrap());
    let (s, _) = m.socle();
    assert_eq!(s.dim(), 1);
    assert_eq!(s.words[0], vec![1, 0]);
    assert!(!gmod::is_simple(&m).unwrap());
}

#[test]
fn simple_powers_are_simple() {
    let a = alg("A2");
    for n in 1..=3 {
        let m = gmod::simple_power(&a, 0, n).unwrap();
        assert!(gmod::is_simple(&m).unwrap());
        assert_eq!(m.radical_submodule().rank(), 0);
    }
}

#[test]
fn determinantial_modules() {
    // <i^c j> with c = -c_ij is the head of <i^c> ∘ <j>
    for (name, i, j) in [("A2", 0, 1), ("A2", 1, 0), ("B2", 1, 0), ("B2", 0, 1)] {
        let a = alg(name);
        let c = (-a.datum.gcm[i][j]) as usize;
        let m = gmod::determinantial(&a, i, j, c).unwrap();
        assert!(m.check_relations().is_empty());
        assert!(gmod::is_simple(&m).unwrap());
        let h = gmod::head_of(&gmod::simple_power(&a, i, c).unwrap(), &letter(&a, j)).unwrap();
        assert!(gmod::find_isomorphism(&m, &h, 1).unwrap().is_some(), "{} {} {}", name, i, j);
        assert_eq!(m.character(), m.dual_star().character());
    }
}

#[test]
fn frobenius_reciprocity_matches_direct_solve() {
    let a = alg("A2");
    let (l1, l2) = (letter(&a, 0), letter(&a, 1));
    let m = Module::convolve_all(&[&l1, &l2, &l1]).unwrap();
    let n = Module::convolve_all(&[&l1, &l1, &l2]).unwrap();
    let fr = gmod::hom_space(&m, &n).unwrap();
    let mut direct = m.clone();
    direct.ind = None;
    let dr = gmod::hom_space(&direct, &n).unwrap();
    let mut d1 = fr.degrees();
    let mut d2 = dr.degrees();
    d1.sort();
    d2.sort();
    assert_eq!(d1, d2);
    for (_, f) in &fr.maps {
        for (name, g) in m.generators() {
            let gn = n.generators().into_iter().find(|x| x.0 == name).unwrap().1;
            assert_eq!(f.mul(g), gn.mul(f));
        }
    }
}

#[test]
fn r_matrix_hom_between_two_letters() {
    let a = alg("A2");
    let m = letter(&a, 0).convolution(&letter(&a, 1)).unwrap();
    let n = letter(&a, 1).convolution(&letter(&a, 0)).unwrap();
    let h = gmod::hom_space(&m, &n).unwrap();
    assert_eq!(h.dim(), 1);
}

#[test]
fn restriction_functors() {
    let a = alg("A2");
    let (l1, l2) = (letter(&a, 0), letter(&a, 1));
    let m = Module::convolve_all(&[&l1, &l2, &l1]).unwrap();
    let e = m.e_i(0);
    assert!(e.check_relations().is_empty());
    assert_eq!(e.dim(), m.words.iter().filter(|w| w[0] == 0).count());
    let es = m.e_i_star(1);
    assert!(es.check_relations().is_empty());
    assert_eq!(m.eps_i(0), 2);
    // Mackey: the box product maps into the restriction of the convolution
    let p = l1.boxprod(&l2.convolution(&l1).unwrap()).unwrap();
    let r = m.restrict(&[1, 0], &[1, 1]);
    assert!(r.check_relations().is_empty());
    let homs = gmod::hom_at_shift(&p, &r, 0, false).unwrap();
    assert!(!homs.is_empty());
}

#[test]
fn regrading_and_duality() {
    let d = preset("B2").unwrap();
    let e = extend_cartan(&d, 1, Sign::Plus).unwrap();
    let can = Alg::canonical(&e);
    let lam = lambda_pm(&e, 1, Sign::Plus).unwrap();
    let alt = can.regraded(lam).unwrap();
    let m = Module::convolve_all(&[&letter(&can, 2), &letter(&can, 1), &letter(&can, 0)]).unwrap();
    let r = m.regrade(&alt).unwrap();
    assert!(r.check_relations().is_empty());
    let direct = Module::convolve_all(&[&letter(&alt, 2), &letter(&alt, 1), &letter(&alt, 0)]).unwrap();
    let shift = r.degs[0] - direct.degs[0];
    assert_eq!(r.shift(-shift).character(), direct.character());
    let dm = m.dual_star();
    assert!(dm.check_relations().is_empty());
    assert_eq!(dm.dual_star().character(), m.character());
}

#[test]
fn affine_letter_is_free() {
    let a = alg("A2");
    let z = Module::letter_affine(&a, 0, 4, 7);
    let f = z.make_free(7).unwrap();
    assert_eq!(f.free.as_ref().unwrap().gens, 1);
    assert_eq!(f.special_fiber(7).dim(), 1);
}

#[test]
fn determinantial_affinization_is_free() {
    for (name, i, j) in [("A2", 0, 1), ("B2", 1, 0)] {
        let a = alg(name);
        let c = (-a.datum.gcm[i][j]) as usize;
        let m = gmod::determinantial_affine(&a, i, j, c, 3, 0).unwrap();
        assert!(m.check_relations().is_empty());
        let f = m.free.as_ref().unwrap();
        let fib = gmod::determinantial(&a, i, j, c).unwrap();
        assert_eq!(f.gens, fib.dim());
        assert_eq!(m.dim(), 3 * fib.dim());
        let sf = m.special_fiber(0);
        assert!(gmod::find_isomorphism(&sf, &fib, 0).unwrap().is_some());
    }
}

fn word_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..2, 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shuffle_character_multiplicative(w in word_strategy(), name in prop::sample::select(vec!["A2", "B2", "C2"])) {
        let a = alg(name);
        let ls: Vec<Module> = w.iter().map(|&i| letter(&a, i)).collect();
        let refs: Vec<&Module> = ls.iter().collect();
        let m = Module::convolve_all(&refs).unwrap();
        let mut ch = ls[0].character();
        for l in &ls[1..] {
            ch = shuffle_character(&a, &ch, &l.character());
        }
        prop_assert_eq!(m.character(), ch);
        prop_assert!(m.check_relations().is_empty());
    }

    #[test]
    fn convolution_is_associative_up_to_iso(i in 0usize..2, j in 0usize..2, k in 0usize..2) {
        let a = alg("A2");
        let (x, y, z) = (letter(&a, i), letter(&a, j), letter(&a, k));
        let left = x.convolution(&y).unwrap().convolution(&z).unwrap();
        let right = x.convolution(&y.convolution(&z).unwrap()).unwrap();
        prop_assert!(gmod::find_isomorphism(&left, &right, 3).unwrap().is_some());
    }
}

