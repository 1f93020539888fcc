mod common;

use common::*;
use klr::cartan::{extend_cartan, lambda_pm, preset, Sign};
use klr::linalg::q;
use klr::perm;
use klr::poly::Poly;
use klr::qha::{self, all_words, default_qparams, Alg, Elem, Gen};
use proptest::prelude::*;

fn algs() -> Vec<std::sync::Arc<Alg>> {
    let mut out = Vec::new();
    for name in ["A2", "B2"] {
        let d = preset(name).unwrap();
        out.push(Alg::canonical(&d));
        for sign in [Sign::Plus, Sign::Minus] {
            let e = extend_cartan(&d, 0, sign).unwrap();
            let lam = lambda_pm(&e, 0, sign).unwrap();
            out.push(Alg::new(e.clone(), lam, default_qparams(&e)).unwrap());
        }
    }
    out
}

#[test]
fn polynomial_rep_satisfies_relations() {
    for alg in algs() {
        let n = 3;
        let words = all_words(alg.datum.rank(), n);
        for v in probes(&words) {
            for l in 0..n - 1 {
                let nu = v.keys().next().unwrap().clone();
                let tt = rep_gens(&alg, &[Gen::T(l), Gen::T(l)], &v);
                let qp = alg.q_at(nu[l], nu[l + 1], l, l + 1, n);
                assert_eq!(tt, rep_gen(&alg, &Gen::P(qp), &v));
                if l + 2 < n {
                    let bab = rep_gens(&alg, &[Gen::T(l + 1), Gen::T(l), Gen::T(l + 1)], &v);
                    let aba = rep_gens(&alg, &[Gen::T(l), Gen::T(l + 1), Gen::T(l)], &v);
                    let mut diff = bab.clone();
                    for (w, p) in aba {
                        padd(&mut diff, w, p.scale(&q(-1)));
                    }
                    let expect = if nu[l] == nu[l + 2] {
                        rep_gen(&alg, &Gen::P(alg.qbar_at(nu[l], nu[l + 1], l, l + 1, l + 2, n)), &v)
                    } else {
                        PVec::new()
                    };
                    assert_eq!(diff, expect, "braid relation on {:?}", nu);
                }
            }
        }
    }
}

#[test]
fn normal_forms_agree_with_polynomial_rep() {
    for alg in algs() {
        let n = 4;
        let words = all_words(alg.datum.rank(), n);
        let seqs: Vec<Vec<Gen>> = vec![
            vec![Gen::T(0), Gen::T(1), Gen::T(0)],
            vec![Gen::T(1), Gen::X(1), Gen::T(0), Gen::T(2), Gen::T(1)],
            vec![Gen::T(2), Gen::T(1), Gen::T(0), Gen::T(1), Gen::T(2)],
            vec![Gen::X(0), Gen::T(0), Gen::T(1), Gen::T(2), Gen::T(0), Gen::T(1)],
            vec![Gen::T(0), Gen::T(2), Gen::T(1), Gen::T(1), Gen::T(0)],
        ];
        for nu in words.iter().step_by(3) {
            for s in &seqs {
                let e = alg.apply_gens(s, &Elem::idem(nu)).unwrap();
                for v in probes(&[nu.clone()]) {
                    assert_eq!(rep_elem(&alg, &e, &v), rep_gens(&alg, s, &v), "{:?} on {:?}", s, nu);
                }
            }
        }
    }
}

#[test]
fn defining_relations_reduce_to_zero() {
    for alg in algs() {
        for n in 2..=4 {
            let res = qha::verify_relations(&alg, n).unwrap();
            let bad: Vec<_> = res.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
            assert!(bad.is_empty(), "{:?}", &bad[..bad.len().min(5)]);
        }
    }
}

#[test]
fn appendix_identities_small() {
    for name in ["A2", "B2"] {
        let alg = Alg::canonical(&preset(name).unwrap());
        let res = qha::verify_appendix_b(&alg, 3).unwrap();
        let bad: Vec<_> = res.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
        assert!(bad.is_empty(), "{} {:?}", name, &bad[..bad.len().min(5)]);
    }
}

#[test]
fn spec_examples() {
    let a2 = Alg::canonical(&preset("A2").unwrap());
    let e = qha::normal_form(&a2, "e(1,2)*e(2,1)", &[1, 1]).unwrap();
    assert!(e.is_zero());
    let e = qha::normal_form(&a2, "e(1,2)*x(1)", &[1, 1]).unwrap();
    assert_eq!(e, qha::normal_form(&a2, "x(1)*e(1,2)", &[1, 1]).unwrap());
    // (tau_1 e(1,2)) (tau_1 e(2,1)) = Q_{2,1}(x_1,x_2) e(2,1)
    let a = qha::normal_form(&a2, "tau(1)*e(1,2)", &[1, 1]).unwrap();
    let b = qha::normal_form(&a2, "tau(1)*e(2,1)", &[1, 1]).unwrap();
    let p = qha::multiply(&a2, &a, &b).unwrap();
    assert_eq!(qha::render(&a2, &p), "(x1+x2) e(2,1)");
    assert!(matches!(qha::normal_form(&a2, "tau(3)", &[1, 1]), Err(klr::KlrError::WeightMismatch(_))));
}

#[test]
fn intertwiners() {
    let a1 = Alg::canonical(&preset("A1").unwrap());
    let phi = a1.intertwiner_at(0, &[0, 0]).unwrap();
    let expect = qha::normal_form(&a1, "tau(1)*(x(1)-x(2))*e(1,1) + e(1,1)", &[2]).unwrap();
    assert_eq!(phi, expect);
    let a2 = Alg::canonical(&preset("A2").unwrap());
    assert_eq!(a2.intertwiner_at(0, &[0, 1]).unwrap(), qha::normal_form(&a2, "tau(1)*e(1,2)", &[1, 1]).unwrap());
    // braid relation of intertwiners, and word independence for n <= 4
    for content in [vec![3i64, 0], vec![2, 1], vec![2, 2], vec![3, 1]] {
        let n: i64 = content.iter().sum();
        for w in perm::all_perms(n as usize) {
            let base = a2.identity(&content);
            let c = perm::canon(&w);
            let via_canon = a2.phi_word_left(&c, &base).unwrap();
            // another reduced word: the lexicographically largest one
            let mut word = Vec::new();
            let mut cur = w.clone();
            while !perm::is_identity(&cur) {
                let k = (0..n as usize - 1).rev().find(|&k| perm::is_left_descent(&cur, k)).unwrap();
                word.push(k as u8);
                cur = perm::left_mul(k, &cur);
            }
            assert_eq!(via_canon, a2.phi_word_left(&word, &base).unwrap());
        }
    }
}

#[test]
fn central_element() {
    let a2 = Alg::canonical(&preset("A2").unwrap());
    let p = a2.central_p(0, &[1, 1]);
    assert_eq!(p, qha::normal_form(&a2, "x(1)*e(1,2) + x(2)*e(2,1)", &[1, 1]).unwrap());
    for content in [vec![1i64, 1], vec![2, 1], vec![2, 2]] {
        let n: i64 = content.iter().sum();
        for i in 0..2 {
            let p = a2.central_p(i, &content);
            for g in (0..n as usize - 1).map(Gen::T).chain((0..n as usize).map(Gen::X)) {
                let gp = a2.apply_gen(&g, &p).unwrap();
                let pg = a2.mul(&p, &a2.apply_gen(&g, &a2.identity(&content)).unwrap()).unwrap();
                assert_eq!(gp, pg);
            }
        }
    }
}

#[test]
fn divided_q_symmetric() {
    for name in ["A2", "B2"] {
        let d = preset(name).unwrap();
        let params = default_qparams(&d);
        for t in 1..=3 {
            for (i, j) in [(0, 1), (1, 0)] {
                let p = qha::divided_q(&params, i, j, t);
                if t == 1 {
                    assert_eq!(p, params.get(i, j).clone());
                }
                for a in 0..t {
                    for b in a + 1..t {
                        assert_eq!(p.swap_vars(a, b), p);
                    }
                }
            }
        }
    }
    let params = default_qparams(&preset("A2").unwrap());
    assert_eq!(qha::divided_q(&params, 0, 1, 2), Poly::one(3));
}

#[test]
fn graded_dimension_matches_enumeration() {
    let a2 = Alg::canonical(&preset("A2").unwrap());
    // e(1,2) R e(1,2): x monomials only; e(2,1) R e(1,2): tau_1 x^a of degree 1 + 2|a|
    let d = a2.graded_dim(&[0, 1], &[0, 1], 4);
    assert_eq!(d.get(&0), Some(&1));
    assert_eq!(d.get(&2), Some(&2));
    assert_eq!(d.get(&4), Some(&3));
    let d = a2.graded_dim(&[1, 0], &[0, 1], 3);
    assert_eq!(d.get(&1), Some(&1));
    assert_eq!(d.get(&3), Some(&2));
}

fn random_elem(alg: &Alg, nu: &[u8], seed: &[u8]) -> Elem {
    let n = nu.len();
    let mut gens = Vec::new();
    for &s in seed {
        match s % 3 {
            0 => gens.push(Gen::X((s as usize / 3) % n)),
            _ => gens.push(Gen::T((s as usize / 3) % (n - 1))),
        }
    }
    alg.apply_gens(&gens, &Elem::idem(nu)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn associativity(w in proptest::collection::vec(0u8..2, 3..=4),
                     s1 in proptest::collection::vec(0u8..30, 1..4),
                     s2 in proptest::collection::vec(0u8..30, 1..4),
                     s3 in proptest::collection::vec(0u8..30, 1..4)) {
        let alg = Alg::canonical(&preset("A2").unwrap());
        let c = random_elem(&alg, &w, &s3);
        let mid: Vec<u8> = c.terms.keys().next().map(|t| t.left()).unwrap_or(w.clone());
        let b = random_elem(&alg, &mid, &s2);
        let top: Vec<u8> = b.terms.keys().next().map(|t| t.left()).unwrap_or(mid.clone());
        let a = random_elem(&alg, &top, &s1);
        let ab_c = alg.mul(&alg.mul(&a, &b).unwrap(), &c).unwrap();
        let a_bc = alg.mul(&a, &alg.mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
    }

    #[test]
    fn normal_form_terms_share_degree(w in proptest::collection::vec(0u8..2, 2..=4),
                                      s in proptest::collection::vec(0u8..30, 1..6)) {
        let alg = Alg::canonical(&preset("B2").unwrap());
        let e = random_elem(&alg, &w, &s);
        prop_assert!(e.is_zero() || alg.homogeneous_degree(&e).is_some());
    }
}
