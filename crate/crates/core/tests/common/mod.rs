#![allow(dead_code)]

use klr::perm;
use klr::poly::Poly;
use klr::qha::{Alg, Elem, Gen};
use klr::Q;
use num_traits::One;
use std::collections::BTreeMap;

/// Vectors of the polynomial representation: word -> polynomial in x_1..x_n.
pub type PVec = BTreeMap<Vec<u8>, Poly>;

pub fn padd(a: &mut PVec, nu: Vec<u8>, p: Poly) {
    if p.is_zero() {
        return;
    }
    let n = p.nvars;
    let e = a.entry(nu.clone()).or_insert_with(|| Poly::zero(n));
    *e = e.add(&p);
    if e.is_zero() {
        a.remove(&nu);
    }
}

/// tau_l on the polynomial representation, written directly from the divided difference / Q-twist formulas
pub fn rep_tau(alg: &Alg, l: usize, v: &PVec) -> PVec {
    let mut out = PVec::new();
    for (nu, f) in v {
        let n = nu.len();
        let sf = f.swap_vars(l, l + 1);
        if nu[l] == nu[l + 1] {
            let d = sf.sub(f).div_linear(l, l + 1).expect("antisymmetric numerator");
            padd(&mut out, nu.clone(), d);
        } else {
            let (a, b) = (nu[l] as usize, nu[l + 1] as usize);
            let fac = if a < b {
                Poly::one(n)
            } else {
                alg.params.get(b, a).subs(&[Poly::var(n, l), Poly::var(n, l + 1)], n)
            };
            padd(&mut out, perm::swap_word(nu, l), fac.mul(&sf));
        }
    }
    out
}

pub fn rep_x(k: usize, v: &PVec) -> PVec {
    v.iter()
        .map(|(nu, f)| (nu.clone(), f.mul(&Poly::var(nu.len(), k))))
        .collect()
}

pub fn rep_gen(alg: &Alg, g: &Gen, v: &PVec) -> PVec {
    match g {
        Gen::E(nu) => v.iter().filter(|(m, _)| *m == nu).map(|(a, b)| (a.clone(), b.clone())).collect(),
        Gen::X(k) => rep_x(*k, v),
        Gen::T(l) => rep_tau(alg, *l, v),
        Gen::P(p) => v.iter().map(|(nu, f)| (nu.clone(), p.mul(f))).filter(|(_, f)| !f.is_zero()).collect(),
        Gen::Scalar(c) => v.iter().map(|(nu, f)| (nu.clone(), f.scale(c))).filter(|(_, f)| !f.is_zero()).collect(),
    }
}

pub fn rep_gens(alg: &Alg, gens: &[Gen], v: &PVec) -> PVec {
    let mut cur = v.clone();
    for g in gens.iter().rev() {
        cur = rep_gen(alg, g, &cur);
    }
    cur
}

/// action of a normal-form element
pub fn rep_elem(alg: &Alg, e: &Elem, v: &PVec) -> PVec {
    let mut out = PVec::new();
    for (t, c) in &e.terms {
        let Some(f) = v.get(&t.nu) else { continue };
        let mut cur = PVec::new();
        cur.insert(t.nu.clone(), f.mul(&Poly::monomial(t.a.clone(), c.clone())));
        for &l in perm::canon(&t.w).iter().rev() {
            cur = rep_tau(alg, l as usize, &cur);
        }
        for (nu, p) in cur {
            padd(&mut out, nu, p);
        }
    }
    out
}

/// a spread of test vectors: 1, x_1^2 x_2, ... on every word
pub fn probes(words: &[Vec<u8>]) -> Vec<PVec> {
    let mut out = Vec::new();
    for nu in words {
        let n = nu.len();
        let mut monos = vec![Poly::one(n)];
        let mut e = vec![0u32; n];
        for k in 0..n {
            e[k] = (k % 3) as u32;
        }
        monos.push(Poly::monomial(e.clone(), Q::one()));
        if n >= 2 {
            let mut f = vec![0u32; n];
            f[0] = 1;
            monos.push(Poly::monomial(f, Q::one()));
        }
        for m in monos {
            let mut v = PVec::new();
            v.insert(nu.clone(), m);
            out.push(v);
        }
    }
    out
}
