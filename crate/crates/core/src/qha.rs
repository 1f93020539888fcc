use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};
use serde_json::json;

use crate::cartan::{CartanDatum, GradeAssociator};
use crate::error::{KlrError, Result};
use crate::linalg::{fmt_q, q, Q};
use crate::perm::{self, Perm};
use crate::poly::Poly;

pub const FUEL_LIMIT: u64 = 10_000_000;

thread_local! {
    static FUEL: Cell<u64> = Cell::new(0);
}

fn tick() -> Result<()> {
    FUEL.with(|f| {
        let v = f.get() + 1;
        f.set(v);
        if v > FUEL_LIMIT {
            Err(KlrError::InternalRewriteFuel)
        } else {
            Ok(())
        }
    })
}

pub fn reset_fuel() {
    FUEL.with(|f| f.set(0));
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QParams {
    /// Q_{j,k}(u,v) as a polynomial in two variables
    pub q: Vec<Vec<Poly>>,
}

impl QParams {
    pub fn get(&self, j: usize, k: usize) -> &Poly {
        &self.q[j][k]
    }

    pub fn check(&self, datum: &CartanDatum) -> Result<()> {
        let n = datum.rank();
        for j in 0..n {
            for k in 0..n {
                let p = &self.q[j][k];
                if j == k {
                    if !p.is_zero() {
                        return Err(KlrError::HypothesisFailed("Q_{j,j} must vanish".into()));
                    }
                    continue;
                }
                if *p != self.q[k][j].swap_vars(0, 1) {
                    return Err(KlrError::HypothesisFailed(format!("Q_{{{},{}}} not symmetric", j, k)));
                }
                let lead = vec![(-datum.gcm[j][k]) as u32, 0];
                if p.terms.get(&lead).map_or(true, |c| c.is_zero()) {
                    return Err(KlrError::HypothesisFailed(format!("leading coefficient of Q_{{{},{}}} vanishes", j, k)));
                }
                for e in p.terms.keys() {
                    let d = e[0] as i64 * datum.form[j][j] + e[1] as i64 * datum.form[k][k];
                    if d != -2 * datum.form[j][k] {
                        return Err(KlrError::HypothesisFailed(format!("Q_{{{},{}}} not homogeneous", j, k)));
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn default_qparams(datum: &CartanDatum) -> QParams {
    let n = datum.rank();
    let mut qm = vec![vec![Poly::zero(2); n]; n];
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let c = datum.gcm[j][k];
            if c == 0 {
                qm[j][k] = Poly::one(2);
            } else {
                let mut p = Poly::zero(2);
                p.add_term(vec![(-c) as u32, 0], Q::one());
                p.add_term(vec![0, (-datum.gcm[k][j]) as u32], Q::one());
                qm[j][k] = p;
            }
        }
    }
    if let Some(e) = &datum.ext {
        let (i, p) = (e.i, e.new);
        let u_minus_v = Poly::var(2, 0).sub(&Poly::var(2, 1));
        qm[p][i] = u_minus_v.clone();
        qm[i][p] = u_minus_v.swap_vars(0, 1);
        for k in 0..n {
            if k != i && k != p {
                qm[p][k] = Poly::one(2);
                qm[k][p] = Poly::one(2);
            }
        }
    }
    QParams { q: qm }
}

/// PBW term tau_w x^a e(nu); nu is the right idempotent
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub w: Perm,
    pub a: Vec<u32>,
    pub nu: Vec<u8>,
}

impl Term {
    pub fn idem(nu: &[u8]) -> Term {
        Term { w: perm::identity(nu.len()), a: vec![0; nu.len()], nu: nu.to_vec() }
    }

    pub fn left(&self) -> Vec<u8> {
        perm::act(&self.w, &self.nu)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Elem {
    pub terms: BTreeMap<Term, Q>,
}

impl Elem {
    pub fn zero() -> Elem {
        Elem::default()
    }

    pub fn term(t: Term, c: Q) -> Elem {
        let mut e = Elem::zero();
        e.add_term(t, c);
        e
    }

    pub fn idem(nu: &[u8]) -> Elem {
        Elem::term(Term::idem(nu), Q::one())
    }

    pub fn add_term(&mut self, t: Term, c: Q) {
        if c.is_zero() {
            return;
        }
        let v = self.terms.entry(t.clone()).or_insert_with(Q::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&t);
        }
    }

    pub fn add_scaled(&mut self, o: &Elem, c: &Q) {
        if c.is_zero() {
            return;
        }
        for (t, v) in &o.terms {
            self.add_term(t.clone(), v * c);
        }
    }

    pub fn add(&self, o: &Elem) -> Elem {
        let mut r = self.clone();
        r.add_scaled(o, &Q::one());
        r
    }

    pub fn sub(&self, o: &Elem) -> Elem {
        let mut r = self.clone();
        r.add_scaled(o, &-Q::one());
        r
    }

    pub fn scale(&self, c: &Q) -> Elem {
        let mut r = Elem::zero();
        r.add_scaled(self, c);
        r
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// right multiplication by x^b (x's sit next to e(nu))
    pub fn times_x(&self, b: &[u32]) -> Elem {
        let mut r = Elem::zero();
        for (t, c) in &self.terms {
            let mut t2 = t.clone();
            for (k, &e) in b.iter().enumerate() {
                t2.a[k] += e;
            }
            r.add_term(t2, c.clone());
        }
        r
    }

    /// keep terms whose right idempotent is nu
    pub fn right_idem(&self, nu: &[u8]) -> Elem {
        Elem { terms: self.terms.iter().filter(|(t, _)| t.nu == nu).map(|(t, c)| (t.clone(), c.clone())).collect() }
    }

    pub fn left_idem(&self, nu: &[u8]) -> Elem {
        Elem { terms: self.terms.iter().filter(|(t, _)| t.left() == nu).map(|(t, c)| (t.clone(), c.clone())).collect() }
    }

    pub fn height(&self) -> Option<usize> {
        self.terms.keys().next().map(|t| t.nu.len())
    }

    pub fn to_json(&self, datum: &CartanDatum) -> serde_json::Value {
        let arr: Vec<_> = self
            .terms
            .iter()
            .map(|(t, c)| {
                json!({
                    "coef": fmt_q(c),
                    "w": t.w.iter().map(|&b| b as u32 + 1).collect::<Vec<_>>(),
                    "a": t.a,
                    "nu": t.nu.iter().map(|&l| datum.labels[l as usize].clone()).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::Value::Array(arr)
    }
}

type Key = (u8, Perm, Vec<u8>);

pub struct Alg {
    pub datum: CartanDatum,
    pub lam: GradeAssociator,
    pub params: QParams,
    nf_tau: RwLock<HashMap<Key, Arc<Elem>>>,
    nf_x: RwLock<HashMap<Key, Arc<Elem>>>,
    rw: RwLock<HashMap<(Vec<u8>, Vec<u8>), Arc<Elem>>>,
}

impl std::fmt::Debug for Alg {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        write!(f, "Alg({:?})", self.datum.labels)
    }
}

impl PartialEq for Alg {
    fn eq(&self, o: &Alg) -> bool {
        self.datum == o.datum && self.lam == o.lam && self.params == o.params
    }
}

/// same algebra up to the grading choice
pub fn same_algebra(a: &Alg, b: &Alg) -> bool {
    a.datum == b.datum && a.params == b.params
}

impl Alg {
    pub fn new(datum: CartanDatum, lam: GradeAssociator, params: QParams) -> Result<Arc<Alg>> {
        lam.check(&datum)?;
        params.check(&datum)?;
        Ok(Arc::new(Alg {
            datum,
            lam,
            params,
            nf_tau: RwLock::new(HashMap::new()),
            nf_x: RwLock::new(HashMap::new()),
            rw: RwLock::new(HashMap::new()),
        }))
    }

    pub fn canonical(datum: &CartanDatum) -> Arc<Alg> {
        let lam = crate::cartan::canonical_associator(datum);
        Alg::new(datum.clone(), lam, default_qparams(datum)).expect("default data is consistent")
    }

    /// same datum and parameters, different grading
    pub fn regraded(&self, lam: GradeAssociator) -> Result<Arc<Alg>> {
        Alg::new(self.datum.clone(), lam, self.params.clone())
    }

    pub fn clear_caches(&self) {
        self.nf_tau.write().unwrap().clear();
        self.nf_x.write().unwrap().clear();
        self.rw.write().unwrap().clear();
    }

    pub fn xdeg(&self, letter: u8) -> i64 {
        self.datum.form[letter as usize][letter as usize]
    }

    /// deg tau_l e(nu)
    pub fn tau_deg(&self, l: usize, nu: &[u8]) -> i64 {
        self.lam.eval(nu[l + 1] as usize, nu[l] as usize)
    }

    pub fn deg_term(&self, t: &Term) -> i64 {
        let mut d = 0;
        let mut mu = t.nu.clone();
        for &l in perm::canon(&t.w).iter().rev() {
            d += self.tau_deg(l as usize, &mu);
            mu = perm::swap_word(&mu, l as usize);
        }
        for (k, &e) in t.a.iter().enumerate() {
            d += e as i64 * self.xdeg(t.nu[k]);
        }
        d
    }

    pub fn homogeneous_degree(&self, e: &Elem) -> Option<i64> {
        let mut ds = e.terms.keys().map(|t| self.deg_term(t));
        let d = ds.next()?;
        if ds.all(|x| x == d) {
            Some(d)
        } else {
            None
        }
    }

    /// Q_{nu_a, nu_b}(x_a, x_b) as a polynomial in n variables
    pub fn q_at(&self, i: u8, j: u8, a: usize, b: usize, n: usize) -> Poly {
        let p = self.params.get(i as usize, j as usize);
        p.subs(&[Poly::var(n, a), Poly::var(n, b)], n)
    }

    /// Q-bar_{i,j}(x_a, x_b, x_c)
    pub fn qbar_at(&self, i: u8, j: u8, a: usize, b: usize, c: usize, n: usize) -> Poly {
        let p = self.params.get(i as usize, j as usize);
        let num = p
            .subs(&[Poly::var(n, a), Poly::var(n, b)], n)
            .sub(&p.subs(&[Poly::var(n, c), Poly::var(n, b)], n));
        num.div_linear(a, c).expect("divided difference is exact")
    }

    // ---- rewriting ----

    pub fn x_left(&self, k: usize, e: &Elem) -> Result<Elem> {
        let mut r = Elem::zero();
        for (t, c) in &e.terms {
            let base = self.nf_x(k, &t.w, &t.nu)?;
            r.add_scaled(&base.times_x(&t.a), c);
        }
        Ok(r)
    }

    pub fn tau_left(&self, l: usize, e: &Elem) -> Result<Elem> {
        let mut r = Elem::zero();
        for (t, c) in &e.terms {
            let base = self.nf_tau(l, &t.w, &t.nu)?;
            r.add_scaled(&base.times_x(&t.a), c);
        }
        Ok(r)
    }

    pub fn poly_left(&self, p: &Poly, e: &Elem) -> Result<Elem> {
        let mut r = Elem::zero();
        for (ex, c) in &p.terms {
            let mut cur = e.clone();
            for (k, &m) in ex.iter().enumerate() {
                for _ in 0..m {
                    cur = self.x_left(k, &cur)?;
                }
            }
            r.add_scaled(&cur, c);
        }
        Ok(r)
    }

    /// tau_{word} applied on the left, rightmost letter first
    pub fn word_left(&self, word: &[u8], e: &Elem) -> Result<Elem> {
        let mut cur = e.clone();
        for &l in word.iter().rev() {
            cur = self.tau_left(l as usize, &cur)?;
        }
        Ok(cur)
    }

    fn nf_x(&self, k: usize, w: &[u8], nu: &[u8]) -> Result<Arc<Elem>> {
        let key = (k as u8, w.to_vec(), nu.to_vec());
        if let Some(v) = self.nf_x.read().unwrap().get(&key) {
            return Ok(v.clone());
        }
        tick()?;
        let n = nu.len();
        let res = if perm::is_identity(w) {
            let mut t = Term::idem(nu);
            t.a[k] = 1;
            Elem::term(t, Q::one())
        } else {
            let l = perm::canon(w)[0] as usize;
            let wp = perm::left_mul(l, w);
            let mu = perm::act(&wp, nu);
            let sk = if k == l {
                l + 1
            } else if k == l + 1 {
                l
            } else {
                k
            };
            let inner = self.nf_x(sk, &wp, nu)?;
            let mut r = self.tau_left(l, &inner)?;
            if mu[l] == mu[l + 1] {
                let c = if k == l + 1 {
                    1
                } else if k == l {
                    -1
                } else {
                    0
                };
                if c != 0 {
                    r.add_term(Term { w: wp, a: vec![0; n], nu: nu.to_vec() }, q(c));
                }
            }
            r
        };
        let res = Arc::new(res);
        self.nf_x.write().unwrap().insert(key, res.clone());
        Ok(res)
    }

    fn nf_tau(&self, l: usize, w: &[u8], nu: &[u8]) -> Result<Arc<Elem>> {
        let key = (l as u8, w.to_vec(), nu.to_vec());
        if let Some(v) = self.nf_tau.read().unwrap().get(&key) {
            return Ok(v.clone());
        }
        tick()?;
        let n = nu.len();
        let res = if !perm::is_left_descent(w, l) {
            let mut word = vec![l as u8];
            word.extend(perm::canon(w));
            (*self.reduced_word_nf(&word, nu)?).clone()
        } else {
            let wp = perm::left_mul(l, w);
            let mut word = vec![l as u8];
            word.extend(perm::canon(&wp));
            let mut lower = (*self.reduced_word_nf(&word, nu)?).clone();
            lower.add_term(Term { w: w.to_vec(), a: vec![0; n], nu: nu.to_vec() }, -Q::one());
            let mu = perm::act(&wp, nu);
            let qp = self.q_at(mu[l], mu[l + 1], l, l + 1, n);
            let base = Elem::term(Term { w: wp, a: vec![0; n], nu: nu.to_vec() }, Q::one());
            let mut r = self.poly_left(&qp, &base)?;
            let corr = self.tau_left(l, &lower)?;
            r.add_scaled(&corr, &-Q::one());
            r
        };
        let res = Arc::new(res);
        self.nf_tau.write().unwrap().insert(key, res.clone());
        Ok(res)
    }

    /// normal form of tau_{word} e(nu) for a reduced word
    pub fn reduced_word_nf(&self, word: &[u8], nu: &[u8]) -> Result<Arc<Elem>> {
        let key = (word.to_vec(), nu.to_vec());
        if let Some(v) = self.rw.read().unwrap().get(&key) {
            return Ok(v.clone());
        }
        tick()?;
        let n = nu.len();
        let w = perm::from_word(word, n);
        let c = perm::canon(&w);
        let res = if c == word {
            Elem::term(Term { w, a: vec![0; n], nu: nu.to_vec() }, Q::one())
        } else {
            let l0 = c[0];
            let (nw, corr) = self.bring_front(word, l0, nu)?;
            let rest = self.reduced_word_nf(&nw[1..], nu)?;
            let mut r = self.tau_left(l0 as usize, &rest)?;
            r.add_scaled(&corr, &Q::one());
            r
        };
        let res = Arc::new(res);
        self.rw.write().unwrap().insert(key, res.clone());
        Ok(res)
    }

    /// rewrite a reduced word so that it starts with the left descent s; returns new word and correction
    fn bring_front(&self, word: &[u8], s: u8, nu: &[u8]) -> Result<(Vec<u8>, Elem)> {
        tick()?;
        let t = word[0];
        if t == s {
            return Ok((word.to_vec(), Elem::zero()));
        }
        let n = nu.len();
        let (r1, c1) = self.bring_front(&word[1..], s, nu)?;
        if (t as i32 - s as i32).abs() > 1 {
            let mut nw = vec![s, t];
            nw.extend_from_slice(&r1[1..]);
            let corr = self.tau_left(t as usize, &c1)?;
            return Ok((nw, corr));
        }
        let (r2, c2) = self.bring_front(&r1[1..], t, nu)?;
        let tail = &r2[1..];
        let mut corr = self.tau_left(t as usize, &c1)?;
        let c2l = self.word_left(&[t, s], &c2)?;
        corr.add_scaled(&c2l, &Q::one());
        let a = s.min(t) as usize;
        let rho = perm::act(&perm::from_word(tail, n), nu);
        if rho[a] == rho[a + 2] {
            let qb = self.qbar_at(rho[a], rho[a + 1], a, a + 1, a + 2, n);
            let tl = self.reduced_word_nf(tail, nu)?;
            let extra = self.poly_left(&qb, &tl)?;
            // aba = bab - Qbar ; bab = aba + Qbar
            let sign = if t as usize == a { -Q::one() } else { Q::one() };
            corr.add_scaled(&extra, &sign);
        }
        let mut nw = vec![s, t, s];
        nw.extend_from_slice(tail);
        Ok((nw, corr))
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        let mut by_left: HashMap<Vec<u8>, Elem> = HashMap::new();
        for (t, c) in &b.terms {
            by_left.entry(t.left()).or_default().add_term(t.clone(), c.clone());
        }
        let mut r = Elem::zero();
        for (t, c) in &a.terms {
            let Some(part) = by_left.get(&t.nu) else { continue };
            let mut cur = part.clone();
            for (k, &m) in t.a.iter().enumerate() {
                for _ in 0..m {
                    cur = self.x_left(k, &cur)?;
                }
            }
            cur = self.word_left(&perm::canon(&t.w), &cur)?;
            r.add_scaled(&cur, c);
        }
        Ok(r)
    }

    pub fn apply_gen(&self, g: &Gen, e: &Elem) -> Result<Elem> {
        match g {
            Gen::E(nu) => Ok(e.left_idem(nu)),
            Gen::X(k) => self.x_left(*k, e),
            Gen::T(l) => self.tau_left(*l, e),
            Gen::P(p) => self.poly_left(p, e),
            Gen::Scalar(c) => Ok(e.scale(c)),
        }
    }

    /// product g_1 ... g_r e, evaluated right to left
    pub fn apply_gens(&self, gens: &[Gen], e: &Elem) -> Result<Elem> {
        let mut cur = e.clone();
        for g in gens.iter().rev() {
            cur = self.apply_gen(g, &cur)?;
        }
        Ok(cur)
    }

    pub fn identity(&self, content: &[i64]) -> Elem {
        let mut r = Elem::zero();
        for nu in words_of(content) {
            r.add_term(Term::idem(&nu), Q::one());
        }
        r
    }

    pub fn intertwiner(&self, k: usize, content: &[i64]) -> Result<Elem> {
        let mut r = Elem::zero();
        for nu in words_of(content) {
            r = r.add(&self.intertwiner_at(k, &nu)?);
        }
        Ok(r)
    }

    /// phi_k e(nu)
    pub fn intertwiner_at(&self, k: usize, nu: &[u8]) -> Result<Elem> {
        let n = nu.len();
        let e = Elem::idem(nu);
        if nu[k] == nu[k + 1] {
            let d = Poly::var(n, k).sub(&Poly::var(n, k + 1));
            let t = self.tau_left(k, &self.poly_left(&d, &e)?)?;
            Ok(t.add(&e))
        } else {
            self.tau_left(k, &e)
        }
    }

    /// phi_{word} applied to an element on the left
    pub fn phi_word_left(&self, word: &[u8], e: &Elem) -> Result<Elem> {
        let mut cur = e.clone();
        for &l in word.iter().rev() {
            let l = l as usize;
            let mut next = Elem::zero();
            // split by left idempotent to decide the branch
            let mut by_left: BTreeMap<Vec<u8>, Elem> = BTreeMap::new();
            for (t, c) in &cur.terms {
                by_left.entry(t.left()).or_default().add_term(t.clone(), c.clone());
            }
            for (mu, part) in by_left {
                let n = mu.len();
                if mu[l] == mu[l + 1] {
                    let d = Poly::var(n, l).sub(&Poly::var(n, l + 1));
                    let t = self.tau_left(l, &self.poly_left(&d, &part)?)?;
                    next = next.add(&t).add(&part);
                } else {
                    next = next.add(&self.tau_left(l, &part)?);
                }
            }
            cur = next;
        }
        Ok(cur)
    }

    pub fn intertwiner_w(&self, w: &[u8], content: &[i64]) -> Result<Elem> {
        self.phi_word_left(&perm::canon(w), &self.identity(content))
    }

    pub fn central_p(&self, i: usize, content: &[i64]) -> Elem {
        let mut r = Elem::zero();
        for nu in words_of(content) {
            let mut t = Term::idem(&nu);
            for (a, &l) in nu.iter().enumerate() {
                if l as usize == i {
                    t.a[a] = 1;
                }
            }
            r.add_term(t, Q::one());
        }
        r
    }

    pub fn check_weight(&self, content: &[i64], e: &Elem) -> Result<()> {
        let n: i64 = content.iter().sum();
        for t in e.terms.keys() {
            if t.nu.len() as i64 != n || self.datum.content(&t.nu) != content {
                return Err(KlrError::WeightMismatch("element outside R(beta)".into()));
            }
        }
        Ok(())
    }

    /// graded dimension of e(mu) R e(nu) in degrees <= dmax, by PBW enumeration
    pub fn graded_dim(&self, mu: &[u8], nu: &[u8], dmax: i64) -> BTreeMap<i64, usize> {
        let n = nu.len();
        let mut out = BTreeMap::new();
        for w in perm::all_perms(n) {
            if perm::act(&w, nu) != mu {
                continue;
            }
            let base = self.deg_term(&Term { w: w.clone(), a: vec![0; n], nu: nu.to_vec() });
            let mut stack = vec![(0usize, base)];
            while let Some((k, d)) = stack.pop() {
                if d > dmax {
                    continue;
                }
                if k == n {
                    *out.entry(d).or_insert(0) += 1;
                    continue;
                }
                let step = self.xdeg(nu[k]);
                let mut dd = d;
                while dd <= dmax {
                    stack.push((k + 1, dd));
                    dd += step;
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub enum Gen {
    E(Vec<u8>),
    X(usize),
    T(usize),
    P(Poly),
    Scalar(Q),
}

/// all distinct words with the given letter content
pub fn words_of(content: &[i64]) -> Vec<Vec<u8>> {
    let n: i64 = content.iter().sum();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut left = content.to_vec();
    fn rec(n: usize, cur: &mut Vec<u8>, left: &mut Vec<i64>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for l in 0..left.len() {
            if left[l] > 0 {
                left[l] -= 1;
                cur.push(l as u8);
                rec(n, cur, left, out);
                cur.pop();
                left[l] += 1;
            }
        }
    }
    rec(n as usize, &mut cur, &mut left, &mut out);
    out
}

pub fn all_words(rank: usize, n: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &out {
            for l in 0..rank {
                let mut v = w.clone();
                v.push(l as u8);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Q_{i,j}(u_1..u_t; v) as a polynomial in t+1 variables (v last)
pub fn divided_q(params: &QParams, i: usize, j: usize, t: usize) -> Poly {
    assert!(t >= 1);
    let nv = t + 1;
    fn rec(params: &QParams, i: usize, j: usize, us: &[usize], v: usize, nv: usize) -> Poly {
        if us.len() == 1 {
            return params.get(i, j).subs(&[Poly::var(nv, us[0]), Poly::var(nv, v)], nv);
        }
        let mut a = vec![us[0]];
        a.extend_from_slice(&us[2..]);
        let mut b = vec![us[1]];
        b.extend_from_slice(&us[2..]);
        let num = rec(params, i, j, &a, v, nv).sub(&rec(params, i, j, &b, v, nv));
        num.div_linear(us[0], us[1]).expect("divided difference is exact")
    }
    let us: Vec<usize> = (0..t).collect();
    rec(params, i, j, &us, t, nv)
}

/// divided Q evaluated at x-positions
pub fn divided_q_at(params: &QParams, i: u8, j: u8, us: &[usize], v: usize, n: usize) -> Poly {
    let p = divided_q(params, i as usize, j as usize, us.len());
    let mut vals: Vec<Poly> = us.iter().map(|&a| Poly::var(n, a)).collect();
    vals.push(Poly::var(n, v));
    p.subs(&vals, n)
}

// ---- verification of the defining relations and appendix identities ----

#[derive(Clone, Debug)]
pub struct CaseResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn tau_range(a: usize, b: usize) -> Vec<Gen> {
    (a..=b).map(Gen::T).collect()
}

fn nf(alg: &Alg, gens: &[Gen], nu: &[u8]) -> Result<Elem> {
    alg.apply_gens(gens, &Elem::idem(nu))
}

pub fn verify_relations(alg: &Alg, n: usize) -> Result<Vec<CaseResult>> {
    let mut out = Vec::new();
    let rank = alg.datum.rank();
    for nu in all_words(rank, n) {
        let tag = |s: &str| format!("{} nu={:?}", s, nu);
        let e = Elem::idem(&nu);
        for l in 0..n.saturating_sub(1) {
            // tau_l^2
            let lhs = nf(alg, &[Gen::T(l), Gen::T(l)], &nu)?;
            let rhs = alg.poly_left(&alg.q_at(nu[l], nu[l + 1], l, l + 1, n), &e)?;
            out.push(CaseResult { name: tag(&format!("tau{}^2", l + 1)), pass: lhs == rhs, detail: String::new() });
            for k in 0..n {
                let sk = if k == l {
                    l + 1
                } else if k == l + 1 {
                    l
                } else {
                    k
                };
                let lhs = nf(alg, &[Gen::T(l), Gen::X(k)], &nu)?.sub(&nf(alg, &[Gen::X(sk), Gen::T(l)], &nu)?);
                let c = if nu[l] == nu[l + 1] {
                    (k == l + 1) as i64 - (k == l) as i64
                } else {
                    0
                };
                let rhs = e.scale(&q(c));
                out.push(CaseResult { name: tag(&format!("tau{}x{}", l + 1, k + 1)), pass: lhs == rhs, detail: String::new() });
            }
            for k in 0..n.saturating_sub(1) {
                if (k as i64 - l as i64).abs() > 1 {
                    let lhs = nf(alg, &[Gen::T(k), Gen::T(l)], &nu)?;
                    let rhs = nf(alg, &[Gen::T(l), Gen::T(k)], &nu)?;
                    out.push(CaseResult { name: tag(&format!("tau{}tau{}", k + 1, l + 1)), pass: lhs == rhs, detail: String::new() });
                }
            }
            if l + 2 < n {
                let bab = nf(alg, &[Gen::T(l + 1), Gen::T(l), Gen::T(l + 1)], &nu)?;
                let aba = nf(alg, &[Gen::T(l), Gen::T(l + 1), Gen::T(l)], &nu)?;
                let rhs = if nu[l] == nu[l + 2] {
                    alg.poly_left(&alg.qbar_at(nu[l], nu[l + 1], l, l + 1, l + 2, n), &e)?
                } else {
                    Elem::zero()
                };
                out.push(CaseResult { name: tag(&format!("braid{}", l + 1)), pass: bab.sub(&aba) == rhs, detail: String::new() });
            }
        }
        // homogeneity of a few products
        if n >= 2 {
            let prod = nf(alg, &[Gen::T(0), Gen::X(0), Gen::T(0)], &nu)?;
            let hom = prod.is_zero() || alg.homogeneous_degree(&prod).is_some();
            out.push(CaseResult { name: tag("homogeneous"), pass: hom, detail: String::new() });
        }
    }
    Ok(out)
}

fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &x in items {
        let more: Vec<Vec<usize>> = out
            .iter()
            .map(|s| {
                let mut t = s.clone();
                t.push(x);
                t
            })
            .collect();
        out.extend(more);
    }
    out
}

/// product of tau_s over s in the set, increasing order
fn uprod(set: &BTreeSet<usize>) -> Vec<Gen> {
    set.iter().map(|&s| Gen::T(s)).collect()
}

/// The identities of the appendix, indices 1-based in names, 0-based internally.
pub fn verify_appendix_b(alg: &Alg, nmax: usize) -> Result<Vec<CaseResult>> {
    let mut out = Vec::new();
    let rank = alg.datum.rank();
    for n in 2..=nmax {
        for nu in all_words(rank, n) {
            let e = Elem::idem(&nu);
            // x_k tau_a..tau_b
            for a in 0..n - 1 {
                for b in a..n - 1 {
                    for k in 0..n {
                        let mut lhs_g = vec![Gen::X(k)];
                        lhs_g.extend(tau_range(a, b));
                        let lhs = nf(alg, &lhs_g, &nu)?;
                        let rhs = if k == a {
                            let mut g = tau_range(a, b);
                            g.push(Gen::X(b + 1));
                            let mut r = nf(alg, &g, &nu)?;
                            for s in a..=b {
                                if nu[s] == nu[b + 1] {
                                    let mut g2: Vec<Gen> = (a..s).map(Gen::T).collect();
                                    g2.extend((s + 1..=b).map(Gen::T));
                                    r = r.sub(&nf(alg, &g2, &nu)?);
                                }
                            }
                            r
                        } else if a < k && k <= b + 1 {
                            let mut g = tau_range(a, b);
                            g.push(Gen::X(k - 1));
                            let mut r = nf(alg, &g, &nu)?;
                            if nu[k - 1] == nu[b + 1] {
                                let mut g2: Vec<Gen> = (a..k - 1).map(Gen::T).collect();
                                g2.extend((k..=b).map(Gen::T));
                                r = r.add(&nf(alg, &g2, &nu)?);
                            }
                            r
                        } else {
                            let mut g = tau_range(a, b);
                            g.push(Gen::X(k));
                            nf(alg, &g, &nu)?
                        };
                        out.push(CaseResult {
                            name: format!("xtau n={} nu={:?} a={} b={} k={}", n, nu, a + 1, b + 1, k + 1),
                            pass: lhs == rhs,
                            detail: String::new(),
                        });
                    }
                }
            }
            // tau_a..tau_b Q(x_{b+1}, x_gamma; x_k)
            for a in 0..n {
                for b1 in a..n {
                    // b1 = b+1, so tau range a..b1-1 (possibly empty)
                    let outside: Vec<usize> = (0..n).filter(|&s| s < a || s > b1).collect();
                    for &k in &outside {
                        let rest: Vec<usize> = outside.iter().cloned().filter(|&s| s != k).collect();
                        for gamma in subsets(&rest) {
                            let i = nu[b1];
                            let j = nu[k];
                            let mut us = vec![b1];
                            us.extend(gamma.iter().cloned());
                            let qp = divided_q_at(&alg.params, i, j, &us, k, n);
                            let mut g: Vec<Gen> = if b1 > a { tau_range(a, b1 - 1) } else { vec![] };
                            g.push(Gen::P(qp));
                            let lhs = nf(alg, &g, &nu)?;
                            let mut rhs = Elem::zero();
                            let cand: Vec<usize> = (a..b1).filter(|&s| nu[s] == i).collect();
                            for sigma in subsets(&cand) {
                                let mut us = vec![a];
                                us.extend(sigma.iter().map(|&s| s + 1));
                                us.extend(gamma.iter().cloned());
                                let qp = divided_q_at(&alg.params, i, j, &us, k, n);
                                let rest_set: BTreeSet<usize> = (a..b1).filter(|s| !sigma.contains(s)).collect();
                                let mut g = vec![Gen::P(qp)];
                                g.extend(uprod(&rest_set));
                                rhs = rhs.add(&nf(alg, &g, &nu)?);
                            }
                            out.push(CaseResult {
                                name: format!("tau-Q n={} nu={:?} a={} b={} k={} gamma={:?}", n, nu, a + 1, b1, k + 1, gamma),
                                pass: lhs == rhs,
                                detail: String::new(),
                            });
                        }
                    }
                }
            }
            // (tau_a..tau_b) tau_k
            for a in 0..n - 1 {
                for b in a..n - 1 {
                    for k in 0..n - 1 {
                        let mut lg = tau_range(a, b);
                        lg.push(Gen::T(k));
                        let lhs = nf(alg, &lg, &nu)?;
                        let rhs = if k > b + 1 || k + 1 < a {
                            let mut g = vec![Gen::T(k)];
                            g.extend(tau_range(a, b));
                            nf(alg, &g, &nu)?
                        } else if k == b + 1 {
                            nf(alg, &tau_range(a, b + 1), &nu)?
                        } else if k == b {
                            let mut r = Elem::zero();
                            let cand: Vec<usize> = (a..b).filter(|&s| nu[s] == nu[b]).collect();
                            for sigma in subsets(&cand) {
                                let mut us = vec![a];
                                us.extend(sigma.iter().map(|&s| s + 1));
                                let qp = divided_q_at(&alg.params, nu[b], nu[b + 1], &us, b + 1, n);
                                let rest: BTreeSet<usize> = (a..b).filter(|s| !sigma.contains(s)).collect();
                                let mut g = vec![Gen::P(qp)];
                                g.extend(uprod(&rest));
                                r = r.add(&nf(alg, &g, &nu)?);
                            }
                            r
                        } else if a <= k && k < b {
                            let mut g = vec![Gen::T(k + 1)];
                            g.extend(tau_range(a, b));
                            let mut r = nf(alg, &g, &nu)?;
                            if nu[k] == nu[b + 1] {
                                let cand: Vec<usize> = (a..k).filter(|&s| nu[s] == nu[b + 1]).collect();
                                for sigma in subsets(&cand) {
                                    let mut us = vec![a];
                                    us.extend(sigma.iter().map(|&s| s + 1));
                                    us.push(k + 2);
                                    let qp = divided_q_at(&alg.params, nu[b + 1], nu[k + 1], &us, k + 1, n);
                                    let mut rest: BTreeSet<usize> = (a..k).filter(|s| !sigma.contains(s)).collect();
                                    rest.extend(k + 2..=b);
                                    let mut g = vec![Gen::P(qp)];
                                    g.extend(uprod(&rest));
                                    r = r.sub(&nf(alg, &g, &nu)?);
                                }
                            }
                            r
                        } else {
                            // k = a-1
                            let mut g = vec![Gen::T(a), Gen::T(a - 1)];
                            g.extend(tau_range(a + 1, b).into_iter());
                            if a + 1 > b {
                                g.truncate(2);
                            }
                            nf(alg, &g, &nu)?
                        };
                        out.push(CaseResult {
                            name: format!("tautau n={} nu={:?} a={} b={} k={}", n, nu, a + 1, b + 1, k + 1),
                            pass: lhs == rhs,
                            detail: String::new(),
                        });
                    }
                }
            }
            let _ = e;
        }
    }
    Ok(out)
}

// ---- textual syntax ----

pub fn render(alg: &Alg, e: &Elem) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let mut groups: BTreeMap<(Vec<u8>, Perm), Poly> = BTreeMap::new();
    for (t, c) in &e.terms {
        let n = t.nu.len();
        groups
            .entry((t.nu.clone(), t.w.clone()))
            .or_insert_with(|| Poly::zero(n))
            .add_term(t.a.clone(), c.clone());
    }
    let mut parts = Vec::new();
    for ((nu, w), p) in groups {
        let n = nu.len();
        let names: Vec<String> = (1..=n).map(|k| format!("x{}", k)).collect();
        let nref: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let taus: Vec<String> = perm::canon(&w).iter().map(|&l| format!("tau({})", l + 1)).collect();
        let idem = format!(
            "e({})",
            nu.iter().map(|&l| alg.datum.labels[l as usize].clone()).collect::<Vec<_>>().join(",")
        );
        let single = p.terms.len() == 1;
        let coef = if p == Poly::one(n) {
            String::new()
        } else if p == Poly::one(n).scale(&-Q::one()) {
            "-".into()
        } else if single {
            format!("{} ", p.render(&nref))
        } else {
            format!("({}) ", p.render(&nref))
        };
        let body = if taus.is_empty() {
            format!("{}{}", coef, idem)
        } else if coef.is_empty() || coef == "-" {
            format!("{}{} {}", coef, taus.join("*"), idem)
        } else {
            format!("{}*{}{}", taus.join("*"), coef, idem)
        };
        parts.push(body);
    }
    let mut s = String::new();
    for (k, p) in parts.iter().enumerate() {
        if k == 0 {
            s.push_str(p);
        } else if let Some(rest) = p.strip_prefix('-') {
            s.push_str(" - ");
            s.push_str(rest);
        } else {
            s.push_str(" + ");
            s.push_str(p);
        }
    }
    s
}

pub fn reduce_mod_p(e: &Elem, p: u64) -> Elem {
    use num_bigint::BigInt;
    let pb = BigInt::from(p);
    let mut r = Elem::zero();
    for (t, c) in &e.terms {
        let inv_den = {
            let d = ((c.denom() % &pb) + &pb) % &pb;
            d.modpow(&(&pb - BigInt::from(2)), &pb)
        };
        let v = ((c.numer() % &pb + &pb) % &pb * inv_den) % &pb;
        r.add_term(t.clone(), Q::from_integer(v));
    }
    r
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    alg: &'a Alg,
    n: usize,
    content: Vec<i64>,
}

fn perr(pos: usize, msg: &str) -> KlrError {
    KlrError::Parse { pos, msg: msg.to_string() }
}

impl<'a> Parser<'a> {
    fn ws(&mut self) {
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).cloned()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<u64> {
        self.ws();
        let st = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if st == self.pos {
            return Err(perr(st, "expected number"));
        }
        std::str::from_utf8(&self.s[st..self.pos]).unwrap().parse().map_err(|_| perr(st, "bad number"))
    }

    fn ident(&mut self) -> String {
        self.ws();
        let st = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_ascii_alphabetic() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[st..self.pos]).to_string()
    }

    fn expr(&mut self) -> Result<Elem> {
        let mut acc = self.product()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.product()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.product()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<Elem> {
        let mut factors: Vec<Factor> = vec![self.factor()?];
        while self.eat(b'*') {
            factors.push(self.factor()?);
        }
        let mut cur = self.alg.identity(&self.content);
        for f in factors.into_iter().rev() {
            cur = match f {
                Factor::G(g) => self.alg.apply_gen(&g, &cur)?,
                Factor::Sub(e) => self.alg.mul(&e, &cur)?,
            };
        }
        Ok(cur)
    }

    fn factor(&mut self) -> Result<Factor> {
        let st = {
            self.ws();
            self.pos
        };
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(perr(self.pos, "expected ')'"));
                }
                Ok(Factor::Sub(e))
            }
            Some(b'-') => {
                self.pos += 1;
                match self.factor()? {
                    Factor::G(g) => Ok(Factor::Sub(self.alg.apply_gen(&g, &self.alg.identity(&self.content))?.scale(&-Q::one()))),
                    Factor::Sub(e) => Ok(Factor::Sub(e.scale(&-Q::one()))),
                }
            }
            Some(c) if c.is_ascii_digit() => {
                let a = self.number()?;
                let mut v = Q::from_integer(a.into());
                if self.eat(b'/') {
                    let d = self.number()?;
                    if d == 0 {
                        return Err(perr(self.pos, "division by zero"));
                    }
                    v /= Q::from_integer(d.into());
                }
                Ok(Factor::G(Gen::Scalar(v)))
            }
            Some(_) => {
                let name = self.ident();
                if !self.eat(b'(') {
                    return Err(perr(self.pos, "expected '('"));
                }
                let g = match name.as_str() {
                    "e" => {
                        let mut nu = Vec::new();
                        loop {
                            self.ws();
                            let s0 = self.pos;
                            while self.pos < self.s.len() && !matches!(self.s[self.pos], b',' | b')') {
                                self.pos += 1;
                            }
                            let lab = String::from_utf8_lossy(&self.s[s0..self.pos]).trim().to_string();
                            let idx = self.alg.datum.index_of(&lab).map_err(|_| perr(s0, "unknown index"))?;
                            nu.push(idx as u8);
                            if self.eat(b',') {
                                continue;
                            }
                            break;
                        }
                        if nu.len() != self.n || self.alg.datum.content(&nu) != self.content {
                            return Err(KlrError::WeightMismatch(format!("idempotent at {} outside the weight block", st)));
                        }
                        Gen::E(nu)
                    }
                    "x" | "tau" => {
                        let k = self.number()? as usize;
                        let lim = if name == "x" { self.n } else { self.n.saturating_sub(1) };
                        if k == 0 || k > lim {
                            return Err(KlrError::WeightMismatch(format!("generator index {} exceeds height", k)));
                        }
                        if name == "x" {
                            Gen::X(k - 1)
                        } else {
                            Gen::T(k - 1)
                        }
                    }
                    _ => return Err(perr(st, "unknown generator")),
                };
                if !self.eat(b')') {
                    return Err(perr(self.pos, "expected ')'"));
                }
                if self.eat(b'^') {
                    let p = self.number()?;
                    let Gen::X(k) = g else { return Err(perr(self.pos, "only x may be raised to a power")) };
                    let mut e = vec![0u32; self.n];
                    e[k] = p as u32;
                    return Ok(Factor::G(Gen::P(Poly::monomial(e, Q::one()))));
                }
                Ok(Factor::G(g))
            }
            None => Err(perr(self.pos, "unexpected end of input")),
        }
    }
}

enum Factor {
    G(Gen),
    Sub(Elem),
}

/// parse and normalize an expression such as `e(1,2) * tau(1) * x(2)^3`
pub fn normal_form(alg: &Alg, expr: &str, content: &[i64]) -> Result<Elem> {
    reset_fuel();
    let n: i64 = content.iter().sum();
    let mut p = Parser { s: expr.as_bytes(), pos: 0, alg, n: n as usize, content: content.to_vec() };
    if p.peek().is_none() {
        return Ok(alg.identity(content));
    }
    let r = p.expr();
    let r = match r {
        Err(KlrError::InternalRewriteFuel) => {
            alg.clear_caches();
            return Err(KlrError::InternalRewriteFuel);
        }
        other => other?,
    };
    if p.peek().is_some() {
        return Err(perr(p.pos, "trailing input"));
    }
    Ok(r)
}

pub fn multiply(alg: &Alg, a: &Elem, b: &Elem) -> Result<Elem> {
    reset_fuel();
    if let (Some(x), Some(y)) = (a.height(), b.height()) {
        if x != y {
            return Err(KlrError::WeightMismatch("factors of different height".into()));
        }
        let ca = alg.datum.content(&a.terms.keys().next().unwrap().nu);
        let cb = alg.datum.content(&b.terms.keys().next().unwrap().nu);
        if ca != cb {
            return Err(KlrError::WeightMismatch("factors of different weight".into()));
        }
    }
    alg.mul(a, b).map_err(|e| {
        if matches!(e, KlrError::InternalRewriteFuel) {
            alg.clear_caches();
        }
        e
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::preset;

    #[test]
    fn tau_squared_unequal() {
        let alg = Alg::canonical(&preset("A2").unwrap());
        let e = normal_form(&alg, "tau(1)*tau(1)*e(1,2)", &[1, 1]).unwrap();
        assert_eq!(render(&alg, &e), "(x1+x2) e(1,2)");
    }

    #[test]
    fn x_tau_commutation() {
        let alg = Alg::canonical(&preset("A1").unwrap());
        let a = normal_form(&alg, "tau(1)*x(1)*e(1,1)", &[2]).unwrap();
        let b = normal_form(&alg, "x(2)*tau(1)*e(1,1) - e(1,1)", &[2]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn divided_q_t2() {
        let a2 = preset("A2").unwrap();
        let p = default_qparams(&a2);
        let d = divided_q(&p, 0, 1, 2);
        assert_eq!(d, Poly::one(3));
    }
}
