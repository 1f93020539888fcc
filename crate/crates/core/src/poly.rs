use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::linalg::{fmt_q, q, Q};

/// Laurent polynomial in q^{1/2}; keys are exponents of q^{1/2}.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Laurent(pub BTreeMap<i64, i64>);

impl Laurent {
    pub fn zero() -> Laurent {
        Laurent(BTreeMap::new())
    }

    pub fn mono(e: i64, c: i64) -> Laurent {
        let mut l = Laurent::zero();
        l.add_term(e, c);
        l
    }

    pub fn add_term(&mut self, e: i64, c: i64) {
        if c == 0 {
            return;
        }
        let v = self.0.entry(e).or_insert(0);
        *v += c;
        if *v == 0 {
            self.0.remove(&e);
        }
    }

    pub fn add(&self, o: &Laurent) -> Laurent {
        let mut r = self.clone();
        for (&e, &c) in &o.0 {
            r.add_term(e, c);
        }
        r
    }

    pub fn neg(&self) -> Laurent {
        Laurent(self.0.iter().map(|(&e, &c)| (e, -c)).collect())
    }

    pub fn sub(&self, o: &Laurent) -> Laurent {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Laurent) -> Laurent {
        let mut r = Laurent::zero();
        for (&e, &c) in &self.0 {
            for (&f, &d) in &o.0 {
                r.add_term(e + f, c * d);
            }
        }
        r
    }

    pub fn shift(&self, s: i64) -> Laurent {
        Laurent(self.0.iter().map(|(&e, &c)| (e + s, c)).collect())
    }

    pub fn bar(&self) -> Laurent {
        Laurent(self.0.iter().map(|(&e, &c)| (-e, c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn at_one(&self) -> i64 {
        self.0.values().sum()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.0.keys().next().cloned()
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&e, &c) in &self.0 {
            let sign = if c < 0 { "-" } else if first { "" } else { "+" };
            let a = c.abs();
            let qpart = match e {
                0 => String::new(),
                _ if e % 2 == 0 => format!("q^{}", e / 2),
                _ => format!("q^{}/2", e),
            };
            if qpart.is_empty() {
                write!(f, "{}{}", sign, a)?;
            } else if a == 1 {
                write!(f, "{}{}", sign, qpart)?;
            } else {
                write!(f, "{}{}{}", sign, a, qpart)?;
            }
            first = false;
        }
        Ok(())
    }
}

/// Multivariate polynomial over Q with a fixed number of variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Poly {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Poly {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Poly {
        Poly::constant(nvars, Q::one())
    }

    pub fn var(nvars: usize, i: usize) -> Poly {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Poly::zero(nvars);
        p.add_term(e, Q::one());
        p
    }

    pub fn monomial(exps: Vec<u32>, c: Q) -> Poly {
        let mut p = Poly::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        let v = self.terms.entry(e.clone()).or_insert_with(Q::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), -c.clone());
        }
        r
    }

    pub fn scale(&self, a: &Q) -> Poly {
        if a.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * a)).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            for (f, d) in &o.terms {
                let g: Vec<u32> = e.iter().zip(f).map(|(a, b)| a + b).collect();
                r.add_term(g, c * d);
            }
        }
        r
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut r = Poly::one(self.nvars);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// substitute polynomials (all in `target_nvars` variables) for each variable
    pub fn subs(&self, vals: &[Poly], target_nvars: usize) -> Poly {
        let mut r = Poly::zero(target_nvars);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(target_nvars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&vals[i].pow(k));
                }
            }
            r = r.add(&t);
        }
        r
    }

    pub fn swap_vars(&self, i: usize, j: usize) -> Poly {
        let mut r = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut f = e.clone();
            f.swap(i, j);
            r.add_term(f, c.clone());
        }
        r
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[i]).max()
    }

    pub fn constant_term(&self) -> Q {
        self.terms.get(&vec![0; self.nvars]).cloned().unwrap_or_else(Q::zero)
    }

    /// exact quotient by (x_i - x_j); None when not divisible
    pub fn div_linear(&self, i: usize, j: usize) -> Option<Poly> {
        let mut quo = Poly::zero(self.nvars);
        let mut rem = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e[i];
            // x_i^k = (x_i - x_j)(x_i^{k-1} + ... + x_j^{k-1}) + x_j^k
            for t in 0..k {
                let mut f = e.clone();
                f[i] = k - 1 - t;
                f[j] += t;
                quo.add_term(f, c.clone());
            }
            let mut f = e.clone();
            f[i] = 0;
            f[j] += k;
            rem.add_term(f, c.clone());
        }
        if rem.is_zero() {
            Some(quo)
        } else {
            None
        }
    }

    pub fn leading(&self) -> Option<(&Vec<u32>, &Q)> {
        self.terms.iter().next_back()
    }

    /// divide by the lexicographically first coefficient
    pub fn normalized(&self) -> (Poly, Q) {
        match self.terms.iter().next() {
            None => (self.clone(), Q::one()),
            Some((_, c)) => {
                let c = c.clone();
                (self.scale(&c.recip()), c)
            }
        }
    }

    pub fn render(&self, names: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        // higher degree monomials first, reads like x1+x2
        let mut items: Vec<_> = self.terms.iter().collect();
        items.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then(b.0.cmp(a.0))
        });
        for (k, (e, c)) in items.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k > 0 {
                s.push_str(if neg { "-" } else { "+" });
            } else if neg {
                s.push('-');
            }
            let mut mono = Vec::new();
            for (i, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => mono.push(names[i].to_string()),
                    _ => mono.push(format!("{}^{}", names[i], p)),
                }
            }
            if mono.is_empty() {
                s.push_str(&fmt_q(&a));
            } else {
                if !a.is_one() {
                    s.push_str(&fmt_q(&a));
                    s.push('*');
                }
                s.push_str(&mono.join("*"));
            }
        }
        s
    }
}

// ---- univariate helpers over Q, coefficient vectors low to high ----

fn trim(p: &mut Vec<Q>) {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
}

fn uni_rem(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lb = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1 - db;
        let f = r.last().unwrap() / &lb;
        for (t, c) in b.iter().enumerate() {
            r[k + t] -= &f * c;
        }
        trim(&mut r);
    }
    r
}

pub fn uni_gcd(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = uni_rem(&a, &b);
        a = b;
        b = r;
    }
    if let Some(l) = a.last().cloned() {
        a = a.iter().map(|c| c / &l).collect();
    }
    a
}

fn uni_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut r = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            r[i + j] += x * y;
        }
    }
    trim(&mut r);
    r
}

fn uni_div_exact(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r = a.to_vec();
    trim(&mut r);
    if r.is_empty() {
        return r;
    }
    let db = b.len() - 1;
    let mut quo = vec![Q::zero(); r.len().saturating_sub(db).max(1)];
    let lb = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1 - db;
        let f = r.last().unwrap() / &lb;
        for (t, c) in b.iter().enumerate() {
            r[k + t] -= &f * c;
        }
        quo[k] = f;
        trim(&mut r);
    }
    assert!(r.is_empty(), "inexact univariate division");
    trim(&mut quo);
    quo
}

/// bivariate view: outer variable `v`, coefficients univariate in `u`
fn to_bi(p: &Poly, u: usize, v: usize) -> Vec<Vec<Q>> {
    let dv = p.degree_in(v).unwrap_or(0) as usize;
    let du = p.degree_in(u).unwrap_or(0) as usize;
    let mut out = vec![vec![Q::zero(); du + 1]; dv + 1];
    for (e, c) in &p.terms {
        out[e[v] as usize][e[u] as usize] += c;
    }
    for c in out.iter_mut() {
        trim(c);
    }
    while out.last().map_or(false, |c| c.is_empty()) {
        out.pop();
    }
    out
}

fn from_bi(b: &[Vec<Q>], u: usize, v: usize, nvars: usize) -> Poly {
    let mut p = Poly::zero(nvars);
    for (j, c) in b.iter().enumerate() {
        for (i, x) in c.iter().enumerate() {
            let mut e = vec![0; nvars];
            e[u] = i as u32;
            e[v] = j as u32;
            p.add_term(e, x.clone());
        }
    }
    p
}

fn bi_content(b: &[Vec<Q>]) -> Vec<Q> {
    let mut g: Vec<Q> = vec![];
    for c in b {
        g = if g.is_empty() { uni_gcd(c, c) } else { uni_gcd(&g, c) };
    }
    g
}

fn bi_prim(b: &[Vec<Q>]) -> (Vec<Q>, Vec<Vec<Q>>) {
    let c = bi_content(b);
    if c.is_empty() {
        return (c, b.to_vec());
    }
    let p = b.iter().map(|x| if x.is_empty() { vec![] } else { uni_div_exact(x, &c) }).collect();
    (c, p)
}

/// pseudo-remainder of a by b in the outer variable
fn bi_prem(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lb = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1 - db;
        let lr = r.last().unwrap().clone();
        for c in r.iter_mut() {
            *c = uni_mul(c, &lb);
        }
        for (t, c) in b.iter().enumerate() {
            let prod = uni_mul(c, &lr);
            let mut s = r[k + t].clone();
            s.resize(s.len().max(prod.len()), Q::zero());
            for (i, x) in prod.iter().enumerate() {
                s[i] -= x;
            }
            trim(&mut s);
            r[k + t] = s;
        }
        while r.last().map_or(false, |c| c.is_empty()) {
            r.pop();
        }
    }
    r
}

/// gcd of two polynomials involving only variables u and v, monic-normalized on its lex-first term
pub fn gcd2(a: &Poly, b: &Poly, u: usize, v: usize) -> Poly {
    let nv = a.nvars;
    if a.is_zero() {
        return b.normalized().0;
    }
    if b.is_zero() {
        return a.normalized().0;
    }
    let (ca, pa) = bi_prim(&to_bi(a, u, v));
    let (cb, pb) = bi_prim(&to_bi(b, u, v));
    let c = uni_gcd(&ca, &cb);
    let (mut x, mut y) = if pa.len() >= pb.len() { (pa, pb) } else { (pb, pa) };
    while !y.is_empty() {
        let r = bi_prem(&x, &y);
        x = y;
        y = if r.is_empty() { r } else { bi_prim(&r).1 };
    }
    let g: Vec<Vec<Q>> = x.iter().map(|xc| uni_mul(xc, &c)).collect();
    from_bi(&g, u, v, nv).normalized().0
}

/// exact division of bivariate polynomials; None if not divisible
pub fn div2(a: &Poly, b: &Poly, u: usize, v: usize) -> Option<Poly> {
    let nv = a.nvars;
    let mut r = a.clone();
    let mut quo = Poly::zero(nv);
    // lex order on (v, u) exponents
    let key = |e: &Vec<u32>| (e[v], e[u]);
    let lead = |p: &Poly| p.terms.iter().max_by_key(|(e, _)| key(e)).map(|(e, c)| (e.clone(), c.clone()));
    let (lb, cb) = lead(b)?;
    while let Some((lr, cr)) = lead(&r) {
        if lr[u] < lb[u] || lr[v] < lb[v] {
            return None;
        }
        let mut e = vec![0; nv];
        e[u] = lr[u] - lb[u];
        e[v] = lr[v] - lb[v];
        let t = Poly::monomial(e, cr / &cb);
        r = r.sub(&t.mul(b));
        quo = quo.add(&t);
    }
    Some(quo)
}

/// integer content normalization helper for display
pub fn primitive_int(p: &Poly) -> Poly {
    let mut g = num_bigint::BigInt::zero();
    let mut l = num_bigint::BigInt::one();
    for c in p.terms.values() {
        g = g.gcd(c.numer());
        l = l.lcm(c.denom());
    }
    if g.is_zero() {
        return p.clone();
    }
    p.scale(&(Q::from_integer(l) / Q::from_integer(g)))
}

pub fn qpoly(nvars: usize, terms: &[(&[u32], i64)]) -> Poly {
    let mut p = Poly::zero(nvars);
    for (e, c) in terms {
        p.add_term(e.to_vec(), q(*c));
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divided_difference() {
        // (u^2 - w^2)/(u - w) = u + w
        let p = qpoly(2, &[(&[2, 0], 1), (&[0, 2], -1)]);
        let d = p.div_linear(0, 1).unwrap();
        assert_eq!(d, qpoly(2, &[(&[1, 0], 1), (&[0, 1], 1)]));
        assert!(qpoly(2, &[(&[1, 0], 1)]).div_linear(0, 1).is_none());
    }

    #[test]
    fn gcd_of_products() {
        let zmw = qpoly(2, &[(&[1, 0], 1), (&[0, 1], -1)]);
        let zpw = qpoly(2, &[(&[1, 0], 1), (&[0, 1], 1)]);
        let z = Poly::var(2, 0);
        let a = zmw.mul(&zpw).mul(&z);
        let b = zmw.mul(&z).mul(&z);
        let g = gcd2(&a, &b, 0, 1);
        assert_eq!(g, zmw.mul(&z).normalized().0);
        assert_eq!(div2(&a, &g, 0, 1).unwrap().mul(&g), a);
    }

    #[test]
    fn laurent_ops() {
        let a = Laurent::mono(0, 1).add(&Laurent::mono(4, 1));
        assert_eq!(a.at_one(), 2);
        assert_eq!(a.bar().min_exp(), Some(-4));
        assert_eq!(format!("{}", a), "1+q^2");
    }
}
