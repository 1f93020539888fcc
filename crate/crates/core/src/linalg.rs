use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;
pub type SVec = BTreeMap<usize, Q>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        if b.is_zero() {
            return None;
        }
        Some(Q::new(a, b))
    } else {
        Some(Q::from_integer(s.parse().ok()?))
    }
}

pub fn axpy(y: &mut SVec, a: &Q, x: &SVec) {
    if a.is_zero() {
        return;
    }
    for (&i, v) in x {
        let e = y.entry(i).or_insert_with(Q::zero);
        *e += a * v;
        if e.is_zero() {
            y.remove(&i);
        }
    }
}

pub fn scale(x: &SVec, a: &Q) -> SVec {
    if a.is_zero() {
        return SVec::new();
    }
    x.iter().map(|(&i, v)| (i, v * a)).collect()
}

pub fn unit(i: usize) -> SVec {
    let mut v = SVec::new();
    v.insert(i, Q::one());
    v
}

/// Sparse matrix stored by columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SMat {
    pub rows: usize,
    pub cols: Vec<SVec>,
}

impl SMat {
    pub fn zero(rows: usize, ncols: usize) -> SMat {
        SMat { rows, cols: vec![SVec::new(); ncols] }
    }

    pub fn identity(n: usize) -> SMat {
        SMat { rows: n, cols: (0..n).map(unit).collect() }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn from_cols(rows: usize, cols: Vec<SVec>) -> SMat {
        SMat { rows, cols }
    }

    pub fn get(&self, r: usize, c: usize) -> Q {
        self.cols[c].get(&r).cloned().unwrap_or_else(Q::zero)
    }

    pub fn set(&mut self, r: usize, c: usize, v: Q) {
        if v.is_zero() {
            self.cols[c].remove(&r);
        } else {
            self.cols[c].insert(r, v);
        }
    }

    pub fn apply(&self, v: &SVec) -> SVec {
        let mut out = SVec::new();
        for (&j, a) in v {
            axpy(&mut out, a, &self.cols[j]);
        }
        out
    }

    /// self * other
    pub fn mul(&self, other: &SMat) -> SMat {
        SMat { rows: self.rows, cols: other.cols.iter().map(|c| self.apply(c)).collect() }
    }

    pub fn add(&self, other: &SMat) -> SMat {
        let mut out = self.clone();
        for (j, c) in other.cols.iter().enumerate() {
            axpy(&mut out.cols[j], &Q::one(), c);
        }
        out
    }

    pub fn sub(&self, other: &SMat) -> SMat {
        let mut out = self.clone();
        for (j, c) in other.cols.iter().enumerate() {
            axpy(&mut out.cols[j], &-Q::one(), c);
        }
        out
    }

    pub fn scaled(&self, a: &Q) -> SMat {
        SMat { rows: self.rows, cols: self.cols.iter().map(|c| scale(c, a)).collect() }
    }

    pub fn transpose(&self) -> SMat {
        let mut out = SMat::zero(self.ncols(), self.rows);
        for (j, c) in self.cols.iter().enumerate() {
            for (&i, v) in c {
                out.cols[i].insert(j, v.clone());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_empty())
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    pub fn rank(&self) -> usize {
        let mut e = Echelon::new();
        for c in &self.cols {
            e.insert(c.clone());
        }
        e.rank()
    }

    /// rows/cols restricted and renumbered
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SMat {
        let mut pos = BTreeMap::new();
        for (k, &r) in rows.iter().enumerate() {
            pos.insert(r, k);
        }
        let cols = cols
            .iter()
            .map(|&c| self.cols[c].iter().filter_map(|(r, v)| pos.get(r).map(|&k| (k, v.clone()))).collect())
            .collect();
        SMat { rows: rows.len(), cols }
    }
}

/// Incrementally maintained fully reduced row echelon basis of a subspace.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    /// pivot -> vector with coefficient 1 at pivot, zero at other pivots
    pub rows: BTreeMap<usize, SVec>,
}

impl Echelon {
    pub fn new() -> Echelon {
        Echelon { rows: BTreeMap::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn reduce(&self, v: &SVec) -> SVec {
        let mut v = v.clone();
        let pivots: Vec<usize> = v.keys().filter(|k| self.rows.contains_key(k)).cloned().collect();
        for p in pivots {
            if let Some(a) = v.get(&p).cloned() {
                axpy(&mut v, &-a, &self.rows[&p]);
            }
        }
        v
    }

    pub fn contains(&self, v: &SVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// returns true if the vector enlarged the span
    pub fn insert(&mut self, v: SVec) -> bool {
        let r = self.reduce(&v);
        let Some((&p, a)) = r.iter().next() else { return false };
        let inv = a.recip();
        let r = scale(&r, &inv);
        for row in self.rows.values_mut() {
            if let Some(b) = row.get(&p).cloned() {
                axpy(row, &-b, &r);
            }
        }
        self.rows.insert(p, r);
        true
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.keys().cloned().collect()
    }

    pub fn basis(&self) -> Vec<SVec> {
        self.rows.values().cloned().collect()
    }
}

/// Echelon that also expresses reduced vectors in terms of the inserted originals.
#[derive(Clone, Debug, Default)]
pub struct TrackedSpan {
    rows: BTreeMap<usize, (SVec, SVec)>,
    count: usize,
}

impl TrackedSpan {
    pub fn new() -> TrackedSpan {
        TrackedSpan::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce_full(&self, v: &SVec) -> (SVec, SVec) {
        let mut v = v.clone();
        let mut comb = SVec::new();
        loop {
            let p = v.keys().find(|k| self.rows.contains_key(k)).cloned();
            let Some(p) = p else { break };
            let a = v[&p].clone();
            let (row, rc) = &self.rows[&p];
            axpy(&mut v, &-a.clone(), row);
            axpy(&mut comb, &a, rc);
        }
        (v, comb)
    }

    /// inserts; returns the index given to the vector if it was independent
    pub fn insert(&mut self, v: &SVec) -> Option<usize> {
        let (r, comb) = self.reduce_full(v);
        let idx = self.count;
        self.count += 1;
        let Some((&p, a)) = r.iter().next() else { return None };
        let inv = a.recip();
        // r = v - comb, so r/a expresses as (e_idx - comb)/a
        let mut rc = scale(&comb, &-inv.clone());
        rc.insert(idx, inv.clone());
        let r = scale(&r, &inv);
        self.rows.insert(p, (r, rc));
        Some(idx)
    }

    /// coefficients over inserted independent vectors, or None if outside the span
    pub fn coords(&self, v: &SVec) -> Option<SVec> {
        let (r, comb) = self.reduce_full(v);
        if r.is_empty() {
            Some(comb)
        } else {
            None
        }
    }
}

/// Basis of {y : A y = 0} where A is given by its rows.
pub fn nullspace(rows: &[SVec], ncols: usize) -> Vec<SVec> {
    let mut e = Echelon::new();
    for r in rows {
        e.insert(r.clone());
    }
    let pivots = e.rows.clone();
    let mut out = Vec::new();
    for f in 0..ncols {
        if pivots.contains_key(&f) {
            continue;
        }
        let mut v = unit(f);
        for (&p, row) in &pivots {
            if let Some(a) = row.get(&f) {
                v.insert(p, -a.clone());
            }
        }
        out.push(v);
    }
    out
}

pub fn dense_to_svec(v: &[Q]) -> SVec {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect()
}
