use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::cartan::GradeAssociator;
use crate::error::{KlrError, Result};
use crate::linalg::{axpy, fmt_q, q, scale, unit, Echelon, SMat, SVec, TrackedSpan, Q};
use crate::perm::{self, Perm};
use crate::poly::{Laurent, Poly};
use crate::qha::{same_algebra, Alg, Elem, Term};

/// A commuting endomorphism (spectral parameter of an affinization).
#[derive(Clone, Debug)]
pub struct Endo {
    pub var: usize,
    /// doubled degree
    pub deg: i64,
    pub mat: SMat,
}

/// Basis vector b = (monomial in vars) * generator.
#[derive(Clone, Debug)]
pub struct FreeData {
    pub vars: Vec<usize>,
    pub gens: usize,
    pub of: Vec<(usize, Vec<u32>)>,
}

#[derive(Clone, Debug)]
pub struct IndData {
    pub parent: Arc<Module>,
    pub shuffles: Vec<Perm>,
    pub of: Vec<(usize, usize)>,
}

/// Finite-dimensional graded module over a (parabolic subalgebra of a) quiver Hecke algebra.
/// Degrees are stored doubled.
#[derive(Clone, Debug)]
pub struct Module {
    pub alg: Arc<Alg>,
    pub blocks: Vec<usize>,
    pub words: Vec<Vec<u8>>,
    pub degs: Vec<i64>,
    pub x: Vec<SMat>,
    pub tau: Vec<Option<SMat>>,
    pub ends: Vec<Endo>,
    pub free: Option<FreeData>,
    pub ind: Option<Arc<IndData>>,
    pub label: String,
}

pub type Character = BTreeMap<Vec<u8>, Laurent>;

fn kron_left(a: &SMat, m: usize) -> SMat {
    // a ⊗ I_m with index (i, j) -> i*m + j
    let n = a.ncols();
    let mut cols = Vec::with_capacity(n * m);
    for c in 0..n {
        for j in 0..m {
            let col: SVec = a.cols[c].iter().map(|(&r, v)| (r * m + j, v.clone())).collect();
            cols.push(col);
        }
    }
    SMat { rows: a.rows * m, cols }
}

fn kron_right(m: usize, b: &SMat) -> SMat {
    // I_m ⊗ b
    let n = b.ncols();
    let mut cols = Vec::with_capacity(n * m);
    for i in 0..m {
        for c in 0..n {
            let col: SVec = b.cols[c].iter().map(|(&r, v)| (i * b.rows + r, v.clone())).collect();
            cols.push(col);
        }
    }
    SMat { rows: b.rows * m, cols }
}

impl Module {
    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn height(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_ordinary(&self) -> bool {
        self.blocks.len() <= 1
    }

    pub fn content(&self) -> Option<Vec<i64>> {
        self.words.first().map(|w| self.alg.datum.content(w))
    }

    pub fn zero_module(alg: &Arc<Alg>, n: usize) -> Module {
        Module {
            alg: alg.clone(),
            blocks: vec![n],
            words: vec![],
            degs: vec![],
            x: (0..n).map(|_| SMat::zero(0, 0)).collect(),
            tau: (0..n.saturating_sub(1)).map(|_| Some(SMat::zero(0, 0))).collect(),
            ends: vec![],
            free: None,
            ind: None,
            label: "0".into(),
        }
    }

    /// the trivial module of R(0)
    pub fn unit(alg: &Arc<Alg>) -> Module {
        Module {
            alg: alg.clone(),
            blocks: vec![0],
            words: vec![vec![]],
            degs: vec![0],
            x: vec![],
            tau: vec![],
            ends: vec![],
            free: None,
            ind: None,
            label: "1".into(),
        }
    }

    /// L(i) = R(alpha_i)/x_1
    pub fn simple_letter(alg: &Arc<Alg>, i: usize) -> Module {
        Module {
            alg: alg.clone(),
            blocks: vec![1],
            words: vec![vec![i as u8]],
            degs: vec![0],
            x: vec![SMat::zero(1, 1)],
            tau: vec![],
            ends: vec![],
            free: None,
            ind: None,
            label: format!("<{}>", alg.datum.labels[i]),
        }
    }

    /// k[x_1]/x_1^n with z = x_1
    pub fn letter_affine(alg: &Arc<Alg>, i: usize, n: usize, var: usize) -> Module {
        let d = alg.xdeg(i as u8);
        let mut x = SMat::zero(n, n);
        for a in 0..n.saturating_sub(1) {
            x.set(a + 1, a, Q::one());
        }
        Module {
            alg: alg.clone(),
            blocks: vec![1],
            words: vec![vec![i as u8]; n],
            degs: (0..n).map(|a| 2 * d * a as i64).collect(),
            x: vec![x.clone()],
            tau: vec![],
            ends: vec![Endo { var, deg: 2 * d, mat: x }],
            free: Some(FreeData { vars: vec![var], gens: 1, of: (0..n).map(|a| (0, vec![a as u32])).collect() }),
            ind: None,
            label: format!("<{}>_z", alg.datum.labels[i]),
        }
    }

    pub fn with_label(mut self, s: &str) -> Module {
        self.label = s.to_string();
        self
    }

    /// q^s M, with s doubled
    pub fn shift(&self, s2: i64) -> Module {
        let mut m = self.clone();
        for d in m.degs.iter_mut() {
            *d += s2;
        }
        if let Some(ind) = &self.ind {
            let mut p = (*ind.parent).clone();
            for d in p.degs.iter_mut() {
                *d += s2;
            }
            m.ind = Some(Arc::new(IndData { parent: Arc::new(p), shuffles: ind.shuffles.clone(), of: ind.of.clone() }));
        }
        m
    }

    pub fn character(&self) -> Character {
        let mut ch = Character::new();
        for (w, &d) in self.words.iter().zip(&self.degs) {
            ch.entry(w.clone()).or_insert_with(Laurent::zero).add_term(d, 1);
        }
        ch
    }

    pub fn slice(&self, nu: &[u8]) -> Vec<usize> {
        (0..self.dim()).filter(|&j| self.words[j] == nu).collect()
    }

    pub fn end_by_var(&self, var: usize) -> Option<&Endo> {
        self.ends.iter().find(|e| e.var == var)
    }

    pub fn apply_x(&self, k: usize, v: &SVec) -> SVec {
        self.x[k].apply(v)
    }

    pub fn apply_tau(&self, l: usize, v: &SVec) -> SVec {
        self.tau[l].as_ref().expect("tau across a block boundary").apply(v)
    }

    pub fn apply_poly(&self, p: &Poly, v: &SVec) -> SVec {
        let mut out = SVec::new();
        for (e, c) in &p.terms {
            let mut cur = v.clone();
            for (k, &m) in e.iter().enumerate() {
                for _ in 0..m {
                    cur = self.apply_x(k, &cur);
                }
            }
            axpy(&mut out, c, &cur);
        }
        out
    }

    /// apply tau_{word}, rightmost letter first
    pub fn apply_word(&self, word: &[u8], v: &SVec) -> SVec {
        let mut cur = v.clone();
        for &l in word.iter().rev() {
            cur = self.apply_tau(l as usize, &cur);
        }
        cur
    }

    pub fn project(&self, nu: &[u8], v: &SVec) -> SVec {
        v.iter().filter(|(&j, _)| self.words[j] == nu).map(|(&j, c)| (j, c.clone())).collect()
    }

    /// action of a normal-form element (terms must be within the parabolic blocks)
    pub fn apply_elem(&self, e: &Elem, v: &SVec) -> SVec {
        let mut out = SVec::new();
        for (t, c) in &e.terms {
            let mut cur = self.project(&t.nu, v);
            if cur.is_empty() {
                continue;
            }
            for (k, &m) in t.a.iter().enumerate() {
                for _ in 0..m {
                    cur = self.apply_x(k, &cur);
                }
            }
            cur = self.apply_word(&perm::canon(&t.w), &cur);
            axpy(&mut out, c, &cur);
        }
        out
    }

    pub fn generators(&self) -> Vec<(String, &SMat)> {
        let mut out = Vec::new();
        for (k, m) in self.x.iter().enumerate() {
            out.push((format!("x{}", k + 1), m));
        }
        for (l, m) in self.tau.iter().enumerate() {
            if let Some(m) = m {
                out.push((format!("tau{}", l + 1), m));
            }
        }
        out
    }

    /// every defining relation as an exact matrix identity; returns the failures
    pub fn check_relations(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let n = self.height();
        let alg = &self.alg;
        for j in 0..self.dim() {
            let nu = &self.words[j];
            let v = unit(j);
            for k in 0..n {
                let xv = self.apply_x(k, &v);
                for (&t, _) in &xv {
                    if self.words[t] != *nu || self.degs[t] != self.degs[j] + 2 * alg.xdeg(nu[k]) {
                        bad.push(format!("x{} grading at {}", k + 1, j));
                    }
                }
                for k2 in k + 1..n {
                    let a = self.apply_x(k2, &xv);
                    let b = self.apply_x(k, &self.apply_x(k2, &v));
                    if a != b {
                        bad.push(format!("x{}x{} commute at {}", k + 1, k2 + 1, j));
                    }
                }
            }
            for l in 0..n.saturating_sub(1) {
                if self.tau[l].is_none() {
                    continue;
                }
                let tv = self.apply_tau(l, &v);
                let snu = perm::swap_word(nu, l);
                for (&t, _) in &tv {
                    if self.words[t] != snu || self.degs[t] != self.degs[j] + 2 * alg.tau_deg(l, nu) {
                        bad.push(format!("tau{} grading at {}", l + 1, j));
                    }
                }
                let tt = self.apply_tau(l, &tv);
                let qv = self.apply_poly(&alg.q_at(nu[l], nu[l + 1], l, l + 1, n), &v);
                if tt != qv {
                    bad.push(format!("tau{}^2 at {}", l + 1, j));
                }
                for k in 0..n {
                    let sk = if k == l {
                        l + 1
                    } else if k == l + 1 {
                        l
                    } else {
                        k
                    };
                    let mut lhs = self.apply_tau(l, &self.apply_x(k, &v));
                    let rhs = self.apply_x(sk, &tv);
                    axpy(&mut lhs, &-Q::one(), &rhs);
                    let c = if nu[l] == nu[l + 1] { (k == l + 1) as i64 - (k == l) as i64 } else { 0 };
                    if lhs != scale(&v, &q(c)) {
                        bad.push(format!("tau{} x{} at {}", l + 1, k + 1, j));
                    }
                }
                for l2 in 0..n - 1 {
                    if (l2 as i64 - l as i64).abs() > 1 && self.tau[l2].is_some() {
                        let a = self.apply_tau(l2, &tv);
                        let b = self.apply_tau(l, &self.apply_tau(l2, &v));
                        if a != b {
                            bad.push(format!("tau{} tau{} at {}", l + 1, l2 + 1, j));
                        }
                    }
                }
                if l + 2 < n && self.tau[l + 1].is_some() {
                    let bab = self.apply_word(&[l as u8 + 1, l as u8, l as u8 + 1], &v);
                    let aba = self.apply_word(&[l as u8, l as u8 + 1, l as u8], &v);
                    let mut d = bab;
                    axpy(&mut d, &-Q::one(), &aba);
                    let expect = if nu[l] == nu[l + 2] {
                        self.apply_poly(&alg.qbar_at(nu[l], nu[l + 1], l, l + 1, l + 2, n), &v)
                    } else {
                        SVec::new()
                    };
                    if d != expect {
                        bad.push(format!("braid {} at {}", l + 1, j));
                    }
                }
            }
            for e in &self.ends {
                let ev = e.mat.apply(&v);
                for (&t, _) in &ev {
                    if self.words[t] != *nu || self.degs[t] != self.degs[j] + e.deg {
                        bad.push(format!("endomorphism grading at {}", j));
                    }
                }
                for (name, g) in self.generators() {
                    if g.apply(&ev) != e.mat.apply(&g.apply(&v)) {
                        bad.push(format!("endomorphism vs {} at {}", name, j));
                    }
                }
            }
        }
        bad
    }

    // ---- constructions ----

    pub fn boxprod(&self, other: &Module) -> Result<Module> {
        if !same_algebra(&self.alg, &other.alg) || self.alg.lam != other.alg.lam {
            return Err(KlrError::AlgebraMismatch);
        }
        let (dm, dn) = (self.dim(), other.dim());
        let (hm, hn) = (self.height(), other.height());
        let mut blocks: Vec<usize> = self.blocks.iter().cloned().filter(|&b| b > 0).collect();
        blocks.extend(other.blocks.iter().cloned().filter(|&b| b > 0));
        if blocks.is_empty() {
            blocks.push(0);
        }
        let mut words = Vec::with_capacity(dm * dn);
        let mut degs = Vec::with_capacity(dm * dn);
        for i in 0..dm {
            for j in 0..dn {
                let mut w = self.words[i].clone();
                w.extend_from_slice(&other.words[j]);
                words.push(w);
                degs.push(self.degs[i] + other.degs[j]);
            }
        }
        let mut x = Vec::new();
        for k in 0..hm {
            x.push(kron_left(&self.x[k], dn));
        }
        for k in 0..hn {
            x.push(kron_right(dm, &other.x[k]));
        }
        let mut tau = Vec::new();
        for l in 0..hm.saturating_sub(1) {
            tau.push(self.tau[l].as_ref().map(|t| kron_left(t, dn)));
        }
        if hm > 0 && hn > 0 {
            tau.push(None);
        }
        for l in 0..hn.saturating_sub(1) {
            tau.push(other.tau[l].as_ref().map(|t| kron_right(dm, t)));
        }
        let mut ends = Vec::new();
        for e in &self.ends {
            ends.push(Endo { var: e.var, deg: e.deg, mat: kron_left(&e.mat, dn) });
        }
        for e in &other.ends {
            ends.push(Endo { var: e.var, deg: e.deg, mat: kron_right(dm, &e.mat) });
        }
        let free = if self.free.is_some() || other.free.is_some() {
            let fa = self.free.clone().unwrap_or(FreeData { vars: vec![], gens: dm, of: (0..dm).map(|i| (i, vec![])).collect() });
            let fb = other.free.clone().unwrap_or(FreeData { vars: vec![], gens: dn, of: (0..dn).map(|i| (i, vec![])).collect() });
            let mut vars = fa.vars.clone();
            vars.extend(fb.vars.iter().cloned());
            let mut of = Vec::with_capacity(dm * dn);
            for i in 0..dm {
                for j in 0..dn {
                    let mut p = fa.of[i].1.clone();
                    p.extend(fb.of[j].1.iter().cloned());
                    of.push((fa.of[i].0 * fb.gens + fb.of[j].0, p));
                }
            }
            Some(FreeData { vars, gens: fa.gens * fb.gens, of })
        } else {
            None
        };
        Ok(Module {
            alg: self.alg.clone(),
            blocks,
            words,
            degs,
            x,
            tau,
            ends,
            free,
            ind: None,
            label: format!("{}⊠{}", self.label, other.label),
        })
    }

    /// R e(blocks) ⊗ P for a parabolic module P
    pub fn induce(&self) -> Result<Module> {
        let p = self;
        let alg = &p.alg;
        let n = p.height();
        if p.blocks.len() <= 1 {
            let mut m = p.clone();
            m.blocks = vec![n];
            return Ok(m);
        }
        let blocks = p.blocks.clone();
        let shuffles = perm::shuffles(&blocks);
        let sidx: HashMap<Perm, usize> = shuffles.iter().cloned().enumerate().map(|(a, b)| (b, a)).collect();
        let dp = p.dim();
        let dim = shuffles.len() * dp;
        let mut words = Vec::with_capacity(dim);
        let mut degs = Vec::with_capacity(dim);
        let mut of = Vec::with_capacity(dim);
        for (s, sh) in shuffles.iter().enumerate() {
            for j in 0..dp {
                let nu = &p.words[j];
                words.push(perm::act(sh, nu));
                let d = alg.deg_term(&Term { w: sh.clone(), a: vec![0; n], nu: nu.clone() });
                degs.push(p.degs[j] + 2 * d);
                of.push((s, j));
            }
        }
        let idx = |s: usize, j: usize| s * dp + j;
        let mut decomp_memo: HashMap<(Perm, Vec<u8>), Vec<(usize, Elem)>> = HashMap::new();
        let distinct_words: BTreeSet<Vec<u8>> = p.words.iter().cloned().collect();
        let mut x = Vec::new();
        let mut tau = Vec::new();
        for g in 0..(2 * n).saturating_sub(1) {
            let is_x = g < n;
            let mut cols = vec![SVec::new(); dim];
            for (s, sh) in shuffles.iter().enumerate() {
                for nu in &distinct_words {
                    let base = Elem::term(Term { w: sh.clone(), a: vec![0; n], nu: nu.clone() }, Q::one());
                    let e = if is_x { alg.x_left(g, &base)? } else { alg.tau_left(g - n, &base)? };
                    // collect (shuffle, parabolic element)
                    let mut ops: BTreeMap<usize, Elem> = BTreeMap::new();
                    for (t, c) in &e.terms {
                        for (s2, pe) in decompose(alg, &t.w, nu, &blocks, &sidx, &mut decomp_memo)? {
                            ops.entry(s2).or_default().add_scaled(&pe.times_x(&t.a), c);
                        }
                    }
                    for j in p.slice(nu) {
                        let mut col = SVec::new();
                        for (&s2, pe) in &ops {
                            let v = p.apply_elem(pe, &unit(j));
                            for (&r, c) in &v {
                                col.insert(idx(s2, r), c.clone());
                            }
                        }
                        cols[idx(s, j)] = col;
                    }
                }
            }
            let m = SMat { rows: dim, cols };
            if is_x {
                x.push(m);
            } else {
                tau.push(Some(m));
            }
        }
        let ends = p
            .ends
            .iter()
            .map(|e| {
                let mut cols = vec![SVec::new(); dim];
                for s in 0..shuffles.len() {
                    for j in 0..dp {
                        cols[idx(s, j)] = e.mat.cols[j].iter().map(|(&r, c)| (idx(s, r), c.clone())).collect();
                    }
                }
                Endo { var: e.var, deg: e.deg, mat: SMat { rows: dim, cols } }
            })
            .collect();
        let free = p.free.as_ref().map(|f| FreeData {
            vars: f.vars.clone(),
            gens: shuffles.len() * f.gens,
            of: of.iter().map(|&(s, j)| (s * f.gens + f.of[j].0, f.of[j].1.clone())).collect(),
        });
        Ok(Module {
            alg: alg.clone(),
            blocks: vec![n],
            words,
            degs,
            x,
            tau,
            ends,
            free,
            ind: Some(Arc::new(IndData { parent: Arc::new(p.clone()), shuffles, of })),
            label: format!("Ind({})", p.label),
        })
    }

    pub fn convolution(&self, other: &Module) -> Result<Module> {
        let mut m = self.boxprod(other)?.induce()?;
        m.label = format!("{}∘{}", self.label, other.label);
        Ok(m)
    }

    pub fn convolve_all(ms: &[&Module]) -> Result<Module> {
        let mut p = ms[0].clone();
        for m in &ms[1..] {
            p = p.boxprod(m)?;
        }
        let mut out = p.induce()?;
        out.label = ms.iter().map(|m| m.label.clone()).collect::<Vec<_>>().join("∘");
        Ok(out)
    }

    /// restriction to the basis vectors in `keep`, with generators renumbered by `xmap`/`tmap`
    fn restrict_to(&self, keep: &[usize], words: Vec<Vec<u8>>, blocks: Vec<usize>, xmap: &[usize], tmap: &[Option<usize>]) -> Module {
        let x = xmap.iter().map(|&k| self.x[k].submatrix(keep, keep)).collect();
        let tau = tmap
            .iter()
            .map(|t| t.and_then(|l| self.tau[l].as_ref().map(|m| m.submatrix(keep, keep))))
            .collect();
        let ends = self
            .ends
            .iter()
            .map(|e| Endo { var: e.var, deg: e.deg, mat: e.mat.submatrix(keep, keep) })
            .collect();
        Module {
            alg: self.alg.clone(),
            blocks,
            words,
            degs: keep.iter().map(|&j| self.degs[j]).collect(),
            x,
            tau,
            ends,
            free: None,
            ind: None,
            label: String::new(),
        }
    }

    /// e(gamma_1, ..., gamma_r) M as a module over the parabolic subalgebra
    pub fn restrict_blocks(&self, contents: &[Vec<i64>]) -> Module {
        let sizes: Vec<usize> = contents.iter().map(|c| c.iter().sum::<i64>() as usize).collect();
        let starts = perm::block_starts(&sizes);
        let keep: Vec<usize> = (0..self.dim())
            .filter(|&j| {
                let w = &self.words[j];
                contents.iter().enumerate().all(|(t, c)| self.alg.datum.content(&w[starts[t]..starts[t] + sizes[t]]) == *c)
            })
            .collect();
        let n = self.height();
        let xmap: Vec<usize> = (0..n).collect();
        let tmap: Vec<Option<usize>> = (0..n.saturating_sub(1))
            .map(|l| {
                let b = perm::block_of(&sizes, l);
                if perm::block_of(&sizes, l + 1) == b {
                    Some(l)
                } else {
                    None
                }
            })
            .collect();
        let words = keep.iter().map(|&j| self.words[j].clone()).collect();
        let mut m = self.restrict_to(&keep, words, sizes.iter().cloned().filter(|&b| b > 0).collect(), &xmap, &tmap);
        if m.blocks.is_empty() {
            m.blocks.push(0);
        }
        m.label = format!("Res({})", self.label);
        m
    }

    pub fn restrict(&self, alpha: &[i64], gamma: &[i64]) -> Module {
        self.restrict_blocks(&[alpha.to_vec(), gamma.to_vec()])
    }

    pub fn e_i(&self, i: usize) -> Module {
        let n = self.height();
        assert!(n >= 1);
        let keep: Vec<usize> = (0..self.dim()).filter(|&j| self.words[j][0] as usize == i).collect();
        let words = keep.iter().map(|&j| self.words[j][1..].to_vec()).collect();
        let xmap: Vec<usize> = (1..n).collect();
        let tmap: Vec<Option<usize>> = (1..n.saturating_sub(1)).map(Some).collect();
        let mut m = self.restrict_to(&keep, words, vec![n - 1], &xmap, &tmap);
        m.label = format!("E_{}({})", self.alg.datum.labels[i], self.label);
        m
    }

    pub fn e_i_star(&self, i: usize) -> Module {
        let n = self.height();
        assert!(n >= 1);
        let keep: Vec<usize> = (0..self.dim()).filter(|&j| self.words[j][n - 1] as usize == i).collect();
        let words = keep.iter().map(|&j| self.words[j][..n - 1].to_vec()).collect();
        let xmap: Vec<usize> = (0..n - 1).collect();
        let tmap: Vec<Option<usize>> = (0..n.saturating_sub(2)).map(Some).collect();
        let mut m = self.restrict_to(&keep, words, vec![n - 1], &xmap, &tmap);
        m.label = format!("E*_{}({})", self.alg.datum.labels[i], self.label);
        m
    }

    pub fn eps_i(&self, i: usize) -> usize {
        self.words.iter().map(|w| w.iter().take_while(|&&l| l as usize == i).count()).max().unwrap_or(0)
    }

    pub fn eps_i_star(&self, i: usize) -> usize {
        self.words.iter().map(|w| w.iter().rev().take_while(|&&l| l as usize == i).count()).max().unwrap_or(0)
    }

    /// W(M): prefix contents; W*(M): suffix contents
    pub fn prefix_weights(&self) -> BTreeSet<Vec<i64>> {
        let mut s = BTreeSet::new();
        for w in &self.words {
            for k in 0..=w.len() {
                s.insert(self.alg.datum.content(&w[..k]));
            }
        }
        s
    }

    pub fn suffix_weights(&self) -> BTreeSet<Vec<i64>> {
        let mut s = BTreeSet::new();
        for w in &self.words {
            for k in 0..=w.len() {
                s.insert(self.alg.datum.content(&w[w.len() - k..]));
            }
        }
        s
    }

    // ---- sub and quotient ----

    pub fn closure(&self, gens: &[SVec], with_ends: bool) -> Echelon {
        let mut e = Echelon::new();
        let mut queue: Vec<SVec> = Vec::new();
        for g in gens {
            for part in self.homogeneous_parts(g) {
                if e.insert(part.clone()) {
                    queue.push(part);
                }
            }
        }
        let mut mats: Vec<&SMat> = self.x.iter().collect();
        mats.extend(self.tau.iter().flatten());
        if with_ends {
            mats.extend(self.ends.iter().map(|e| &e.mat));
        }
        while let Some(v) = queue.pop() {
            for m in &mats {
                let w = m.apply(&v);
                if !w.is_empty() && e.insert(w.clone()) {
                    queue.push(w);
                }
            }
        }
        e
    }

    pub fn homogeneous_parts(&self, v: &SVec) -> Vec<SVec> {
        let mut parts: BTreeMap<(Vec<u8>, i64), SVec> = BTreeMap::new();
        for (&j, c) in v {
            parts.entry((self.words[j].clone(), self.degs[j])).or_default().insert(j, c.clone());
        }
        parts.into_values().collect()
    }

    fn ends_stable(&self, sub: &Echelon) -> bool {
        self.ends.iter().all(|e| sub.basis().iter().all(|v| sub.contains(&e.mat.apply(v))))
    }

    /// M / S for an invariant subspace S; also returns the projection matrix
    pub fn quotient(&self, sub: &Echelon) -> (Module, SMat) {
        let keep: Vec<usize> = (0..self.dim()).filter(|j| !sub.rows.contains_key(j)).collect();
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(a, &b)| (b, a)).collect();
        let proj_vec = |v: &SVec| -> SVec {
            sub.reduce(v).into_iter().map(|(j, c)| (pos[&j], c)).collect()
        };
        let tr = |m: &SMat| -> SMat {
            SMat { rows: keep.len(), cols: keep.iter().map(|&j| proj_vec(&m.cols[j])).collect() }
        };
        let ends = if self.ends_stable(sub) {
            self.ends.iter().map(|e| Endo { var: e.var, deg: e.deg, mat: tr(&e.mat) }).collect()
        } else {
            vec![]
        };
        let proj = SMat { rows: keep.len(), cols: (0..self.dim()).map(|j| proj_vec(&unit(j))).collect() };
        let m = Module {
            alg: self.alg.clone(),
            blocks: self.blocks.clone(),
            words: keep.iter().map(|&j| self.words[j].clone()).collect(),
            degs: keep.iter().map(|&j| self.degs[j]).collect(),
            x: self.x.iter().map(tr).collect(),
            tau: self.tau.iter().map(|t| t.as_ref().map(tr)).collect(),
            ends,
            free: None,
            ind: None,
            label: format!("quot({})", self.label),
        };
        (m, proj)
    }

    /// S as a module; also returns the inclusion matrix
    pub fn submodule(&self, sub: &Echelon) -> (Module, SMat) {
        let basis: Vec<(usize, SVec)> = sub.rows.iter().map(|(&p, v)| (p, v.clone())).collect();
        let pos: HashMap<usize, usize> = basis.iter().enumerate().map(|(a, (p, _))| (*p, a)).collect();
        let coords = |v: &SVec| -> SVec {
            v.iter().filter_map(|(j, c)| pos.get(j).map(|&a| (a, c.clone()))).collect()
        };
        let tr = |m: &SMat| -> SMat {
            SMat { rows: basis.len(), cols: basis.iter().map(|(_, v)| coords(&m.apply(v))).collect() }
        };
        let ends = if self.ends_stable(sub) {
            self.ends.iter().map(|e| Endo { var: e.var, deg: e.deg, mat: tr(&e.mat) }).collect()
        } else {
            vec![]
        };
        let incl = SMat { rows: self.dim(), cols: basis.iter().map(|(_, v)| v.clone()).collect() };
        let first = |v: &SVec| *v.keys().next().unwrap();
        let m = Module {
            alg: self.alg.clone(),
            blocks: self.blocks.clone(),
            words: basis.iter().map(|(_, v)| self.words[first(v)].clone()).collect(),
            degs: basis.iter().map(|(_, v)| self.degs[first(v)]).collect(),
            x: self.x.iter().map(tr).collect(),
            tau: self.tau.iter().map(|t| t.as_ref().map(tr)).collect(),
            ends,
            free: None,
            ind: None,
            label: format!("sub({})", self.label),
        };
        (m, incl)
    }

    pub fn image_of(&self, f: &SMat) -> Echelon {
        let mut e = Echelon::new();
        for c in &f.cols {
            for part in self.homogeneous_parts(c) {
                e.insert(part);
            }
        }
        e
    }

    // ---- radical, head, socle ----

    /// basis of the Jacobson radical of the image of the algebra in End(M)
    pub fn radical_basis(&self) -> Vec<SMat> {
        let dim = self.dim();
        if dim == 0 {
            return vec![];
        }
        // blocks of the image algebra keyed by (target word, source word, degree)
        let vec_of = |m: &SMat| -> SVec {
            let mut v = SVec::new();
            for (c, col) in m.cols.iter().enumerate() {
                for (&r, x) in col {
                    v.insert(r * dim + c, x.clone());
                }
            }
            v
        };
        let mat_of = |v: &SVec| -> SMat {
            let mut m = SMat::zero(dim, dim);
            for (&k, x) in v {
                m.cols[k % dim].insert(k / dim, x.clone());
            }
            m
        };
        let key_of = |m: &SMat| -> Option<(Vec<u8>, Vec<u8>, i64)> {
            for (c, col) in m.cols.iter().enumerate() {
                if let Some((&r, _)) = col.iter().next() {
                    return Some((self.words[r].clone(), self.words[c].clone(), self.degs[r] - self.degs[c]));
                }
            }
            None
        };
        let mut spaces: BTreeMap<(Vec<u8>, Vec<u8>, i64), (Echelon, Vec<SMat>)> = BTreeMap::new();
        let mut queue: Vec<SMat> = Vec::new();
        let words: BTreeSet<Vec<u8>> = self.words.iter().cloned().collect();
        for w in &words {
            let mut e = SMat::zero(dim, dim);
            for j in self.slice(w) {
                e.cols[j].insert(j, Q::one());
            }
            // split by degree to keep elements homogeneous
            let mut by_deg: BTreeMap<i64, SMat> = BTreeMap::new();
            for j in self.slice(w) {
                by_deg.entry(self.degs[j]).or_insert_with(|| SMat::zero(dim, dim)).cols[j].insert(j, Q::one());
            }
            let _ = e;
            for (_, m) in by_deg {
                let k = key_of(&m).unwrap();
                let ent = spaces.entry(k).or_insert_with(|| (Echelon::new(), vec![]));
                if ent.0.insert(vec_of(&m)) {
                    ent.1.push(m.clone());
                    queue.push(m);
                }
            }
        }
        let mut gens: Vec<&SMat> = self.x.iter().collect();
        gens.extend(self.tau.iter().flatten());
        while let Some(a) = queue.pop() {
            for g in &gens {
                let b = g.mul(&a);
                let Some(k) = key_of(&b) else { continue };
                let ent = spaces.entry(k).or_insert_with(|| (Echelon::new(), vec![]));
                if ent.0.insert(vec_of(&b)) {
                    ent.1.push(b.clone());
                    queue.push(b);
                }
            }
        }
        let mut rad = Vec::new();
        for (k, (_, basis)) in &spaces {
            let dual_key = (k.1.clone(), k.0.clone(), -k.2);
            let Some((_, dual)) = spaces.get(&dual_key) else {
                rad.extend(basis.iter().cloned());
                continue;
            };
            // Gram matrix tr(a_i b_j); radical part = left kernel
            let rows: Vec<SVec> = dual
                .iter()
                .map(|b| {
                    let mut r = SVec::new();
                    for (i, a) in basis.iter().enumerate() {
                        let t = trace_prod(a, b);
                        if !t.is_zero() {
                            r.insert(i, t);
                        }
                    }
                    r
                })
                .collect();
            for comb in crate::linalg::nullspace(&rows, basis.len()) {
                let mut v = SVec::new();
                for (&i, c) in &comb {
                    axpy(&mut v, c, &vec_of(&basis[i]));
                }
                rad.push(mat_of(&v));
            }
        }
        rad
    }

    pub fn radical_submodule(&self) -> Echelon {
        let mut e = Echelon::new();
        for a in self.radical_basis() {
            for c in &a.cols {
                if !c.is_empty() {
                    for p in self.homogeneous_parts(c) {
                        e.insert(p);
                    }
                }
            }
        }
        e
    }

    pub fn head(&self) -> (Module, SMat) {
        let rad = self.radical_submodule();
        let (mut m, p) = self.quotient(&rad);
        m.label = format!("hd({})", self.label);
        (m, p)
    }

    pub fn socle_space(&self) -> Echelon {
        let rad = self.radical_basis();
        let rows: Vec<SVec> = rad.iter().flat_map(|a| a.transpose().cols.into_iter()).filter(|r| !r.is_empty()).collect();
        let mut e = Echelon::new();
        for v in crate::linalg::nullspace(&rows, self.dim()) {
            for p in self.homogeneous_parts(&v) {
                e.insert(p);
            }
        }
        e
    }

    pub fn socle(&self) -> (Module, SMat) {
        let s = self.socle_space();
        let (mut m, i) = self.submodule(&s);
        m.label = format!("soc({})", self.label);
        (m, i)
    }

    // ---- duality and regrading ----

    fn two_h(&self, nu: &[u8], c: &[Vec<i64>]) -> i64 {
        let mut s = 0;
        for a in 0..nu.len() {
            for b in a + 1..nu.len() {
                s += c[nu[a] as usize][nu[b] as usize];
            }
        }
        s
    }

    pub fn dual_star(&self) -> Module {
        let c = self.alg.lam.skew(&self.alg.datum);
        let degs = self.words.iter().zip(&self.degs).map(|(w, &d)| 2 * self.two_h(w, &c) - d).collect();
        let t = |m: &SMat| m.transpose();
        Module {
            alg: self.alg.clone(),
            blocks: self.blocks.clone(),
            words: self.words.clone(),
            degs,
            x: self.x.iter().map(t).collect(),
            tau: self.tau.iter().map(|m| m.as_ref().map(t)).collect(),
            ends: self.ends.iter().map(|e| Endo { var: e.var, deg: e.deg, mat: e.mat.transpose() }).collect(),
            free: None,
            ind: None,
            label: format!("({})*", self.label),
        }
    }

    pub fn regrade(&self, to: &Arc<Alg>) -> Result<Module> {
        if !same_algebra(&self.alg, to) {
            return Err(KlrError::AlgebraMismatch);
        }
        let n = self.alg.datum.rank();
        let c: Vec<Vec<i64>> = (0..n).map(|j| (0..n).map(|k| to.lam.lam[j][k] - self.alg.lam.lam[j][k]).collect()).collect();
        let mut m = self.clone();
        m.alg = to.clone();
        for (d, w) in m.degs.iter_mut().zip(&self.words) {
            *d += self.two_h(w, &c);
        }
        if let Some(ind) = &self.ind {
            let p = ind.parent.regrade(to)?;
            // induced degrees must be recomputed for the new grading of tau
            for (k, &(s, j)) in ind.of.iter().enumerate() {
                let t = Term { w: ind.shuffles[s].clone(), a: vec![0; self.height()], nu: p.words[j].clone() };
                m.degs[k] = p.degs[j] + 2 * to.deg_term(&t);
            }
            m.ind = Some(Arc::new(IndData { parent: Arc::new(p), shuffles: ind.shuffles.clone(), of: ind.of.clone() }));
        }
        Ok(m)
    }

    // ---- free bases over the spectral parameters ----

    /// rebase so that basis vectors are z^a g for a homogeneous free generating set
    pub fn make_free(&self, var: usize) -> Result<Module> {
        let z = self.end_by_var(var).ok_or_else(|| KlrError::HypothesisFailed("no such endomorphism".into()))?;
        let dim = self.dim();
        let img = self.image_of(&z.mat);
        let gens: Vec<usize> = (0..dim).filter(|j| !img.rows.contains_key(j)).collect();
        let mut basis: Vec<SVec> = Vec::new();
        let mut of = Vec::new();
        for (r, &g) in gens.iter().enumerate() {
            let mut v = unit(g);
            let mut a = 0u32;
            while !v.is_empty() {
                basis.push(v.clone());
                of.push((r, vec![a]));
                v = z.mat.apply(&v);
                a += 1;
            }
        }
        if basis.len() != dim {
            return Err(KlrError::HypothesisFailed("module is not free over k[z]/z^N".into()));
        }
        let mut ts = TrackedSpan::new();
        for b in &basis {
            if ts.insert(b).is_none() {
                return Err(KlrError::HypothesisFailed("free basis is dependent".into()));
            }
        }
        let conv = |m: &SMat| -> SMat {
            SMat { rows: dim, cols: basis.iter().map(|b| ts.coords(&m.apply(b)).unwrap()).collect() }
        };
        let first = |v: &SVec| *v.keys().next().unwrap();
        Ok(Module {
            alg: self.alg.clone(),
            blocks: self.blocks.clone(),
            words: basis.iter().map(|b| self.words[first(b)].clone()).collect(),
            degs: basis.iter().map(|b| self.degs[first(b)]).collect(),
            x: self.x.iter().map(conv).collect(),
            tau: self.tau.iter().map(|t| t.as_ref().map(conv)).collect(),
            ends: self.ends.iter().map(|e| Endo { var: e.var, deg: e.deg, mat: conv(&e.mat) }).collect(),
            free: Some(FreeData { vars: vec![var], gens: gens.len(), of }),
            ind: None,
            label: self.label.clone(),
        })
    }

    /// fiber at z = 0
    pub fn special_fiber(&self, var: usize) -> Module {
        let z = self.end_by_var(var).expect("endomorphism");
        let img = self.image_of(&z.mat);
        let (mut m, _) = self.quotient(&img);
        m.ends.retain(|e| e.var != var);
        m.label = format!("{}|z=0", self.label);
        m
    }

    // ---- serialization ----

    pub fn to_json(&self) -> serde_json::Value {
        let lab = |w: &Vec<u8>| w.iter().map(|&l| self.alg.datum.labels[l as usize].clone()).collect::<Vec<_>>();
        let mat = |m: &SMat| -> serde_json::Value {
            let mut ent = Vec::new();
            for (c, col) in m.cols.iter().enumerate() {
                for (&r, v) in col {
                    ent.push(json!([r, c, fmt_q(v)]));
                }
            }
            serde_json::Value::Array(ent)
        };
        json!({
            "label": self.label,
            "blocks": self.blocks,
            "basis": self.words.iter().zip(&self.degs).map(|(w, &d)| json!({"word": lab(w), "deg2": d})).collect::<Vec<_>>(),
            "x": self.x.iter().map(mat).collect::<Vec<_>>(),
            "tau": self.tau.iter().map(|t| t.as_ref().map(mat)).collect::<Vec<_>>(),
        })
    }
}

fn trace_prod(a: &SMat, b: &SMat) -> Q {
    // tr(ab) = sum_{i,j} a[i][j] b[j][i]
    let mut t = Q::zero();
    for (j, col) in a.cols.iter().enumerate() {
        for (&i, v) in col {
            if let Some(w) = b.cols[i].get(&j) {
                t += v * w;
            }
        }
    }
    t
}

/// tau_u e(nu) = sum over shuffles s of tau_s * (parabolic element)
fn decompose(
    alg: &Alg,
    u: &[u8],
    nu: &[u8],
    blocks: &[usize],
    sidx: &HashMap<Perm, usize>,
    memo: &mut HashMap<(Perm, Vec<u8>), Vec<(usize, Elem)>>,
) -> Result<Vec<(usize, Elem)>> {
    let key = (u.to_vec(), nu.to_vec());
    if let Some(v) = memo.get(&key) {
        return Ok(v.clone());
    }
    let n = nu.len();
    let (sh, v) = perm::coset_split(u, blocks);
    let mut word = perm::canon(&sh);
    word.extend(perm::canon(&v));
    let mut acc: BTreeMap<usize, Elem> = BTreeMap::new();
    acc.entry(sidx[&sh]).or_default().add_term(Term { w: v.clone(), a: vec![0; n], nu: nu.to_vec() }, Q::one());
    if word != perm::canon(u) {
        let full = alg.reduced_word_nf(&word, nu)?;
        for (t, c) in &full.terms {
            if t.w == u && t.a.iter().all(|&e| e == 0) {
                continue;
            }
            for (s2, pe) in decompose(alg, &t.w, nu, blocks, sidx, memo)? {
                acc.entry(s2).or_default().add_scaled(&pe.times_x(&t.a), &-c.clone());
            }
        }
    }
    let out: Vec<(usize, Elem)> = acc.into_iter().filter(|(_, e)| !e.is_zero()).collect();
    memo.insert(key, out.clone());
    Ok(out)
}

/// <i^n> = q_i^{n(n-1)/2} <i>^{∘n}
pub fn simple_power(alg: &Arc<Alg>, i: usize, n: usize) -> Result<Module> {
    if n == 0 {
        return Ok(Module::unit(alg));
    }
    let l = Module::simple_letter(alg, i);
    let parts: Vec<&Module> = (0..n).map(|_| &l).collect();
    let m = Module::convolve_all(&parts)?;
    let di = alg.datum.sym[i];
    // q_i^{n(n-1)/2} = q^{d_i n(n-1)/2}; doubled
    let mut m = m.shift(di * (n * (n - 1)) as i64);
    m.label = format!("<{}^{}>", alg.datum.labels[i], n);
    Ok(m)
}

pub fn simple_head(m: &Module) -> Result<Module> {
    let (h, _) = m.head();
    Ok(h)
}

// ---- homomorphisms ----

#[derive(Clone, Debug)]
pub struct HomSpace {
    /// (doubled degree, matrix from source to target)
    pub maps: Vec<(i64, SMat)>,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.maps.len()
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.maps.iter().map(|m| m.0).collect()
    }

    pub fn at_degree(&self, d: i64) -> Vec<&SMat> {
        self.maps.iter().filter(|m| m.0 == d).map(|m| &m.1).collect()
    }
}

fn compatible(m: &Module, n: &Module) -> Result<()> {
    if !same_algebra(&m.alg, &n.alg) || m.alg.lam != n.alg.lam {
        return Err(KlrError::AlgebraMismatch);
    }
    Ok(())
}

/// homogeneous homs of doubled degree s commuting with all generators (and with matched endomorphisms if asked)
pub fn hom_at_shift(m: &Module, n: &Module, s: i64, with_ends: bool) -> Result<Vec<SMat>> {
    compatible(m, n)?;
    if m.blocks != n.blocks || m.height() != n.height() {
        return Ok(vec![]);
    }
    let mut by_key: HashMap<(&Vec<u8>, i64), Vec<usize>> = HashMap::new();
    for t in 0..n.dim() {
        by_key.entry((&n.words[t], n.degs[t])).or_default().push(t);
    }
    // variable index for (t, j)
    let mut var: HashMap<(usize, usize), usize> = HashMap::new();
    let mut vars = Vec::new();
    for j in 0..m.dim() {
        if let Some(ts) = by_key.get(&(&m.words[j], m.degs[j] + s)) {
            for &t in ts {
                var.insert((t, j), vars.len());
                vars.push((t, j));
            }
        }
    }
    if vars.is_empty() {
        return Ok(vec![]);
    }
    let mut pairs: Vec<(&SMat, &SMat)> = Vec::new();
    for k in 0..m.x.len() {
        pairs.push((&m.x[k], &n.x[k]));
    }
    for l in 0..m.tau.len() {
        if let (Some(a), Some(b)) = (&m.tau[l], &n.tau[l]) {
            pairs.push((a, b));
        }
    }
    if with_ends {
        for e in &m.ends {
            if let Some(f) = n.end_by_var(e.var) {
                pairs.push((&e.mat, &f.mat));
            }
        }
    }
    let mut rows: Vec<SVec> = Vec::new();
    for (gm, gn) in &pairs {
        for j in 0..m.dim() {
            // (gn f - f gm) e_j, component t'
            let mut eqs: BTreeMap<usize, SVec> = BTreeMap::new();
            for t in 0..n.dim() {
                if let Some(&vi) = var.get(&(t, j)) {
                    for (&tp, c) in &gn.cols[t] {
                        let e = eqs.entry(tp).or_default();
                        axpy(e, c, &crate::linalg::unit(vi));
                    }
                }
            }
            // -f(gm e_j): f e_{jp} has components at t with var (t, jp)
            for (&jp, c) in &gm.cols[j] {
                if let Some(ts) = by_key.get(&(&m.words[jp], m.degs[jp] + s)) {
                    for &t in ts {
                        if let Some(&vi) = var.get(&(t, jp)) {
                            let e = eqs.entry(t).or_default();
                            axpy(e, &-c.clone(), &crate::linalg::unit(vi));
                        }
                    }
                }
            }
            for (_, r) in eqs {
                if !r.is_empty() {
                    rows.push(r);
                }
            }
        }
    }
    let ns = crate::linalg::nullspace(&rows, vars.len());
    Ok(ns
        .into_iter()
        .map(|sol| {
            let mut f = SMat::zero(n.dim(), m.dim());
            for (&vi, c) in &sol {
                let (t, j) = vars[vi];
                f.cols[j].insert(t, c.clone());
            }
            f
        })
        .collect())
}

fn candidate_shifts(m: &Module, n: &Module) -> BTreeSet<i64> {
    let mut out = BTreeSet::new();
    let mut nd: HashMap<&Vec<u8>, BTreeSet<i64>> = HashMap::new();
    for t in 0..n.dim() {
        nd.entry(&n.words[t]).or_default().insert(n.degs[t]);
    }
    for j in 0..m.dim() {
        if let Some(ds) = nd.get(&m.words[j]) {
            for &d in ds {
                out.insert(d - m.degs[j]);
            }
        }
    }
    out
}

pub fn hom_space(m: &Module, n: &Module) -> Result<HomSpace> {
    hom_space_opts(m, n, false)
}

pub fn hom_space_opts(m: &Module, n: &Module, with_ends: bool) -> Result<HomSpace> {
    compatible(m, n)?;
    if m.content() != n.content() || m.height() != n.height() {
        return Ok(HomSpace { maps: vec![] });
    }
    if let (Some(ind), true) = (&m.ind, n.is_ordinary()) {
        if !with_ends || m.ends.is_empty() {
            return hom_from_induced(m, ind, n);
        }
    }
    let mut maps = Vec::new();
    for s in candidate_shifts(m, n) {
        for f in hom_at_shift(m, n, s, with_ends)? {
            maps.push((s, f));
        }
    }
    Ok(HomSpace { maps })
}

/// Hom(Ind P, N) = Hom(P, Res N), extended along tau_shuffle
fn hom_from_induced(m: &Module, ind: &IndData, n: &Module) -> Result<HomSpace> {
    let p = &ind.parent;
    let sizes = &p.blocks;
    let starts = perm::block_starts(sizes);
    let contents: Vec<Vec<i64>> = {
        let w = &p.words[0];
        (0..sizes.len()).map(|t| p.alg.datum.content(&w[starts[t]..starts[t] + sizes[t]])).collect()
    };
    // all words of P share block contents
    let res = n.restrict_blocks(&contents);
    let keep: Vec<usize> = (0..n.dim())
        .filter(|&j| {
            let w = &n.words[j];
            contents.iter().enumerate().all(|(t, c)| n.alg.datum.content(&w[starts[t]..starts[t] + sizes[t]]) == *c)
        })
        .collect();
    let mut maps = Vec::new();
    for s in candidate_shifts(p, &res) {
        for phi in hom_at_shift(p, &res, s, false)? {
            let mut f = SMat::zero(n.dim(), m.dim());
            for (k, &(si, j)) in ind.of.iter().enumerate() {
                let base: SVec = phi.cols[j].iter().map(|(&r, c)| (keep[r], c.clone())).collect();
                f.cols[k] = n.apply_word(&perm::canon(&ind.shuffles[si]), &base);
            }
            maps.push((s, f));
        }
    }
    Ok(HomSpace { maps })
}

pub fn is_invertible(f: &SMat) -> bool {
    f.rows == f.ncols() && f.rank() == f.rows
}

/// equal characters and a degree-0 invertible intertwiner
pub fn find_isomorphism(m: &Module, n: &Module, seed: u64) -> Result<Option<SMat>> {
    if m.character() != n.character() {
        return Ok(None);
    }
    if m.dim() == 0 {
        return Ok(Some(SMat::zero(0, 0)));
    }
    let homs = hom_at_shift_any(m, n, 0)?;
    if homs.is_empty() {
        return Ok(None);
    }
    if homs.len() == 1 {
        return Ok(if is_invertible(&homs[0]) { Some(homs[0].clone()) } else { None });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..8 {
        let mut f = SMat::zero(n.dim(), m.dim());
        for h in &homs {
            let c: i64 = rng.gen_range(-5..=5);
            f = f.add(&h.scaled(&q(c)));
        }
        if is_invertible(&f) {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

fn hom_at_shift_any(m: &Module, n: &Module, s: i64) -> Result<Vec<SMat>> {
    if m.ind.is_some() && n.is_ordinary() {
        Ok(hom_space(m, n)?.maps.into_iter().filter(|x| x.0 == s).map(|x| x.1).collect())
    } else {
        hom_at_shift(m, n, s, false)
    }
}

/// total dimension of END(M); 1 for an absolutely simple module
pub fn end_dim(m: &Module) -> Result<usize> {
    Ok(hom_space(m, m)?.dim())
}

pub fn is_simple(m: &Module) -> Result<bool> {
    if m.dim() == 0 {
        return Ok(false);
    }
    let rad = m.radical_submodule();
    if rad.rank() != 0 {
        return Ok(false);
    }
    Ok(end_dim(m)? == 1)
}

// ---- presentations ----

/// cyclic module R e(nu) / sum R rho, with optional endomorphisms given by right multiplication
#[derive(Clone, Debug)]
pub struct Presentation {
    pub word: Vec<u8>,
    /// doubled degree of the generator
    pub gen_deg: i64,
    pub relations: Vec<Elem>,
    /// (var, right multiplier polynomial in x, doubled degree)
    pub right_ends: Vec<(usize, Poly, i64)>,
    pub label: String,
}

#[derive(Clone, Debug)]
pub struct Truncated {
    pub module: Module,
    /// doubled ceiling
    pub ceiling: i64,
    /// true when the window contains the whole module and every action is exact
    pub exact: bool,
}

fn enumerate_terms(alg: &Alg, left_of: Option<&[u8]>, nu: &[u8], dmax2: i64, base2: i64) -> Vec<Term> {
    // terms tau_w x^a e(nu) with 2*deg + base2 <= dmax2; if left_of given, only w with w nu = left_of
    let n = nu.len();
    let mut out = Vec::new();
    for w in perm::all_perms(n) {
        if let Some(l) = left_of {
            if perm::act(&w, nu) != l {
                continue;
            }
        }
        let d0 = 2 * alg.deg_term(&Term { w: w.clone(), a: vec![0; n], nu: nu.to_vec() }) + base2;
        let mut stack = vec![(0usize, d0, vec![0u32; n])];
        while let Some((k, d, a)) = stack.pop() {
            if d > dmax2 {
                continue;
            }
            if k == n {
                out.push(Term { w: w.clone(), a, nu: nu.to_vec() });
                continue;
            }
            let step = 2 * alg.xdeg(nu[k]);
            let mut a2 = a.clone();
            let mut dd = d;
            while dd <= dmax2 {
                stack.push((k + 1, dd, a2.clone()));
                a2[k] += 1;
                dd += step;
            }
        }
    }
    out.sort();
    out
}

/// the degree-<=ceiling part of R e(nu) / (relations), kept as terms modulo an echelon basis
#[derive(Clone, Debug)]
pub struct Window {
    pub basis: Vec<Term>,
    pub index: HashMap<Term, usize>,
    pub rel: Echelon,
    pub keep: Vec<usize>,
    pub pos: HashMap<usize, usize>,
    pub ceiling: i64,
}

impl Window {
    pub fn dim(&self) -> usize {
        self.keep.len()
    }

    /// coordinates in the kept basis; terms above the ceiling are dropped
    pub fn reduce(&self, e: &Elem) -> SVec {
        let mut v = SVec::new();
        for (t, c) in &e.terms {
            if let Some(&k) = self.index.get(t) {
                v.insert(k, c.clone());
            }
        }
        self.rel.reduce(&v).into_iter().map(|(j, c)| (self.pos[&j], c)).collect()
    }

    pub fn elem(&self, k: usize) -> Elem {
        Elem::term(self.basis[self.keep[k]].clone(), Q::one())
    }

    pub fn words(&self) -> Vec<Vec<u8>> {
        self.keep.iter().map(|&j| self.basis[j].left()).collect()
    }
}

pub fn present_window(alg: &Arc<Alg>, pres: &Presentation, ceiling2: i64) -> Result<Window> {
    let nu = &pres.word;
    let g0 = pres.gen_deg;
    let basis = enumerate_terms(alg, None, nu, ceiling2, g0);
    let index: HashMap<Term, usize> = basis.iter().cloned().enumerate().map(|(a, b)| (b, a)).collect();
    let to_vec = |e: &Elem| -> SVec {
        let mut v = SVec::new();
        for (t, c) in &e.terms {
            if let Some(&k) = index.get(t) {
                v.insert(k, c.clone());
            }
        }
        v
    };
    let mut rel = Echelon::new();
    for rho in &pres.relations {
        if rho.is_zero() {
            continue;
        }
        let drho = alg.homogeneous_degree(rho).ok_or_else(|| KlrError::HypothesisFailed("inhomogeneous relation".into()))?;
        let lefts: BTreeSet<Vec<u8>> = rho.terms.keys().map(|t| t.left()).collect();
        for l in lefts {
            let part = rho.left_idem(&l);
            for b in enumerate_terms(alg, None, &l, ceiling2 - 2 * drho, g0) {
                let prod = alg.mul(&Elem::term(b, Q::one()), &part)?;
                let v = to_vec(&prod);
                if !v.is_empty() {
                    rel.insert(v);
                }
            }
        }
    }
    let keep: Vec<usize> = (0..basis.len()).filter(|j| !rel.rows.contains_key(j)).collect();
    let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(a, &b)| (b, a)).collect();
    Ok(Window { basis, index, rel, keep, pos, ceiling: ceiling2 })
}

pub fn present(alg: &Arc<Alg>, pres: &Presentation, ceiling2: i64) -> Result<Truncated> {
    let nu = &pres.word;
    let n = nu.len();
    let g0 = pres.gen_deg;
    let max_x = (0..n).map(|k| 2 * alg.xdeg(nu[k])).max().unwrap_or(0);
    if ceiling2 < g0 + max_x {
        return Err(KlrError::CeilingTooSmall(format!("ceiling {} below one generator step", ceiling2)));
    }
    let win = present_window(alg, pres, ceiling2)?;
    let Window { basis, rel, keep, .. } = &win;
    let reduce = |e: &Elem| win.reduce(e);
    let full = Module {
        alg: alg.clone(),
        blocks: vec![n],
        words: basis.iter().map(|t| t.left()).collect(),
        degs: basis.iter().map(|t| 2 * alg.deg_term(t) + g0).collect(),
        x: vec![],
        tau: vec![],
        ends: vec![],
        free: None,
        ind: None,
        label: pres.label.clone(),
    };
    let mk = |f: &dyn Fn(&Elem) -> Result<Elem>| -> Result<SMat> {
        let mut cols = Vec::with_capacity(keep.len());
        for &j in keep {
            let e = f(&Elem::term(basis[j].clone(), Q::one()))?;
            cols.push(reduce(&e));
        }
        Ok(SMat { rows: keep.len(), cols })
    };
    let mut x = Vec::new();
    for k in 0..n {
        x.push(mk(&|e: &Elem| alg.x_left(k, e))?);
    }
    let mut tau = Vec::new();
    for l in 0..n.saturating_sub(1) {
        tau.push(Some(mk(&|e: &Elem| alg.tau_left(l, e))?));
    }
    let mut ends = Vec::new();
    for (var, p, d) in &pres.right_ends {
        let m = mk(&|e: &Elem| {
            let mut r = Elem::zero();
            for (ex, c) in &p.terms {
                r.add_scaled(&e.times_x(ex), c);
            }
            Ok(r)
        })?;
        ends.push(Endo { var: *var, deg: *d, mat: m });
    }
    let module = Module {
        alg: alg.clone(),
        blocks: vec![n],
        words: keep.iter().map(|&j| full.words[j].clone()).collect(),
        degs: keep.iter().map(|&j| full.degs[j]).collect(),
        x,
        tau,
        ends,
        free: None,
        ind: None,
        label: pres.label.clone(),
    };
    // exactness: nonzero x-monomials on the generator must stay clear of the ceiling
    let tmax = perm::all_perms(n)
        .iter()
        .map(|w| alg.deg_term(&Term { w: w.clone(), a: vec![0; n], nu: nu.clone() }).max(0))
        .max()
        .unwrap_or(0);
    let mut xtop = g0;
    for (j, t) in basis.iter().enumerate() {
        if perm::is_identity(&t.w) && !rel.reduce(&unit(j)).is_empty() {
            xtop = xtop.max(full.degs[j]);
        }
    }
    let exact = xtop + max_x.max(2 * tmax) <= ceiling2;
    Ok(Truncated { module, ceiling: ceiling2, exact })
}

/// raise the ceiling until the window is exact
pub fn present_exact(alg: &Arc<Alg>, pres: &Presentation, start2: i64, cap2: i64) -> Result<Module> {
    let mut d = start2;
    loop {
        let t = present(alg, pres, d)?;
        if t.exact {
            return Ok(t.module);
        }
        if d >= cap2 {
            return Err(KlrError::CeilingTooSmall(format!("{} not closed below {}", pres.label, cap2)));
        }
        d = (d + 4).min(cap2);
    }
}

/// relations tau_k e(nu) for the listed positions
pub fn tau_relations(nu: &[u8], ks: &[usize]) -> Vec<Elem> {
    let n = nu.len();
    ks.iter()
        .map(|&k| Elem::term(Term { w: perm::left_mul(k, &perm::identity(n)), a: vec![0; n], nu: nu.to_vec() }, Q::one()))
        .collect()
}

pub fn x_power_relation(nu: &[u8], k: usize, p: u32) -> Elem {
    let mut t = Term::idem(nu);
    t.a[k] = p;
    Elem::term(t, Q::one())
}

/// <i^c j> via its cyclic presentation: generator e(i^c j), killed by tau_1..tau_c and x_{c+1}
pub fn determinantial(alg: &Arc<Alg>, i: usize, j: usize, c: usize) -> Result<Module> {
    let mut nu = vec![i as u8; c];
    nu.push(j as u8);
    let mut rels = tau_relations(&nu, &(0..c).collect::<Vec<_>>());
    rels.push(x_power_relation(&nu, c, 1));
    let pres = Presentation { word: nu, gen_deg: 0, relations: rels, right_ends: vec![], label: String::new() };
    let m = present_exact(alg, &pres, 8 * alg.datum.max_root_norm(), 40 * alg.datum.max_root_norm())?;
    Ok(self_dual_normalize(&m).with_label(&format!("<{}^{}{}>", alg.datum.labels[i], c, alg.datum.labels[j])))
}

/// the affinization <i^c j>_z truncated at z^N, z = x_{c+1} on the generator
pub fn determinantial_affine(alg: &Arc<Alg>, i: usize, j: usize, c: usize, ntrunc: u32, var: usize) -> Result<Module> {
    let mut nu = vec![i as u8; c];
    nu.push(j as u8);
    let mut rels = tau_relations(&nu, &(0..c).collect::<Vec<_>>());
    rels.push(x_power_relation(&nu, c, ntrunc));
    let mut e = vec![0u32; c + 1];
    e[c] = 1;
    let zdeg = 2 * alg.xdeg(j as u8);
    let shift = self_dual_shift_of_fiber(alg, i, j, c)?;
    let pres = Presentation {
        word: nu,
        gen_deg: shift,
        relations: rels,
        right_ends: vec![(var, Poly::monomial(e, Q::one()), zdeg)],
        label: format!("<{}^{}{}>_z", alg.datum.labels[i], c, alg.datum.labels[j]),
    };
    let m = present_exact(alg, &pres, shift + zdeg * ntrunc as i64 + 4 * alg.datum.max_root_norm(), shift + zdeg * ntrunc as i64 + 40 * alg.datum.max_root_norm())?;
    m.make_free(var)
}

fn self_dual_shift_of_fiber(alg: &Arc<Alg>, i: usize, j: usize, c: usize) -> Result<i64> {
    let mut nu = vec![i as u8; c];
    nu.push(j as u8);
    let mut rels = tau_relations(&nu, &(0..c).collect::<Vec<_>>());
    rels.push(x_power_relation(&nu, c, 1));
    let pres = Presentation { word: nu, gen_deg: 0, relations: rels, right_ends: vec![], label: String::new() };
    let m = present_exact(alg, &pres, 8 * alg.datum.max_root_norm(), 40 * alg.datum.max_root_norm())?;
    self_dual_shift(&m)
}

/// doubled s with q^{s/2} M self-dual, from characters; error if none exists
pub fn self_dual_shift(m: &Module) -> Result<i64> {
    let ch = m.character();
    let dch = m.dual_star().character();
    // q^t M has character shifted by t, its dual by -t: need ch + t == dch - t
    let a: i64 = ch.values().flat_map(|l| l.0.iter().map(|(&e, &c)| e * c)).sum();
    let b: i64 = dch.values().flat_map(|l| l.0.iter().map(|(&e, &c)| e * c)).sum();
    let total = m.dim() as i64;
    if total == 0 {
        return Ok(0);
    }
    let num = b - a;
    if num % (2 * total) != 0 {
        return Err(KlrError::NotSimple("no self-dual shift".into()));
    }
    let t = num / (2 * total);
    let shifted = m.shift(t);
    if shifted.character() != shifted.dual_star().character() {
        return Err(KlrError::NotSimple("character not bar-invariant after shift".into()));
    }
    Ok(t)
}

pub fn self_dual_normalize(m: &Module) -> Module {
    match self_dual_shift(m) {
        Ok(t) => m.shift(t),
        Err(_) => m.clone(),
    }
}

/// head of M∘N, normalized to be self-dual when possible
pub fn head_of(m: &Module, n: &Module) -> Result<Module> {
    let c = m.convolution(n)?;
    let (h, _) = c.head();
    Ok(self_dual_normalize(&h).with_label(&format!("hd({}∘{})", m.label, n.label)))
}

/// E_i restricted to simple input: head of E_i M
pub fn e_tilde(m: &Module, i: usize) -> Result<Module> {
    if !is_simple(m)? {
        return Err(KlrError::NotSimple(m.label.clone()));
    }
    let e = m.e_i(i);
    if e.is_zero() {
        return Ok(e);
    }
    let (h, _) = e.head();
    Ok(h)
}

/// the cyclotomic quotient R(c alpha_i)/(tau_k, a(x_c)) with a(z) = z^c
pub fn cyclotomic_power(alg: &Arc<Alg>, i: usize, c: usize) -> Result<Module> {
    let nu = vec![i as u8; c];
    let mut rels = tau_relations(&nu, &(0..c.saturating_sub(1)).collect::<Vec<_>>());
    rels.push(x_power_relation(&nu, c - 1, c as u32));
    let pres = Presentation { word: nu, gen_deg: 0, relations: rels, right_ends: vec![], label: format!("<{}^{}>_a", alg.datum.labels[i], c) };
    present_exact(alg, &pres, 8 * alg.datum.max_root_norm(), 60 * alg.datum.max_root_norm())
}

pub fn regrade_alg(alg: &Arc<Alg>, lam: GradeAssociator) -> Result<Arc<Alg>> {
    alg.regraded(lam)
}
