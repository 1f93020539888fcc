use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::cartan::{canonical_associator, extend_cartan, lambda_pm, CartanDatum, Sign};
use crate::error::{KlrError, Result};
use crate::gmod::{self, Module};
use crate::linalg::{fmt_q, q, qf, unit, SMat, SVec, Q};
use crate::perm;
use crate::poly::{div2, Poly};
use crate::qha::{default_qparams, Alg};
use crate::report::{Case, Report};
use crate::rmat::{self, AffLabel};

/// R± with its λ± grading; `new` is the index of i±
#[derive(Clone)]
pub struct Extended {
    pub base: CartanDatum,
    pub alg: Arc<Alg>,
    pub i: usize,
    pub new: usize,
    pub sign: Sign,
}

pub fn extended(base: &CartanDatum, i: usize, sign: Sign) -> Result<Extended> {
    let e = extend_cartan(base, i, sign)?;
    let can = Alg::new(e.clone(), canonical_associator(&e), default_qparams(&e))?;
    let alg = can.regraded(lambda_pm(&e, i, sign)?)?;
    Ok(Extended { base: base.clone(), alg, i, new: e.rank() - 1, sign })
}

impl Extended {
    pub fn letter(&self, j: usize) -> Module {
        Module::simple_letter(&self.alg, j)
    }

    pub fn label(&self, j: usize) -> &str {
        &self.alg.datum.labels[j]
    }

    pub fn wt_c(&self) -> Vec<i64> {
        let mut w = vec![0; self.alg.datum.rank()];
        w[self.i] = 1;
        w[self.new] = 1;
        w
    }

    /// c = -<h_i, α_j>
    pub fn c_of(&self, j: usize) -> usize {
        (-self.base.gcm[self.i][j]) as usize
    }

    /// <i^c j> for the + side, <j i^c> for the − side
    pub fn det(&self, j: usize) -> Result<Module> {
        let c = self.c_of(j);
        if c == 0 {
            return Ok(self.letter(j));
        }
        match self.sign {
            Sign::Plus => gmod::determinantial(&self.alg, self.i, j, c),
            Sign::Minus => {
                let p = gmod::simple_power(&self.alg, self.i, c)?;
                Ok(gmod::head_of(&self.letter(j), &p)?.with_label(&format!("<{}{}^{}>", self.label(j), self.label(self.i), c)))
            }
        }
    }
}

/// C+ = hd(<i>∘<i+>), C− = hd(<i−>∘<i>)
pub fn build_cpm(ext: &Extended) -> Result<Module> {
    let (a, b) = match ext.sign {
        Sign::Plus => (ext.i, ext.new),
        Sign::Minus => (ext.new, ext.i),
    };
    let c = gmod::head_of(&ext.letter(a), &ext.letter(b))?;
    Ok(c.with_label(&format!("C{}", ext.sign.suffix())))
}

/// W*(C+) (resp. W(C−)) meets the weights of R-gmod only in 0
pub fn unmixed_against_base(ext: &Extended, c: &Module) -> bool {
    let ws = match ext.sign {
        Sign::Plus => c.suffix_weights(),
        Sign::Minus => c.prefix_weights(),
    };
    ws.iter().all(|w| w.iter().all(|&x| x == 0) || w[ext.new] > 0)
}

// ---- braiders ----

/// Left braider (Plus): C∘M -> M∘C. Right braider (Minus): M∘C -> C∘M.
#[derive(Clone)]
pub struct Braider {
    pub c: Module,
    pub side: Sign,
    /// doubled φ(−α_j)
    pub phi2: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct Braiding {
    pub src: Module,
    pub tgt: Module,
    pub map: SMat,
    pub deg2: Option<i64>,
    pub route: &'static str,
}

fn is_scalar_identity(f: &SMat) -> Option<Q> {
    if f.rows != f.ncols() || f.rows == 0 {
        return None;
    }
    let s = f.get(0, 0);
    if s.is_zero() {
        return None;
    }
    for (c, col) in f.cols.iter().enumerate() {
        if col.len() != 1 || col.get(&c) != Some(&s) {
            return None;
        }
    }
    Some(s)
}

pub fn nondeg_braider(c: &Module, side: Sign) -> Result<Braider> {
    let rank = c.alg.datum.rank();
    let mut phi2 = Vec::with_capacity(rank);
    for j in 0..rank {
        let l = Module::simple_letter(&c.alg, j);
        let r = match side {
            Sign::Plus => rmat::lambda2(c, &l),
            Sign::Minus => rmat::lambda2(&l, c),
        };
        phi2.push(r.map_err(|e| KlrError::NotRealizable(format!("R-matrix for letter {}: {}", j, e)))?);
    }
    Ok(Braider { c: c.clone(), side, phi2 })
}

impl Braider {
    fn ordered<'a>(&'a self, m: &'a Module) -> (&'a Module, &'a Module) {
        match self.side {
            Sign::Plus => (&self.c, m),
            Sign::Minus => (m, &self.c),
        }
    }

    /// R_C(M); the unmixed formula where it applies, otherwise the spanning R-matrix
    pub fn braid(&self, m: &Module) -> Result<Braiding> {
        let (a, b) = self.ordered(m);
        if rmat::is_unmixed(a, b) {
            let s = rmat::unmixed_r(a, b)?;
            let deg2 = rmat::map_degree(&s.map, &s.src, &s.tgt);
            return Ok(Braiding { src: s.src, tgt: s.tgt, map: s.map, deg2, route: "unmixed" });
        }
        let r = rmat::rmatrix(a, b).map_err(|e| KlrError::NotRealizable(e.to_string()))?;
        let mut map = r.map;
        let mut route = "r-matrix";
        if r.src.words == r.tgt.words {
            if let Some(s) = is_scalar_identity(&map) {
                map = map.scaled(&(Q::one() / s));
                route = "normalized";
            }
        }
        Ok(Braiding { src: r.src, tgt: r.tgt, map, deg2: Some(r.lambda2), route })
    }

    /// doubled φ(μ) for μ = −content
    pub fn phi2_at(&self, content: &[i64]) -> i64 {
        content.iter().zip(&self.phi2).map(|(a, b)| a * b).sum()
    }
}

/// the identification A∘(X∘Y) -> A∘X∘Y (nested_at = 1) or (X∘Y)∘A -> X∘Y∘A (nested_at = 0)
fn flatten(outer: &Module, nested_at: usize, inner: &Module, dims: [usize; 3], other_ht: usize, flat: &Module) -> SMat {
    let oind = outer.ind.as_ref().expect("induced");
    let iind = inner.ind.as_ref().expect("induced");
    let find = flat.ind.as_ref().expect("induced");
    let [dother, dx, dy] = dims;
    let id_f = find.shuffles.iter().position(|s| perm::is_identity(s)).unwrap();
    let pos: HashMap<usize, usize> = find.of.iter().enumerate().filter(|(_, &(s, _))| s == id_f).map(|(k, &(_, j))| (j, k)).collect();
    let d1 = if nested_at == 0 { dother } else { inner.dim() };
    let mut f = SMat::zero(flat.dim(), outer.dim());
    for (k, &(s, j)) in oind.of.iter().enumerate() {
        let (a, b) = (j / d1, j % d1);
        let (nested, other) = if nested_at == 0 { (a, b) } else { (b, a) };
        let (s2, jj) = iind.of[nested];
        let (x, y) = (jj / dy, jj % dy);
        let flat_parent = if nested_at == 0 { (x * dy + y) * dother + other } else { (other * dx + x) * dy + y };
        let off = if nested_at == 0 { 0 } else { other_ht as u8 };
        let mut word = perm::canon(&oind.shuffles[s]);
        word.extend(perm::canon(&iind.shuffles[s2]).into_iter().map(|g| g + off));
        f.cols[k] = flat.apply_word(&word, &unit(pos[&flat_parent]));
    }
    f
}

/// R_C(X∘Y) against the composite of R_C(X) and R_C(Y), unmixed pieces only
pub fn hexagon(br: &Braider, x: &Module, y: &Module) -> Result<bool> {
    let c = &br.c;
    let xy = x.convolution(y)?;
    let whole = br.braid(&xy)?;
    if whole.route != "unmixed" || br.braid(x)?.route != "unmixed" || br.braid(y)?.route != "unmixed" {
        return Err(KlrError::HypothesisFailed("hexagon check needs unmixed pairs".into()));
    }
    let dims = [c.dim(), x.dim(), y.dim()];
    let (lhs, rhs) = match br.side {
        Sign::Plus => {
            let s1 = rmat::swap_map(&[c, x, y], 0, false)?;
            let s2 = rmat::swap_map(&[x, c, y], 1, false)?;
            let fs = flatten(&whole.src, 1, &xy, dims, c.height(), &s1.src);
            let ft = flatten(&whole.tgt, 0, &xy, dims, 0, &s2.tgt);
            (ft.mul(&whole.map), s2.map.mul(&s1.map).mul(&fs))
        }
        Sign::Minus => {
            let s1 = rmat::swap_map(&[x, y, c], 1, false)?;
            let s2 = rmat::swap_map(&[x, c, y], 0, false)?;
            let fs = flatten(&whole.src, 0, &xy, dims, 0, &s1.src);
            let ft = flatten(&whole.tgt, 1, &xy, dims, c.height(), &s2.tgt);
            (ft.mul(&whole.map), s2.map.mul(&s1.map).mul(&fs))
        }
    };
    Ok(lhs.sub(&rhs).is_zero() && !lhs.is_zero())
}

// ---- localization homs ----

#[derive(Clone)]
pub struct LocalObject {
    pub x: Module,
    pub m: i64,
}

#[derive(Clone, Debug)]
pub struct LocHom {
    pub level: usize,
    /// doubled twist applied to the target
    pub shift2: i64,
    /// doubled degrees of a basis of the graded hom space
    pub degrees: Vec<i64>,
}

impl LocHom {
    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn dim0(&self) -> usize {
        self.degrees.iter().filter(|&&d| d == 0).count()
    }
}

/// C^{∘k}, normalized to be self-dual
pub fn c_power(c: &Module, k: usize) -> Result<Module> {
    let p = match k {
        0 => return Ok(Module::unit(&c.alg)),
        1 => c.clone(),
        _ => Module::convolve_all(&vec![c; k])?,
    };
    Ok(gmod::self_dual_normalize(&p).with_label(&format!("{}^{}", c.label, k)))
}

fn with_c_power(c: &Module, k: usize, x: &Module, c_first: bool) -> Result<Module> {
    if k == 0 {
        return Ok(x.clone());
    }
    let p = c_power(c, k)?;
    if x.height() == 0 {
        return Ok(p);
    }
    if c_first {
        p.convolution(x)
    } else {
        x.convolution(&p)
    }
}

fn content_or_zero(m: &Module) -> Vec<i64> {
    m.content().unwrap_or_else(|| vec![0; m.alg.datum.rank()])
}

/// Hom(C^{l+m}∘X, q^{H(l,n−m) − (l+n)φ(μ)} Y∘C^{l+n}) for a left braider, mirrored for a right one
pub fn loc_hom(br: &Braider, x: &LocalObject, y: &LocalObject, l: usize) -> Result<LocHom> {
    let a = l as i64 + x.m;
    let b = l as i64 + y.m;
    if a < 0 || b < 0 {
        return Err(KlrError::CeilingTooSmall(format!("level {} below -m or -n", l)));
    }
    let wc = content_or_zero(&br.c);
    let (cx, cy) = (content_or_zero(&x.x), content_or_zero(&y.x));
    let lhs: Vec<i64> = cx.iter().zip(&wc).map(|(u, w)| u + a * w).collect();
    let rhs: Vec<i64> = cy.iter().zip(&wc).map(|(u, w)| u + b * w).collect();
    if lhs != rhs {
        return Err(KlrError::WeightMismatch(format!("{:?} vs {:?}", lhs, rhs)));
    }
    let cc = br.c.alg.datum.root_form(&wc, &wc);
    let h2 = -(l as i64) * (y.m - x.m) * cc;
    let shift2 = h2 - b * br.phi2_at(&cy);
    let left = br.side == Sign::Plus;
    let src = with_c_power(&br.c, a as usize, &x.x, left)?;
    let tgt = with_c_power(&br.c, b as usize, &y.x, !left)?.shift(shift2);
    let h = gmod::hom_space(&src, &tgt)?;
    let mut degrees = h.degrees();
    degrees.sort();
    Ok(LocHom { level: l, shift2, degrees })
}

/// loc_hom at l and l+1; NotStabilized when the graded dimensions differ
pub fn loc_hom_stable(br: &Braider, x: &LocalObject, y: &LocalObject, l: usize) -> Result<(LocHom, LocHom)> {
    let a = loc_hom(br, x, y, l)?;
    let b = loc_hom(br, x, y, l + 1)?;
    if a.degrees != b.degrees {
        return Err(KlrError::NotStabilized(format!("level {}: {:?}, level {}: {:?}", l, a.degrees, l + 1, b.degrees)));
    }
    Ok((a, b))
}

// ---- duality witness ----

#[derive(Clone, Debug)]
pub struct DualWitness {
    pub ell: usize,
    pub k_dim: usize,
    pub l_dim: usize,
    pub target_dim: usize,
    pub hom_dim: usize,
    pub rank: usize,
    pub map: SMat,
}

impl DualWitness {
    pub fn surjective(&self) -> bool {
        self.rank == self.target_dim && self.target_dim > 0
    }
}

/// Plus: L_ℓ(i)∘E_i(C^ℓ) ↠ C^ℓ. Minus: E*_i(C^ℓ)∘L_ℓ(i) ↠ C^ℓ.
pub fn dual_witness(c: &Module, i: usize, ell: usize, side: Sign, seed: u64) -> Result<DualWitness> {
    let eps = match side {
        Sign::Plus => c.eps_i(i),
        Sign::Minus => c.eps_i_star(i),
    };
    if eps != 1 {
        return Err(KlrError::HypothesisFailed(format!("epsilon of {} is {}", c.label, eps)));
    }
    let cl = if ell == 1 { c.clone() } else { Module::convolve_all(&vec![c; ell])? };
    let k = match side {
        Sign::Plus => cl.e_i(i),
        Sign::Minus => cl.e_i_star(i),
    };
    let l = Module::letter_affine(&c.alg, i, ell, 0);
    let src = match side {
        Sign::Plus => l.convolution(&k)?,
        Sign::Minus => k.convolution(&l)?,
    };
    let h = gmod::hom_space(&src, &cl)?;
    let mut best = SMat::zero(cl.dim(), src.dim());
    let mut rank = 0;
    for (_, f) in &h.maps {
        let r = f.rank();
        if r > rank {
            rank = r;
            best = f.clone();
        }
    }
    if rank < cl.dim() && h.dim() > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..8 {
            let mut f = SMat::zero(cl.dim(), src.dim());
            for (_, g) in &h.maps {
                f = f.add(&g.scaled(&q(rng.gen_range(-5..=5))));
            }
            let r = f.rank();
            if r > rank {
                rank = r;
                best = f;
            }
            if rank == cl.dim() {
                break;
            }
        }
    }
    Ok(DualWitness { ell, k_dim: k.dim(), l_dim: l.dim(), target_dim: cl.dim(), hom_dim: h.dim(), rank, map: best })
}

// ---- Λ bookkeeping over named pieces ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Piece {
    Letter(usize),
    New,
    C,
    Det(usize),
}

pub struct LambdaTable<'a> {
    pub ext: &'a Extended,
    mods: HashMap<Piece, Module>,
    lams: HashMap<(Piece, Piece), i64>,
}

impl<'a> LambdaTable<'a> {
    pub fn new(ext: &'a Extended) -> LambdaTable<'a> {
        LambdaTable { ext, mods: HashMap::new(), lams: HashMap::new() }
    }

    pub fn module(&mut self, p: Piece) -> Result<Module> {
        if let Some(m) = self.mods.get(&p) {
            return Ok(m.clone());
        }
        let m = match p {
            Piece::Letter(j) => self.ext.letter(j),
            Piece::New => self.ext.letter(self.ext.new),
            Piece::C => build_cpm(self.ext)?,
            Piece::Det(j) => self.ext.det(j)?,
        };
        self.mods.insert(p, m.clone());
        Ok(m)
    }

    pub fn name(&mut self, p: Piece) -> String {
        match p {
            Piece::C => format!("C{}", self.ext.sign.suffix()),
            _ => {
                let m = self.module(p).map(|m| m.label).unwrap_or_default();
                if m.is_empty() {
                    format!("{:?}", p)
                } else {
                    m
                }
            }
        }
    }

    /// doubled Λ(A, B)
    pub fn lam2(&mut self, a: Piece, b: Piece) -> Result<i64> {
        if let Some(&v) = self.lams.get(&(a, b)) {
            return Ok(v);
        }
        let (ma, mb) = (self.module(a)?, self.module(b)?);
        let v = rmat::lambda2(&ma, &mb)?;
        self.lams.insert((a, b), v);
        Ok(v)
    }

    pub fn lam(&mut self, a: Piece, b: Piece) -> Result<Q> {
        Ok(qf(self.lam2(a, b)?, 2))
    }
}

/// the localized object K_j as (piece X, exponent e of C̃) with K_j ≃ Q̃(X)∘C̃^e up to q-shift
fn k_object(ext: &Extended, j: usize) -> (Piece, i64) {
    if j == ext.new {
        (Piece::Letter(ext.i), -1)
    } else if j == ext.i {
        (Piece::New, -1)
    } else {
        (Piece::Det(j), 0)
    }
}

/// the chain of module-level Λ terms from the proof, for the + side
fn proof_chain_plus(ext: &Extended, j: usize, k: usize) -> Vec<(i64, Piece, Piece)> {
    let (i, n) = (ext.i, ext.new);
    if j == n && k == i {
        vec![(1, Piece::Letter(i), Piece::New)]
    } else if j == i && k == n {
        vec![(1, Piece::New, Piece::Letter(i))]
    } else if j == n {
        vec![(1, Piece::Det(k), Piece::New)]
    } else if k == n {
        vec![(-1, Piece::Det(j), Piece::C), (1, Piece::Det(j), Piece::Letter(i))]
    } else if j == i {
        vec![(1, Piece::New, Piece::Det(k)), (-1, Piece::C, Piece::Det(k))]
    } else if k == i {
        vec![(1, Piece::Letter(i), Piece::Det(j))]
    } else {
        vec![(1, Piece::Det(j), Piece::Det(k))]
    }
}

/// − side: the mirror image (arguments swapped, order of j, k reversed)
fn proof_chain(ext: &Extended, j: usize, k: usize) -> Vec<(i64, Piece, Piece)> {
    match ext.sign {
        Sign::Plus => proof_chain_plus(ext, j, k),
        Sign::Minus => proof_chain_plus(ext, k, j).into_iter().map(|(c, a, b)| (c, b, a)).collect(),
    }
}

fn eval_chain(t: &mut LambdaTable, chain: &[(i64, Piece, Piece)]) -> Result<(i64, String)> {
    let mut tot = 0;
    let mut parts = Vec::new();
    for &(c, a, b) in chain {
        let v = t.lam2(a, b)?;
        tot += c * v;
        let (na, nb) = (t.name(a), t.name(b));
        parts.push(format!("{}Λ({},{})", if c < 0 { "-" } else { "+" }, na, nb));
    }
    Ok((tot, parts.join(" ")))
}

/// additivity in Loc: Λ(Q̃X∘C̃^e, Q̃Y∘C̃^f) from Λ(X,Y) and the braider degrees
fn eval_direct(t: &mut LambdaTable, j: usize, k: usize) -> Result<i64> {
    let (x1, e1) = k_object(t.ext, j);
    let (x2, e2) = k_object(t.ext, k);
    let base = t.lam2(x1, x2)?;
    Ok(match t.ext.sign {
        Sign::Plus => base + e1 * t.lam2(Piece::C, x2)? - e2 * t.lam2(Piece::C, x1)?,
        Sign::Minus => base - e1 * t.lam2(x2, Piece::C)? + e2 * t.lam2(x1, Piece::C)?,
    })
}

fn jl(x: i64) -> serde_json::Value {
    json!(fmt_q(&qf(x, 2)))
}

/// every case of the Λ-table for K^± (sign of `ext`), expected λ∓(α_j, α_k)
pub fn verify_lasw(base: &CartanDatum, i: usize, sign: Sign) -> Result<Report> {
    let ext = extended(base, i, sign)?;
    let other = extend_cartan(base, i, sign.flip())?;
    let lam_other = lambda_pm(&other, i, sign.flip())?;
    let mut rep = Report::new("lasw", json!({"i": base.labels[i], "sign": sign.suffix()}));
    let mut t = LambdaTable::new(&ext);
    let n = ext.new;
    let idx: Vec<usize> = (0..=n).collect();
    let lab = |j: usize| if j == n { format!("{}{}", base.labels[i], sign.flip().suffix()) } else { base.labels[j].clone() };
    // Loc0 membership of the pieces and the C-vanishings
    let mut pieces = vec![Piece::Letter(i), Piece::New];
    for j in 0..n {
        if j != i {
            pieces.push(Piece::Det(j));
        }
    }
    for p in pieces {
        let name = t.name(p);
        let v = match sign {
            Sign::Plus => t.lam2(Piece::C, p)?,
            Sign::Minus => t.lam2(p, Piece::C)?,
        };
        let what = match sign {
            Sign::Plus => format!("Λ(C+,{})", name),
            Sign::Minus => format!("Λ({},C-)", name),
        };
        rep.push(Case::eq(format!("LaSW:loc0 {}", what), jl(0), jl(v), "module-level"));
        if let Piece::Det(_) = p {
            let w = match sign {
                Sign::Plus => t.lam2(p, Piece::C)?,
                Sign::Minus => t.lam2(Piece::C, p)?,
            };
            let what = match sign {
                Sign::Plus => format!("Λ({},C+)", name),
                Sign::Minus => format!("Λ(C-,{})", name),
            };
            rep.push(Case::eq(format!("LaSW:commute {}", what), jl(0), jl(w), "module-level"));
        }
    }
    for &j in &idx {
        for &k in &idx {
            if j == k {
                continue;
            }
            let expected = 2 * lam_other.eval(j, k);
            let chain = proof_chain(&ext, j, k);
            let (v, text) = eval_chain(&mut t, &chain)?;
            rep.push(Case::eq(format!("LaSW:j={},k={}", lab(j), lab(k)), jl(expected), jl(v), &format!("module-level: {}", text)));
            let d = eval_direct(&mut t, j, k)?;
            rep.push(Case::eq(format!("LaSW:j={},k={} (additivity)", lab(j), lab(k)), jl(expected), jl(d), "module-level: Λ(X,Y) plus braider degrees"));
        }
    }
    Ok(rep)
}

/// Λ(C+, <j i i+>) = −(α_i, α_i) for (α_i, α_j) < 0; also the unmixed prediction
pub fn verify_jcplus(ext: &Extended) -> Result<Vec<Case>> {
    let mut out = Vec::new();
    let c = build_cpm(ext)?;
    let i = ext.i;
    for j in 0..ext.base.rank() {
        if j == i || ext.base.form[i][j] >= 0 {
            continue;
        }
        let m = jiip(ext, j)?;
        let l2 = rmat::lambda2(&c, &m)?;
        let wc = ext.wt_c();
        let wm = m.content().unwrap();
        out.push(Case::eq(
            format!("jC+:Λ(C+,<{}{}{}>)", ext.label(j), ext.label(i), ext.label(ext.new)),
            jl(-2 * ext.base.form[i][i]),
            jl(l2),
            if rmat::is_unmixed(&c, &m) { "unmixed" } else { "r-matrix" },
        ));
        out.push(Case::eq(format!("jC+:λ+(wt C+, wt <{}ii+>)", ext.label(j)), jl(-2 * ext.base.form[i][i]), jl(2 * ext.alg.lam.on_roots(&wc, &wm)), "unmixed law"));
    }
    Ok(out)
}

/// <j i i+>: head of <j>∘C+
pub fn jiip(ext: &Extended, j: usize) -> Result<Module> {
    let c = build_cpm(ext)?;
    let m = gmod::head_of(&ext.letter(j), &c)?;
    Ok(m.with_label(&format!("<{}{}{}>", ext.label(j), ext.label(ext.i), ext.label(ext.new))))
}

/// the C± suite: dimension, unmixedness, Λ(C,<j>) = 0, degree-0 braidings, normalization, vanishing against K_j
pub fn verify_cpm(base: &CartanDatum, i: usize, sign: Sign) -> Result<Report> {
    let ext = extended(base, i, sign)?;
    let s = sign.suffix();
    let mut rep = Report::new("cpm", json!({"i": base.labels[i], "sign": s}));
    let c = build_cpm(&ext)?;
    rep.push(Case::eq(format!("C{}:dim", s), json!(1), json!(c.dim()), "head of a 2-dim convolution"));
    rep.push(Case::eq(format!("C{}:unmixed with R-gmod", s), json!(true), json!(unmixed_against_base(&ext, &c)), "W/W*"));
    let br = nondeg_braider(&c, sign)?;
    for j in 0..ext.alg.datum.rank() {
        let name = match sign {
            Sign::Plus => format!("Λ(C+,<{}>)", ext.label(j)),
            Sign::Minus => format!("Λ(<{}>,C-)", ext.label(j)),
        };
        rep.push(Case::eq(format!("C{}:{}", s, name), jl(0), jl(br.phi2[j]), "nondegenerate braider"));
        let b = br.braid(&ext.letter(j))?;
        rep.push(Case::eq(format!("C{}:deg R_C(<{}>)", s, ext.label(j)), json!(0), json!(b.deg2), b.route));
    }
    let lcc = rmat::lambda2(&c, &c)?;
    rep.push(Case::eq(format!("C{}:Λ(C,C)", s), jl(0), jl(lcc), "r-matrix"));
    let id = br.braid(&c)?;
    rep.push(Case::eq(format!("C{}:R_C(C) = id", s), json!(true), json!(id.map == SMat::identity(id.src.dim())), id.route));
    let wc = ext.wt_c();
    let cc = ext.alg.datum.root_form(&wc, &wc);
    for (m, n) in [(1i64, 1i64), (1, 2), (2, 1)] {
        let a = if m == 1 { c.clone() } else { Module::convolve_all(&vec![&c; m as usize])? };
        let b = if n == 1 { c.clone() } else { Module::convolve_all(&vec![&c; n as usize])? };
        let lt = rmat::lambda_tilde(&a, &b)?;
        rep.push(Case::eq(format!("C{}:H({},{})", s, m, n), json!(fmt_q(&qf(-m * n * cc, 2))), json!(fmt_q(&(-lt))), "-Λ̃(C^m,C^n)"));
    }
    if sign == Sign::Plus {
        rep.extend(verify_jcplus(&ext)?);
    }
    let mut t = LambdaTable::new(&ext);
    for j in 0..base.rank() {
        if j == i {
            continue;
        }
        let name = t.name(Piece::Det(j));
        let a = t.lam2(Piece::C, Piece::Det(j))?;
        let b = t.lam2(Piece::Det(j), Piece::C)?;
        rep.push(Case::eq(format!("C+Kj:Λ(C,{})", name), jl(0), jl(a), "r-matrix"));
        rep.push(Case::eq(format!("C+Kj:Λ({},C)", name), jl(0), jl(b), "r-matrix"));
    }
    // braiding with simples of R-gmod is an isomorphism
    let samples = base_sample(&ext)?;
    for m in &samples {
        let b = br.braid(m)?;
        let iso = b.src.dim() == b.tgt.dim() && b.map.rank() == b.src.dim();
        let d = rmat::delta(&c, m)?;
        rep.push(Case::eq(
            format!("C{}:R_C({}) invertible iff δ(C,M) = 0", s, m.label),
            json!(d.is_zero()),
            json!(iso),
            &format!("{}; δ = {}", b.route, fmt_q(&d)),
        ));
    }
    if samples.len() >= 2 {
        let ok = hexagon(&br, &samples[0], &samples[1])?;
        rep.push(Case::eq(format!("C{}:hexagon({},{})", s, samples[0].label, samples[1].label), json!(true), json!(ok), "unmixed"));
    }
    Ok(rep)
}

/// a few simple modules of R-gmod inside the extended algebra
pub fn base_sample(ext: &Extended) -> Result<Vec<Module>> {
    let mut out = Vec::new();
    for j in 0..ext.base.rank() {
        out.push(ext.letter(j));
    }
    out.push(gmod::simple_power(&ext.alg, ext.i, 2)?.with_label(&format!("<{}^2>", ext.label(ext.i))));
    for j in 0..ext.base.rank() {
        if j != ext.i && ext.base.form[ext.i][j] < 0 {
            out.push(gmod::head_of(&ext.letter(ext.i), &ext.letter(j))?);
            out.push(gmod::head_of(&ext.letter(j), &ext.letter(ext.i))?);
        }
    }
    Ok(out)
}

// ---- Λ-sample for Q̃+ simplicity ----

/// simple modules of R+-gmod used to test "Q̃+(M) simple iff Λ(C+,M) = 0"
pub fn qsimple_sample(ext: &Extended) -> Result<Vec<Module>> {
    let i = ext.i;
    let mut out = Vec::new();
    for j in 0..ext.alg.datum.rank() {
        out.push(ext.letter(j));
    }
    out.push(build_cpm(ext)?);
    out.push(gmod::head_of(&ext.letter(ext.new), &ext.letter(i))?);
    out.push(gmod::simple_power(&ext.alg, i, 2)?.with_label(&format!("<{}^2>", ext.label(i))));
    for j in 0..ext.base.rank() {
        if j != i && ext.base.form[i][j] < 0 {
            out.push(jiip(ext, j)?);
            out.push(gmod::head_of(&ext.letter(i), &ext.letter(j))?);
            out.push(gmod::head_of(&ext.letter(j), &ext.letter(i))?);
            out.push(ext.letter(ext.new).convolution(&ext.letter(j))?.with_label(&format!("<{}>∘<{}>", ext.label(ext.new), ext.label(j))));
            break;
        }
    }
    Ok(out)
}

/// Localization suite: full faithfulness on R-gmod pairs, Q̃+(<j i i+>) = 0, and the simplicity criterion
pub fn verify_loc(base: &CartanDatum, i: usize, levels: (usize, usize)) -> Result<Report> {
    let ext = extended(base, i, Sign::Plus)?;
    let c = build_cpm(&ext)?;
    let br = nondeg_braider(&c, Sign::Plus)?;
    let mut rep = Report::new("loc", json!({"i": base.labels[i], "levels": [levels.0, levels.1]}));
    let sample = base_sample(&ext)?;
    let mut pairs = Vec::new();
    for a in &sample {
        for b in &sample {
            if a.content() == b.content() {
                pairs.push((a.clone(), b.clone()));
            }
        }
    }
    // pairs sharing a weight; add convolutions for nontrivial homs
    let conv_pairs = {
        let mut v = Vec::new();
        for j in 0..base.rank() {
            if j != i && base.form[i][j] < 0 {
                let ij = ext.letter(i).convolution(&ext.letter(j))?;
                let ji = ext.letter(j).convolution(&ext.letter(i))?;
                let h = gmod::head_of(&ext.letter(i), &ext.letter(j))?;
                v.push((ij.clone(), ji));
                v.push((ij.clone(), h.clone()));
                v.push((h, ij));
                break;
            }
        }
        v
    };
    pairs.extend(conv_pairs);
    for (m, n) in pairs.iter() {
        let direct = gmod::hom_space(m, n)?;
        let mut dd = direct.degrees();
        dd.sort();
        let x = LocalObject { x: m.clone(), m: 0 };
        let y = LocalObject { x: n.clone(), m: 0 };
        let a = loc_hom(&br, &x, &y, levels.0)?;
        let b = loc_hom(&br, &x, &y, levels.1)?;
        rep.push(Case::with(
            format!("full-faithful:Hom(({},0),({},0))", m.label, n.label),
            json!(dd),
            json!({"l1": a.degrees, "l2": b.degrees}),
            a.degrees == dd && b.degrees == dd,
            "loc_hom at two levels vs Hom_R",
        ));
    }
    // Q̃+(<j i i+>) = 0
    for j in 0..base.rank() {
        if j == i || base.form[i][j] >= 0 {
            continue;
        }
        let m = jiip(&ext, j)?;
        let x = LocalObject { x: m.clone(), m: 0 };
        let a = loc_hom(&br, &x, &x, levels.0)?;
        let b = loc_hom(&br, &x, &x, levels.1)?;
        rep.push(Case::with(
            format!("jC+:End_Loc({}) degree 0", m.label),
            json!(0),
            json!({"l1": a.dim0(), "l2": b.dim0()}),
            a.dim0() == 0 && b.dim0() == 0,
            "loc_hom",
        ));
    }
    // simple iff Λ(C+,M) = 0
    for m in qsimple_sample(&ext)? {
        let l2 = rmat::lambda2(&c, &m)?;
        let x = LocalObject { x: m.clone(), m: 0 };
        let a = loc_hom(&br, &x, &x, levels.0)?;
        let b = loc_hom(&br, &x, &x, levels.1)?;
        let simple = a.dim0() == 1 && b.dim0() == 1;
        let zero = a.dim0() == 0 && b.dim0() == 0;
        rep.push(Case::with(
            format!("Qsimple:{}", m.label),
            json!({"Lambda(C+,M)=0": l2 == 0}),
            json!({"Lambda(C+,M)": fmt_q(&qf(l2, 2)), "End0": [a.dim0(), b.dim0()]}),
            (l2 == 0 && simple) || (l2 != 0 && zero),
            "loc_hom",
        ));
    }
    Ok(rep)
}

// ---- Δ-table ----

fn poly_render(p: &Poly) -> String {
    rmat::render_zw(p)
}

/// Q_{j,k}(x_1, z) on a basis vector, with x_1 and z given as matrices
fn apply_q(p: &Poly, x1: &SMat, z: &SMat, v: &SVec) -> SVec {
    let mut out = SVec::new();
    for (e, c) in &p.terms {
        let mut w = v.clone();
        for _ in 0..e[1] {
            w = z.apply(&w);
        }
        for _ in 0..e[0] {
            w = x1.apply(&w);
        }
        crate::linalg::axpy(&mut out, c, &w);
    }
    out
}

pub fn verify_desw(base: &CartanDatum, i: usize, ntrunc: (u32, u32), seed: u64) -> Result<Report> {
    let ext = extended(base, i, Sign::Plus)?;
    let n = ext.new;
    let balg = Alg::canonical(base);
    let mut rep = Report::new("desw", json!({"i": base.labels[i], "trunc": [ntrunc.0, ntrunc.1]}));
    let others: Vec<usize> = (0..base.rank()).filter(|&j| j != i).collect();
    let det_label = |j: usize| if base.gcm[i][j] == 0 { AffLabel::Letter(j) } else { AffLabel::Det(i, j) };
    // j, k in I \ {i}
    for &j in &others {
        for &k in &others {
            if j == k {
                continue;
            }
            let expected = balg.params.get(j, k).normalized().0;
            let (d4, d5) = rmat::delta_stable(&balg, &det_label(j), &det_label(k), ntrunc.0, ntrunc.1)?;
            rep.push(Case::with(
                format!("DeSW:j={},k={}", base.labels[j], base.labels[k]),
                json!(poly_render(&expected)),
                json!({"N1": poly_render(&d4.delta), "N2": poly_render(&d5.delta)}),
                d4.delta == expected && d5.delta == expected,
                "module-level: renormalized R-matrices of <i^c j>_z",
            ));
            let (l4, _) = rmat::delta_stable(&balg, &AffLabel::Letter(j), &AffLabel::Letter(k), ntrunc.0, ntrunc.1)?;
            rep.push(Case::eq(
                format!("DeSW:j={},k={} (E_i reduction)", base.labels[j], base.labels[k]),
                json!(poly_render(&d4.delta)),
                json!(poly_render(&l4.delta)),
                "Δ(<j>_z,<k>_w)",
            ));
        }
    }
    // (i−, k) and (k, i−): δ = 0 forces Δ ≡ 1
    let lasw = LaswValues::compute(&ext)?;
    for &k in &others {
        for (a, b) in [(n, k), (k, n)] {
            let d2 = lasw.get(a, b) + lasw.get(b, a);
            let lab = |x: usize| if x == n { format!("{}-", base.labels[i]) } else { base.labels[x].clone() };
            rep.push(Case::with(
                format!("DeSW:j={},k={}", lab(a), lab(b)),
                json!("1"),
                json!({"delta": fmt_q(&qf(d2, 4)), "Delta": if d2 == 0 { "1" } else { "?" }}),
                d2 == 0,
                "shadow: δ = 0 from the Λ-table",
            ));
        }
    }
    // (i, i−): (z − w) divides Δ with degree 2 d_i
    {
        let (d4, d5) = rmat::delta_stable(&ext.alg, &AffLabel::Letter(i), &AffLabel::Letter(n), ntrunc.0, ntrunc.1)?;
        let zw = Poly::var(2, 0).sub(&Poly::var(2, 1));
        let divisible = div2(&d4.delta, &zw, 0, 1).is_some();
        let zd = 2 * ext.alg.xdeg(i as u8);
        let deg = rmat::poly_degree2(&d4.delta, zd, zd);
        let expected_deg = 2 * base.form[i][i];
        rep.push(Case::with(
            format!("DeSW:j={},k={}-", base.labels[i], base.labels[i]),
            json!({"divisor": "z-w", "degree2": expected_deg}),
            json!({"Delta": poly_render(&d4.delta), "N2": poly_render(&d5.delta), "degree2": deg, "divisible": divisible}),
            divisible && deg == Some(expected_deg) && d4.delta == d5.delta,
            "shadow: Δ(<i>_z,<i+>_w) in R+",
        ));
        // C+ sits in <i+>∘<i>, and L_1(i)∘E_i(C+) ↠ C+
        let c = build_cpm(&ext)?;
        let tgt = ext.letter(n).convolution(&ext.letter(i))?;
        let h = gmod::hom_space(&c, &tgt)?;
        let mono = h.maps.iter().any(|(_, f)| f.rank() == 1);
        rep.push(Case::eq(format!("DeSW:j={},k={}- mono C+ -> <i+>∘<i>", base.labels[i], base.labels[i]), json!(true), json!(mono), "shadow: monomorphism"));
        let w = dual_witness(&c, i, 1, Sign::Plus, seed)?;
        rep.push(Case::eq(format!("DeSW:j={},k={}- epi L_1∘E_i(C+) -> C+", base.labels[i], base.labels[i]), json!(true), json!(w.surjective()), "shadow: evaluation"));
    }
    // (j, i): Q_{i,j}(z, z_j) kills E_i(K_j) with z = x_1
    for &j in &others {
        if base.gcm[i][j] == 0 {
            continue;
        }
        let a = rmat::affinize(&balg, AffLabel::Det(i, j), ntrunc.0, 1)?;
        let m = &a.module;
        let p = balg.params.get(i, j);
        let slice: Vec<usize> = (0..m.dim()).filter(|&t| m.words[t][0] as usize == i).collect();
        let kills = slice.iter().all(|&t| apply_q(p, &m.x[0], a.z(), &unit(t)).is_empty());
        rep.push(Case::with(
            format!("DeSW:j={},k={}", base.labels[j], base.labels[i]),
            json!({"annihilator": poly_render(&p.normalized().0), "degree2": -4 * base.form[i][j]}),
            json!({"kills": kills, "slice": slice.len(), "2delta2": lasw.get(i, j) + lasw.get(j, i)}),
            kills && !slice.is_empty() && lasw.get(i, j) + lasw.get(j, i) == -4 * base.form[i][j],
            "shadow: Q_{i,j}(x_1,z_j) on E_i<i^c j>_z and deg Δ = 2δ",
        ));
    }
    Ok(rep)
}

/// doubled Λ(K_j, K_k) from the additivity route
pub struct LaswValues {
    vals: HashMap<(usize, usize), i64>,
}

impl LaswValues {
    pub fn compute(ext: &Extended) -> Result<LaswValues> {
        let mut t = LambdaTable::new(ext);
        let mut vals = HashMap::new();
        for j in 0..=ext.new {
            for k in 0..=ext.new {
                if j != k {
                    vals.insert((j, k), eval_direct(&mut t, j, k)?);
                }
            }
        }
        Ok(LaswValues { vals })
    }

    pub fn get(&self, j: usize, k: usize) -> i64 {
        self.vals[&(j, k)]
    }
}
