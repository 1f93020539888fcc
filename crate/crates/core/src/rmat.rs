use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{KlrError, Result};
use crate::gmod::{self, Module};
use crate::linalg::{fmt_q, q, qf, unit, Echelon, SMat, SVec, Q};
use crate::perm;
use crate::poly::{div2, gcd2, Poly};
use crate::qha::{Alg, Elem};

/// convolution of `fs` with factors p and p+1 exchanged
fn swapped<'a>(fs: &[&'a Module], p: usize) -> Vec<&'a Module> {
    let mut g = fs.to_vec();
    g.swap(p, p + 1);
    g
}

fn tuple_index(dims: &[usize], idx: &[usize]) -> usize {
    let mut k = 0;
    for (d, i) in dims.iter().zip(idx) {
        k = k * d + i;
    }
    k
}

fn tuple_of(dims: &[usize], mut k: usize) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for t in (0..dims.len()).rev() {
        out[t] = k % dims[t];
        k /= dims[t];
    }
    out
}

/// The map F_0∘…∘F_{r-1} -> (factors p, p+1 exchanged) sending a pure tensor
/// u_p ⊗ u_{p+1} to phi_w (u_{p+1} ⊗ u_p), or tau_w in the unmixed form.
pub fn swap_map_on(fs: &[&Module], p: usize, src: &Module, tgt: &Module, use_phi: bool) -> Result<SMat> {
    let alg = &fs[0].alg;
    let src_ind = src.ind.as_ref().expect("induced source");
    let tgt_ind = tgt.ind.as_ref().expect("induced target");
    let dims: Vec<usize> = fs.iter().map(|m| m.dim()).collect();
    let hts: Vec<usize> = fs.iter().map(|m| m.height()).collect();
    let g = swapped(fs, p);
    let gdims: Vec<usize> = g.iter().map(|m| m.dim()).collect();
    let n: usize = hts.iter().sum();
    let start: usize = hts[..p].iter().sum();
    let (h1, h2) = (hts[p], hts[p + 1]);
    // permutation acting on the target-order word (…, b, a, …) to reach (…, a, b, …)
    let mut w = perm::identity(n);
    let inner = perm::w_mn(h2, h1);
    for k in 0..h1 + h2 {
        w[start + k] = (start + inner[k] as usize) as u8;
    }
    let word = perm::canon(&w);
    let id_tgt = tgt_ind.shuffles.iter().position(|s| perm::is_identity(s)).unwrap();
    let tgt_pos: HashMap<(usize, usize), usize> = tgt_ind.of.iter().enumerate().map(|(k, &sj)| (sj, k)).collect();
    let mut phi_cache: HashMap<Vec<u8>, Elem> = HashMap::new();
    let mut base_img: Vec<SVec> = Vec::with_capacity(src_ind.parent.dim());
    for j in 0..src_ind.parent.dim() {
        let mut t = tuple_of(&dims, j);
        t.swap(p, p + 1);
        let k = tgt_pos[&(id_tgt, tuple_index(&gdims, &t))];
        let nu = tgt.words[k].clone();
        let e = match phi_cache.get(&nu) {
            Some(e) => e.clone(),
            None => {
                let idem = Elem::idem(&nu);
                let e = if use_phi { alg.phi_word_left(&word, &idem)? } else { alg.word_left(&word, &idem)? };
                phi_cache.insert(nu.clone(), e.clone());
                e
            }
        };
        base_img.push(tgt.apply_elem(&e, &unit(k)));
    }
    let mut f = SMat::zero(tgt.dim(), src.dim());
    for (k, &(s, j)) in src_ind.of.iter().enumerate() {
        f.cols[k] = tgt.apply_word(&perm::canon(&src_ind.shuffles[s]), &base_img[j]);
    }
    Ok(f)
}

pub struct SwapMap {
    pub src: Module,
    pub tgt: Module,
    pub map: SMat,
}

pub fn swap_map(fs: &[&Module], p: usize, use_phi: bool) -> Result<SwapMap> {
    let src = induced_all(fs)?;
    let tgt = induced_all(&swapped(fs, p))?;
    let map = swap_map_on(fs, p, &src, &tgt, use_phi)?;
    Ok(SwapMap { src, tgt, map })
}

/// convolution product keeping the induced structure even for a single factor
fn induced_all(fs: &[&Module]) -> Result<Module> {
    let mut p = fs[0].clone();
    for m in &fs[1..] {
        p = p.boxprod(m)?;
    }
    let mut out = if p.blocks.len() > 1 {
        p.induce()?
    } else {
        let mut m = p.clone();
        m.ind = Some(Arc::new(gmod::IndData {
            parent: Arc::new(p.clone()),
            shuffles: vec![perm::identity(p.height())],
            of: (0..p.dim()).map(|j| (0, j)).collect(),
        }));
        m
    };
    out.label = fs.iter().map(|m| m.label.clone()).collect::<Vec<_>>().join("∘");
    Ok(out)
}

/// R^univ_{M,N}: M∘N -> N∘M
pub fn universal_r(m: &Module, n: &Module) -> Result<SwapMap> {
    swap_map(&[m, n], 0, true)
}

/// the unmixed R-matrix u⊗v -> tau_{w[n,m]}(v⊗u)
pub fn unmixed_r(m: &Module, n: &Module) -> Result<SwapMap> {
    swap_map(&[m, n], 0, false)
}

pub fn is_unmixed(m: &Module, n: &Module) -> bool {
    let a = m.suffix_weights();
    let b = n.prefix_weights();
    a.intersection(&b).all(|g| g.iter().all(|&x| x == 0))
}

pub fn commutes(f: &SMat, src: &Module, tgt: &Module, with_ends: bool) -> bool {
    let gs = src.generators();
    let gt = tgt.generators();
    for (name, g) in &gs {
        let Some((_, h)) = gt.iter().find(|x| &x.0 == name) else { return false };
        if f.mul(g) != h.mul(f) {
            return false;
        }
    }
    if with_ends {
        for e in &src.ends {
            if let Some(e2) = tgt.end_by_var(e.var) {
                if f.mul(&e.mat) != e2.mat.mul(f) {
                    return false;
                }
            }
        }
    }
    true
}

/// doubled degree of a homogeneous map, None for the zero map
pub fn map_degree(f: &SMat, src: &Module, tgt: &Module) -> Option<i64> {
    for (c, col) in f.cols.iter().enumerate() {
        if let Some((&r, _)) = col.iter().next() {
            return Some(tgt.degs[r] - src.degs[c]);
        }
    }
    None
}

pub fn is_homogeneous(f: &SMat, src: &Module, tgt: &Module) -> bool {
    let d = map_degree(f, src, tgt);
    f.cols.iter().enumerate().all(|(c, col)| col.keys().all(|&r| Some(tgt.degs[r] - src.degs[c]) == d))
}

#[derive(Clone, Debug)]
pub struct RMatrix {
    pub src: Module,
    pub tgt: Module,
    pub map: SMat,
    /// doubled
    pub lambda2: i64,
}

/// the spanning hom of HOM(M∘N, N∘M) with its degree
pub fn rmatrix(m: &Module, n: &Module) -> Result<RMatrix> {
    let src = m.convolution(n)?;
    let tgt = n.convolution(m)?;
    let h = gmod::hom_space(&src, &tgt)?;
    if h.dim() != 1 {
        return Err(KlrError::NotLambdaDefinable(h.dim()));
    }
    let (d, f) = h.maps.into_iter().next().unwrap();
    Ok(RMatrix { src, tgt, map: f, lambda2: d })
}

pub fn lambda2(m: &Module, n: &Module) -> Result<i64> {
    Ok(rmatrix(m, n)?.lambda2)
}

fn wt_pair(m: &Module, n: &Module) -> i64 {
    let a = m.content().unwrap_or_else(|| vec![0; m.alg.datum.rank()]);
    let b = n.content().unwrap_or_else(|| vec![0; m.alg.datum.rank()]);
    m.alg.lam.on_roots(&a, &b)
}

pub fn lambda(m: &Module, n: &Module) -> Result<Q> {
    Ok(qf(lambda2(m, n)?, 2))
}

/// Λ̃ = (Λ − λ(wt M, wt N))/2
pub fn lambda_tilde(m: &Module, n: &Module) -> Result<Q> {
    Ok((lambda(m, n)? - q(wt_pair(m, n))) / q(2))
}

/// δ = (Λ(M,N) + Λ(N,M))/2
pub fn delta(m: &Module, n: &Module) -> Result<Q> {
    Ok(qf(lambda2(m, n)? + lambda2(n, m)?, 4))
}

// ---- affinizations ----

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AffLabel {
    /// <i>_z
    Letter(usize),
    /// <i^c j>_{z_j}
    Det(usize, usize),
    /// <i^c>_{z_j} = E*_j <i^c j>_{z_j}
    Power(usize, usize),
}

#[derive(Clone, Debug)]
pub struct Affine {
    pub module: Module,
    pub var: usize,
    pub ntrunc: u32,
    pub label: AffLabel,
}

impl Affine {
    pub fn z(&self) -> &SMat {
        &self.module.end_by_var(self.var).unwrap().mat
    }

    pub fn fiber(&self) -> Module {
        self.module.special_fiber(self.var)
    }

    pub fn zdeg(&self) -> i64 {
        self.module.end_by_var(self.var).unwrap().deg
    }

    /// affinization axiom: the central elements p_{i,beta} act nontrivially
    pub fn p_nonzero(&self) -> Result<bool> {
        let m = &self.module;
        let alg = &m.alg;
        let content = m.content().unwrap();
        for i in 0..alg.datum.rank() {
            let p = alg.central_p(i, &content);
            let nz = (0..m.dim()).any(|j| !m.apply_elem(&p, &unit(j)).is_empty());
            if !nz {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_free(&self) -> bool {
        match &self.module.free {
            Some(f) => f.gens * self.ntrunc as usize == self.module.dim(),
            None => false,
        }
    }
}

pub fn affinize(alg: &Arc<Alg>, label: AffLabel, ntrunc: u32, var: usize) -> Result<Affine> {
    if ntrunc < 2 {
        return Err(KlrError::CeilingTooSmall("truncation below 2".into()));
    }
    let module = match &label {
        AffLabel::Letter(i) => Module::letter_affine(alg, *i, ntrunc as usize, var),
        AffLabel::Det(i, j) => {
            let c = (-alg.datum.gcm[*i][*j]) as usize;
            gmod::determinantial_affine(alg, *i, *j, c, ntrunc, var)?
        }
        AffLabel::Power(i, j) => {
            let c = (-alg.datum.gcm[*i][*j]) as usize;
            let d = gmod::determinantial_affine(alg, *i, *j, c, ntrunc, var)?;
            let mut e = d.e_i_star(*j);
            e.label = format!("<{}^{}>_z{}", alg.datum.labels[*i], c, alg.datum.labels[*j]);
            e.make_free(var)?
        }
    };
    Ok(Affine { module, var, ntrunc, label })
}

/// entries of a k[vars]-linear map between free modules as polynomials
pub fn poly_matrix(f: &SMat, src: &Module, tgt: &Module, vars: &[usize]) -> Vec<Vec<Poly>> {
    let fs = src.free.as_ref().expect("free source");
    let ft = tgt.free.as_ref().expect("free target");
    let nv = vars.len();
    let mut out = vec![vec![Poly::zero(nv); fs.gens]; ft.gens];
    for (c, (g, pw)) in fs.of.iter().enumerate() {
        if pw.iter().any(|&e| e != 0) {
            continue;
        }
        for (&t, coef) in &f.cols[c] {
            let (r, tp) = &ft.of[t];
            let mut e = vec![0u32; nv];
            for (k, &v) in ft.vars.iter().enumerate() {
                let pos = vars.iter().position(|&x| x == v).expect("variable");
                e[pos] = tp[k];
            }
            out[*r][*g].add_term(e, coef.clone());
        }
    }
    out
}

fn truncate(p: &Poly, n: u32) -> Poly {
    let mut out = Poly::zero(p.nvars);
    for (e, c) in &p.terms {
        if e.iter().all(|&x| x < n) {
            out.add_term(e.clone(), c.clone());
        }
    }
    out
}

pub fn poly_mat_mul(a: &[Vec<Poly>], b: &[Vec<Poly>], ntrunc: u32) -> Vec<Vec<Poly>> {
    let nv = a.first().and_then(|r| r.first()).map(|p| p.nvars).unwrap_or(2);
    let rows = a.len();
    let inner = b.len();
    let cols = b.first().map(|r| r.len()).unwrap_or(0);
    let mut out = vec![vec![Poly::zero(nv); cols]; rows];
    for i in 0..rows {
        for k in 0..inner {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..cols {
                if !b[k][j].is_zero() {
                    out[i][j] = out[i][j].add(&truncate(&a[i][k].mul(&b[k][j]), ntrunc));
                }
            }
        }
    }
    out
}

/// z^{-s} R^univ_{M^,N} for one affine factor; returns (s, fibers and the map at z = 0)
#[derive(Clone, Debug)]
pub struct Renormalized {
    pub order: u32,
    pub src_fiber: Module,
    pub tgt_fiber: Module,
    pub at_zero: SMat,
    /// doubled degree of R^ren
    pub deg2: i64,
}

pub fn renormalized_r(ma: &Affine, n: &Module) -> Result<Renormalized> {
    let sm = universal_r(&ma.module, n)?;
    let z_tgt = sm.tgt.end_by_var(ma.var).unwrap().mat.clone();
    let z_src = sm.src.end_by_var(ma.var).unwrap().mat.clone();
    if sm.map.is_zero() {
        return Err(KlrError::TruncationExhausted("universal map vanishes".into()));
    }
    // s: largest with image inside z^s X
    let mut s = 0u32;
    let mut zpow = SMat::identity(sm.tgt.dim());
    loop {
        let next = z_tgt.mul(&zpow);
        let img = sm.tgt.image_of(&next);
        if sm.map.cols.iter().all(|c| img.contains(c)) {
            s += 1;
            zpow = next;
            if s + 1 >= ma.ntrunc {
                return Err(KlrError::TruncationExhausted(format!("order of zero reaches {}", s)));
            }
        } else {
            break;
        }
    }
    // divide: pick preimages under z^s on the target, generator by generator
    let mut ts = crate::linalg::TrackedSpan::new();
    let zcols: Vec<SVec> = zpow.cols.clone();
    for c in &zcols {
        ts.insert(c);
    }
    let mut ren = SMat::zero(sm.tgt.dim(), sm.src.dim());
    for (c, col) in sm.map.cols.iter().enumerate() {
        let co = ts.coords(col).ok_or_else(|| KlrError::TruncationExhausted("division by z".into()))?;
        let mut v = SVec::new();
        for (&k, a) in &co {
            crate::linalg::axpy(&mut v, a, &unit(k));
        }
        ren.cols[c] = v;
    }
    // the quotient is only defined modulo ker z^s; pass to z = 0 fibers
    let src_img = sm.src.image_of(&z_src);
    let tgt_img = sm.tgt.image_of(&z_tgt);
    let (src_f, _) = sm.src.quotient(&src_img);
    let (tgt_f, ptgt) = sm.tgt.quotient(&tgt_img);
    let keep_src: Vec<usize> = (0..sm.src.dim()).filter(|j| !src_img.rows.contains_key(j)).collect();
    let mut at0 = SMat::zero(tgt_f.dim(), src_f.dim());
    for (a, &j) in keep_src.iter().enumerate() {
        at0.cols[a] = ptgt.apply(&ren.cols[j]);
    }
    let mut src_f = src_f;
    let mut tgt_f = tgt_f;
    src_f.ends.retain(|e| e.var != ma.var);
    tgt_f.ends.retain(|e| e.var != ma.var);
    if at0.is_zero() {
        return Err(KlrError::TruncationExhausted("renormalized map vanishes at z = 0".into()));
    }
    let deg2 = map_degree(&at0, &src_f, &tgt_f).unwrap();
    Ok(Renormalized { order: s, src_fiber: src_f, tgt_fiber: tgt_f, at_zero: at0, deg2 })
}

#[derive(Clone, Debug)]
pub struct DeltaResult {
    /// normalized Δ in (z, w)
    pub delta: Poly,
    /// scalar removed by normalization
    pub scalar: Q,
    pub ren_mn: Vec<Vec<Poly>>,
    pub ren_nm: Vec<Vec<Poly>>,
    /// doubled degrees of the renormalized maps
    pub deg_mn: i64,
    pub deg_nm: i64,
    pub ntrunc: u32,
}

fn gcd_entries(m: &[Vec<Poly>]) -> Poly {
    let mut g: Option<Poly> = None;
    for row in m {
        for p in row {
            if p.is_zero() {
                continue;
            }
            g = Some(match g {
                None => p.normalized().0,
                Some(h) => gcd2(&h, p, 0, 1),
            });
        }
    }
    g.unwrap_or_else(|| Poly::zero(2))
}

fn divide_entries(m: &[Vec<Poly>], g: &Poly) -> Result<Vec<Vec<Poly>>> {
    m.iter()
        .map(|row| {
            row.iter()
                .map(|p| {
                    if p.is_zero() {
                        Ok(p.clone())
                    } else {
                        div2(p, g, 0, 1).ok_or_else(|| KlrError::NotScalar("entry not divisible by gcd".into()))
                    }
                })
                .collect()
        })
        .collect()
}

fn deg_of_poly_entry(m: &[Vec<Poly>], src: &Module, tgt: &Module, zd: i64, wd: i64) -> Option<i64> {
    let fs = src.free.as_ref()?;
    let ft = tgt.free.as_ref()?;
    let gdeg_src: BTreeMap<usize, i64> = fs.of.iter().enumerate().filter(|(_, (_, p))| p.iter().all(|&e| e == 0)).map(|(k, (g, _))| (*g, src.degs[k])).collect();
    let gdeg_tgt: BTreeMap<usize, i64> = ft.of.iter().enumerate().filter(|(_, (_, p))| p.iter().all(|&e| e == 0)).map(|(k, (g, _))| (*g, tgt.degs[k])).collect();
    for (r, row) in m.iter().enumerate() {
        for (c, p) in row.iter().enumerate() {
            if let Some((e, _)) = p.terms.iter().next() {
                return Some(gdeg_tgt[&r] + e[0] as i64 * zd + e[1] as i64 * wd - gdeg_src[&c]);
            }
        }
    }
    None
}

/// Δ(M^, N^) from the renormalized R-matrices of two affinizations
pub fn delta_poly(ma: &Affine, na: &Affine) -> Result<DeltaResult> {
    let vars = [ma.var, na.var];
    let ntr = ma.ntrunc.min(na.ntrunc);
    let mn = universal_r(&ma.module, &na.module)?;
    let nm_src = mn.tgt.clone();
    let nm_tgt = mn.src.clone();
    let nm = swap_map_on(&[&na.module, &ma.module], 0, &nm_src, &nm_tgt, true)?;
    if !commutes(&mn.map, &mn.src, &mn.tgt, true) || !commutes(&nm, &nm_src, &nm_tgt, true) {
        return Err(KlrError::HypothesisFailed("universal R-matrix is not a module map".into()));
    }
    let a = poly_matrix(&mn.map, &mn.src, &mn.tgt, &vars);
    let b = poly_matrix(&nm, &nm_src, &nm_tgt, &vars);
    let ga = gcd_entries(&a);
    let gb = gcd_entries(&b);
    let ra = divide_entries(&a, &ga)?;
    let rb = divide_entries(&b, &gb)?;
    for r in [&ra, &rb] {
        let nonzero_at_origin = r.iter().flatten().any(|p| !p.constant_term().is_zero());
        if !nonzero_at_origin {
            return Err(KlrError::TruncationExhausted("renormalized map vanishes at the origin".into()));
        }
    }
    let prod = poly_mat_mul(&rb, &ra, ntr);
    let d = prod.first().and_then(|r| r.first()).cloned().unwrap_or_else(|| Poly::zero(2));
    for (i, row) in prod.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            let expect = if i == j { d.clone() } else { Poly::zero(2) };
            if *p != expect {
                return Err(KlrError::NotScalar(format!("entry ({}, {})", i, j)));
            }
        }
    }
    let (delta, scalar) = d.normalized();
    let zd = ma.zdeg();
    let wd = na.zdeg();
    let deg_mn = deg_of_poly_entry(&ra, &mn.src, &mn.tgt, zd, wd).unwrap_or(0);
    let deg_nm = deg_of_poly_entry(&rb, &nm_src, &nm_tgt, zd, wd).unwrap_or(0);
    Ok(DeltaResult { delta, scalar, ren_mn: ra, ren_nm: rb, deg_mn, deg_nm, ntrunc: ntr })
}

/// Δ at two truncations; errors unless both agree
pub fn delta_stable(alg: &Arc<Alg>, a: &AffLabel, b: &AffLabel, n1: u32, n2: u32) -> Result<(DeltaResult, DeltaResult)> {
    let r1 = delta_poly(&affinize(alg, a.clone(), n1, 0)?, &affinize(alg, b.clone(), n1, 1)?)?;
    let r2 = delta_poly(&affinize(alg, a.clone(), n2, 0)?, &affinize(alg, b.clone(), n2, 1)?)?;
    if r1.delta != r2.delta {
        return Err(KlrError::TruncationExhausted(format!("Δ differs between truncations {} and {}", n1, n2)));
    }
    Ok((r1, r2))
}

pub fn render_zw(p: &Poly) -> String {
    p.render(&["z", "w"])
}

/// weighted degree of a homogeneous Δ in the doubled grading
pub fn poly_degree2(p: &Poly, zd: i64, wd: i64) -> Option<i64> {
    p.terms.keys().next().map(|e| e[0] as i64 * zd + e[1] as i64 * wd)
}

// ---- Yang–Baxter ----

/// both sides of the braid relation for R^univ on L∘M∘N -> N∘M∘L
pub fn yang_baxter(l: &Module, m: &Module, n: &Module) -> Result<(SMat, SMat)> {
    // R12, R23, R12
    let a1 = swap_map(&[l, m, n], 0, true)?;
    let a2 = swap_map(&[m, l, n], 1, true)?;
    let a3 = swap_map(&[m, n, l], 0, true)?;
    let left = a3.map.mul(&a2.map).mul(&a1.map);
    let b1 = swap_map(&[l, m, n], 1, true)?;
    let b2 = swap_map(&[l, n, m], 0, true)?;
    let b3 = swap_map(&[n, l, m], 1, true)?;
    let right = b3.map.mul(&b2.map).mul(&b1.map);
    Ok((left, right))
}

pub fn fmt_matrix(m: &SMat) -> Vec<Vec<String>> {
    (0..m.rows).map(|r| (0..m.ncols()).map(|c| fmt_q(&m.get(r, c))).collect()).collect()
}

/// image of a map as a submodule of the target
pub fn image(f: &SMat, tgt: &Module) -> Echelon {
    tgt.image_of(f)
}
