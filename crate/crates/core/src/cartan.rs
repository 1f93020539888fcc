use serde::{Deserialize, Serialize};

use crate::error::{KlrError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn suffix(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Records how an extended datum was obtained from its base.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Extension {
    pub i: usize,
    pub sign: Sign,
    /// index of the adjoined vertex i±
    pub new: usize,
    pub base_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CartanDatum {
    pub labels: Vec<String>,
    pub gcm: Vec<Vec<i64>>,
    pub sym: Vec<i64>,
    pub form: Vec<Vec<i64>>,
    pub ext: Option<Extension>,
}

#[derive(Serialize, Deserialize)]
struct CartanJson {
    index_set: Vec<String>,
    gcm: Vec<Vec<i64>>,
    symmetrizers: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
pub struct ExtensionJson {
    pub base: String,
    pub i: String,
    pub sign: Sign,
}

pub fn build_cartan(matrix: &[Vec<i64>], sym: &[i64]) -> Result<CartanDatum> {
    let labels = (1..=matrix.len()).map(|k| k.to_string()).collect();
    build_cartan_labeled(labels, matrix, sym)
}

pub fn build_cartan_labeled(labels: Vec<String>, matrix: &[Vec<i64>], sym: &[i64]) -> Result<CartanDatum> {
    let n = matrix.len();
    if labels.len() != n || sym.len() != n {
        return Err(KlrError::NotGCM("size mismatch between matrix, labels and symmetrizers".into()));
    }
    for (j, row) in matrix.iter().enumerate() {
        if row.len() != n {
            return Err(KlrError::NotGCM(format!("row {} has length {}", j, row.len())));
        }
        if row[j] != 2 {
            return Err(KlrError::NotGCM(format!("diagonal entry {} is {}", j, row[j])));
        }
        for k in 0..n {
            if k == j {
                continue;
            }
            if row[k] > 0 {
                return Err(KlrError::NotGCM(format!("positive off-diagonal entry at ({}, {})", j, k)));
            }
            if (row[k] == 0) != (matrix[k][j] == 0) {
                return Err(KlrError::NotGCM(format!("zero pattern not symmetric at ({}, {})", j, k)));
            }
        }
    }
    if sym.iter().any(|&d| d <= 0) {
        return Err(KlrError::NotSymmetrizable("symmetrizers must be positive".into()));
    }
    for j in 0..n {
        for k in 0..n {
            if sym[j] * matrix[j][k] != sym[k] * matrix[k][j] {
                return Err(KlrError::NotSymmetrizable(format!("d_{}c_{}{} != d_{}c_{}{}", j, j, k, k, k, j)));
            }
        }
    }
    let form = (0..n).map(|j| (0..n).map(|k| sym[j] * matrix[j][k]).collect()).collect();
    Ok(CartanDatum { labels, gcm: matrix.to_vec(), sym: sym.to_vec(), form, ext: None })
}

pub fn preset(name: &str) -> Result<CartanDatum> {
    let (m, d): (Vec<Vec<i64>>, Vec<i64>) = match name {
        "A1" => (vec![vec![2]], vec![1]),
        "A2" => (vec![vec![2, -1], vec![-1, 2]], vec![1, 1]),
        "A3" => (vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]], vec![1, 1, 1]),
        "B2" => (vec![vec![2, -1], vec![-2, 2]], vec![2, 1]),
        "C2" => (vec![vec![2, -2], vec![-1, 2]], vec![1, 2]),
        _ => return Err(KlrError::UnknownIndex(format!("no preset named {}", name))),
    };
    build_cartan(&m, &d)
}

pub fn extend_cartan(datum: &CartanDatum, i: usize, sign: Sign) -> Result<CartanDatum> {
    let n = datum.rank();
    if i >= n {
        return Err(KlrError::UnknownIndex(format!("{}", i)));
    }
    let mut gcm = vec![vec![0i64; n + 1]; n + 1];
    for j in 0..n {
        for k in 0..n {
            gcm[j][k] = datum.gcm[j][k];
        }
    }
    gcm[n][n] = 2;
    gcm[i][n] = -1;
    gcm[n][i] = -1;
    let mut sym = datum.sym.clone();
    sym.push(datum.sym[i]);
    let mut labels = datum.labels.clone();
    labels.push(format!("{}{}", datum.labels[i], sign.suffix()));
    let mut form = vec![vec![0i64; n + 1]; n + 1];
    for j in 0..n {
        for k in 0..n {
            form[j][k] = datum.form[j][k];
        }
    }
    let aii = datum.form[i][i];
    form[i][n] = -aii / 2;
    form[n][i] = -aii / 2;
    form[n][n] = aii;
    Ok(CartanDatum { labels, gcm, sym, form, ext: Some(Extension { i, sign, new: n, base_rank: n }) })
}

impl CartanDatum {
    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        let norm = label.replace('−', "-");
        self.labels.iter().position(|l| *l == norm).ok_or_else(|| KlrError::UnknownIndex(label.to_string()))
    }

    pub fn pair(&self, j: usize, k: usize) -> i64 {
        self.form[j][k]
    }

    pub fn root_form(&self, b: &[i64], g: &[i64]) -> i64 {
        let mut s = 0;
        for j in 0..self.rank() {
            if b[j] == 0 {
                continue;
            }
            for k in 0..self.rank() {
                s += b[j] * g[k] * self.form[j][k];
            }
        }
        s
    }

    pub fn max_root_norm(&self) -> i64 {
        (0..self.rank()).map(|j| self.form[j][j]).max().unwrap_or(2)
    }

    /// root vector of a word
    pub fn content(&self, word: &[u8]) -> Vec<i64> {
        let mut v = vec![0i64; self.rank()];
        for &a in word {
            v[a as usize] += 1;
        }
        v
    }

    /// s_i(α) on root vectors of the base lattice
    pub fn reflect_root(&self, i: usize, b: &[i64]) -> Vec<i64> {
        let mut out = b.to_vec();
        let mut coeff = 0;
        for k in 0..self.rank() {
            coeff += self.gcm[i][k] * b[k];
        }
        out[i] -= coeff;
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CartanJson {
            index_set: self.labels.clone(),
            gcm: self.gcm.clone(),
            symmetrizers: self.sym.clone(),
        })
        .unwrap()
    }

    pub fn from_json(v: &serde_json::Value) -> Result<CartanDatum> {
        let c: CartanJson = serde_json::from_value(v.clone()).map_err(|e| KlrError::NotGCM(e.to_string()))?;
        build_cartan_labeled(c.index_set, &c.gcm, &c.symmetrizers)
    }

    pub fn extension_json(&self) -> Option<serde_json::Value> {
        self.ext.as_ref().map(|e| {
            serde_json::to_value(ExtensionJson {
                base: "base".into(),
                i: self.labels[e.i].clone(),
                sign: e.sign,
            })
            .unwrap()
        })
    }

    pub fn base(&self) -> CartanDatum {
        match &self.ext {
            None => self.clone(),
            Some(e) => {
                let n = e.base_rank;
                CartanDatum {
                    labels: self.labels[..n].to_vec(),
                    gcm: self.gcm[..n].iter().map(|r| r[..n].to_vec()).collect(),
                    sym: self.sym[..n].to_vec(),
                    form: self.form[..n].iter().map(|r| r[..n].to_vec()).collect(),
                    ext: None,
                }
            }
        }
    }
}

pub fn ht(b: &[i64]) -> i64 {
    b.iter().map(|x| x.abs()).sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GradeAssociator {
    pub lam: Vec<Vec<i64>>,
}

impl GradeAssociator {
    pub fn eval(&self, j: usize, k: usize) -> i64 {
        self.lam[j][k]
    }

    pub fn on_roots(&self, b: &[i64], g: &[i64]) -> i64 {
        let n = self.lam.len();
        let mut s = 0;
        for j in 0..n {
            if b[j] == 0 {
                continue;
            }
            for k in 0..n {
                s += b[j] * g[k] * self.lam[j][k];
            }
        }
        s
    }

    /// c(β,γ) = λ(β,γ) + (β,γ)
    pub fn skew(&self, datum: &CartanDatum) -> Vec<Vec<i64>> {
        let n = datum.rank();
        (0..n).map(|j| (0..n).map(|k| self.lam[j][k] + datum.form[j][k]).collect()).collect()
    }

    pub fn check(&self, datum: &CartanDatum) -> Result<()> {
        let n = datum.rank();
        for j in 0..n {
            for k in 0..n {
                if self.lam[j][k] + self.lam[k][j] + 2 * datum.form[j][k] != 0 {
                    return Err(KlrError::AssociatorInconsistent(datum.labels[j].clone(), datum.labels[k].clone()));
                }
            }
        }
        Ok(())
    }
}

pub fn canonical_associator(datum: &CartanDatum) -> GradeAssociator {
    let n = datum.rank();
    GradeAssociator { lam: (0..n).map(|j| (0..n).map(|k| -datum.form[j][k]).collect()).collect() }
}

/// λ± on an extended datum.
pub fn lambda_pm(ext: &CartanDatum, i: usize, sign: Sign) -> Result<GradeAssociator> {
    let e = ext.ext.as_ref().ok_or_else(|| KlrError::HypothesisFailed("datum is not extended".into()))?;
    if e.i != i || e.sign != sign {
        return Err(KlrError::HypothesisFailed("extension does not match (i, sign)".into()));
    }
    let n = ext.rank();
    let p = e.new;
    let mut lam = vec![vec![0i64; n]; n];
    for j in 0..n {
        for k in 0..n {
            if j != p && k != p {
                lam[j][k] = -ext.form[j][k];
            }
        }
    }
    lam[p][p] = -ext.form[i][i];
    match sign {
        Sign::Plus => {
            lam[i][p] = 0;
            for j in 0..n {
                if j == p {
                    continue;
                }
                lam[p][j] = ext.form[i][j];
                if j != i {
                    lam[j][p] = -ext.form[i][j];
                }
            }
        }
        Sign::Minus => {
            lam[p][i] = 0;
            for j in 0..n {
                if j == p {
                    continue;
                }
                lam[j][p] = ext.form[i][j];
                if j != i {
                    lam[p][j] = -ext.form[i][j];
                }
            }
        }
    }
    let g = GradeAssociator { lam };
    g.check(ext)?;
    Ok(g)
}

/// Associator with a prescribed skew part: λ = −(·,·) + c with c skew.
pub fn associator_from_skew(datum: &CartanDatum, c: &[Vec<i64>]) -> Result<GradeAssociator> {
    let n = datum.rank();
    let lam: Vec<Vec<i64>> = (0..n).map(|j| (0..n).map(|k| -datum.form[j][k] + c[j][k]).collect()).collect();
    let g = GradeAssociator { lam };
    g.check(datum)?;
    Ok(g)
}
