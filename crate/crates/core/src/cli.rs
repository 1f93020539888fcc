use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cartan::{canonical_associator, preset, CartanDatum, Sign};
use crate::error::{KlrError, Result};
use crate::gmod::{self, Module};
use crate::locext::{self, Extended};
use crate::qha::{self, Alg, Elem, Gen};
use crate::reflect;
use crate::report::{Case, Report, SCHEMA};
use crate::rmat;
use crate::linalg::q;

pub const SUITES: [&str; 12] = ["relations", "appendixB", "rmatrix", "cpm", "lasw", "desw", "loc", "thJ", "diei", "bos", "gen2", "all"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Q,
    Fp(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Assoc {
    Canonical,
    Pm(Sign),
}

#[derive(Clone, Debug)]
pub struct Config {
    pub datum: CartanDatum,
    pub i: usize,
    /// None: λ± when the new vertex is involved, canonical otherwise
    pub assoc: Option<Assoc>,
    pub field: Field,
    pub trunc: u32,
    pub ht: usize,
    pub seed: u64,
}

/// exit-code contract: 0 pass, 1 fail, 2 usage, 3 undefined invariant, 4 truncation
pub fn exit_code(e: &KlrError) -> i32 {
    match e {
        KlrError::Parse { .. } | KlrError::UnknownIndex(_) | KlrError::UnknownGenerator(_) | KlrError::NotGCM(_) | KlrError::NotSymmetrizable(_) => 2,
        KlrError::NotLambdaDefinable(_) => 3,
        KlrError::TruncationExhausted(_) | KlrError::CeilingTooSmall(_) | KlrError::NotStabilized(_) => 4,
        _ => 1,
    }
}

pub fn guidance(e: &KlrError) -> Option<&'static str> {
    match e {
        KlrError::TruncationExhausted(_) | KlrError::NotStabilized(_) | KlrError::CeilingTooSmall(_) => {
            Some("increase --trunc (gen2 windows use the degree ceiling 2*trunc+2)")
        }
        _ => None,
    }
}

fn usage(msg: String) -> KlrError {
    KlrError::Parse { pos: 0, msg }
}

pub fn parse_field(s: &str) -> Result<Field> {
    if s == "Q" {
        return Ok(Field::Q);
    }
    let digits = s.strip_prefix("Fp").or_else(|| s.strip_prefix("F_")).or_else(|| s.strip_prefix('F'));
    let p: u64 = digits
        .map(|d| d.trim_start_matches(':'))
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| usage(format!("unknown field {}", s)))?;
    if p <= 2 || !num_integer::Integer::is_odd(&p) || (3..).step_by(2).take_while(|d| d * d <= p).any(|d| p % d == 0) {
        return Err(usage(format!("field characteristic {} must be a prime > 2", p)));
    }
    Ok(Field::Fp(p))
}

pub fn parse_assoc(s: &str) -> Result<Assoc> {
    match s.replace('−', "-").as_str() {
        "canonical" => Ok(Assoc::Canonical),
        "lambda+" => Ok(Assoc::Pm(Sign::Plus)),
        "lambda-" => Ok(Assoc::Pm(Sign::Minus)),
        _ => Err(usage(format!("unknown associator {}", s))),
    }
}

pub fn load_datum(ty: Option<&str>, cartan: Option<&str>) -> Result<CartanDatum> {
    match (ty, cartan) {
        (Some(_), Some(_)) => Err(usage("give either --type or --cartan".into())),
        (Some(t), None) => preset(t),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {}", path, e)))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| KlrError::Parse { pos: e.column(), msg: e.to_string() })?;
            CartanDatum::from_json(&v)
        }
        (None, None) => preset("A2"),
    }
}

fn alg_for(cfg: &Config, sign: Option<Sign>) -> Result<Arc<Alg>> {
    let assoc = cfg.assoc.or(sign.map(Assoc::Pm));
    match (sign, assoc) {
        (None, None) | (None, Some(Assoc::Canonical)) => Ok(Alg::canonical(&cfg.datum)),
        (s, Some(Assoc::Pm(a))) => {
            if s.is_some_and(|s| s != a) {
                return Err(usage("associator sign differs from the vertex sign".into()));
            }
            Ok(locext::extended(&cfg.datum, cfg.i, a)?.alg)
        }
        (Some(s), _) => {
            let ext = locext::extended(&cfg.datum, cfg.i, s)?;
            ext.alg.regraded(canonical_associator(&ext.alg.datum))
        }
    }
}

// ---- mul ----

pub fn cmd_mul(cfg: &Config, expr: &str, beta: &[i64]) -> Result<String> {
    let sign = match cfg.assoc {
        Some(Assoc::Pm(s)) => Some(s),
        _ => None,
    };
    let alg = alg_for(cfg, sign)?;
    if beta.len() != alg.datum.rank() {
        return Err(usage(format!("--beta needs {} entries", alg.datum.rank())));
    }
    if beta.iter().any(|&b| b < 0) {
        return Err(usage("--beta entries must be nonnegative".into()));
    }
    let e = qha::normal_form(&alg, expr, beta)?;
    let e = match cfg.field {
        Field::Q => e,
        Field::Fp(p) => qha::reduce_mod_p(&e, p),
    };
    Ok(qha::render(&alg, &e))
}

// ---- module specs ----

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Spec {
    Unit,
    Letter(String),
    Conv(Vec<Spec>),
    Head(Vec<Spec>),
    Pow(String, usize),
    Det(String, String, usize),
    C(Sign),
}

struct SpecParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> SpecParser<'a> {
    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(KlrError::Parse { pos: self.pos, msg: msg.to_string() })
    }

    fn eat(&mut self, c: u8) -> bool {
        self.ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&format!("expected '{}'", c as char))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected a label");
        }
        let mut id = String::from_utf8_lossy(&self.s[start..self.pos]).into_owned();
        if matches!(self.s.get(self.pos), Some(b'+') | Some(b'-')) {
            id.push(self.s[self.pos] as char);
            self.pos += 1;
        }
        Ok(id)
    }

    fn number(&mut self) -> Result<usize> {
        let id = self.ident()?;
        id.parse().or_else(|_| self.err("expected a number"))
    }

    fn list(&mut self) -> Result<Vec<Spec>> {
        let mut v = vec![self.atom()?];
        while self.eat(b',') || self.eat(b'*') {
            v.push(self.atom()?);
        }
        Ok(v)
    }

    fn atom(&mut self) -> Result<Spec> {
        let id = self.ident()?;
        let call = self.eat(b'(');
        match (id.as_str(), call) {
            ("hd", true) => {
                let v = self.list()?;
                self.expect(b')')?;
                Ok(Spec::Head(v))
            }
            ("pow", true) => {
                let l = self.ident()?;
                self.expect(b',')?;
                let n = self.number()?;
                self.expect(b')')?;
                Ok(Spec::Pow(l, n))
            }
            ("det", true) => {
                let a = self.ident()?;
                self.expect(b',')?;
                let b = self.ident()?;
                self.expect(b',')?;
                let c = self.number()?;
                self.expect(b')')?;
                Ok(Spec::Det(a, b, c))
            }
            (_, true) => self.err(&format!("unknown constructor {}", id)),
            ("C+", false) => Ok(Spec::C(Sign::Plus)),
            ("C-", false) => Ok(Spec::C(Sign::Minus)),
            ("k", false) => Ok(Spec::Unit),
            _ => Ok(Spec::Letter(id)),
        }
    }
}

pub fn parse_spec(text: &str) -> Result<Spec> {
    let norm = text.replace('−', "-").replace('₊', "+").replace('₋', "-");
    let mut p = SpecParser { s: norm.as_bytes(), pos: 0 };
    let v = p.list()?;
    p.ws();
    if p.pos < p.s.len() {
        return p.err("trailing input");
    }
    Ok(if v.len() == 1 { v.into_iter().next().unwrap() } else { Spec::Conv(v) })
}

fn label_sign(l: &str) -> Option<Sign> {
    if l.ends_with('+') {
        Some(Sign::Plus)
    } else if l.ends_with('-') {
        Some(Sign::Minus)
    } else {
        None
    }
}

/// the sign of the extension a spec lives in, if any
pub fn spec_sign(s: &Spec) -> Result<Option<Sign>> {
    let mut signs = vec![];
    collect_signs(s, &mut signs);
    signs.dedup();
    match signs.as_slice() {
        [] => Ok(None),
        [s] => Ok(Some(*s)),
        _ => Err(usage("spec mixes + and - vertices".into())),
    }
}

fn collect_signs(s: &Spec, out: &mut Vec<Sign>) {
    match s {
        Spec::Unit => {}
        Spec::Letter(l) | Spec::Pow(l, _) => out.extend(label_sign(l)),
        Spec::Det(a, b, _) => {
            out.extend(label_sign(a));
            out.extend(label_sign(b));
        }
        Spec::C(s) => out.push(*s),
        Spec::Conv(v) | Spec::Head(v) => v.iter().for_each(|x| collect_signs(x, out)),
    }
    out.sort_by_key(|s| *s == Sign::Minus);
}

pub fn build_spec(s: &Spec, alg: &Arc<Alg>, ext: Option<&Extended>) -> Result<Module> {
    let idx = |l: &str| alg.datum.index_of(l);
    match s {
        Spec::Unit => Ok(Module::unit(alg)),
        Spec::Letter(l) => Ok(Module::simple_letter(alg, idx(l)?)),
        Spec::Pow(l, n) => gmod::simple_power(alg, idx(l)?, *n),
        Spec::Det(a, b, c) => gmod::determinantial(alg, idx(a)?, idx(b)?, *c),
        Spec::C(sign) => {
            let e = ext.filter(|e| e.sign == *sign).ok_or_else(|| usage("C+/C- needs the matching extension".into()))?;
            let c = locext::build_cpm(e)?;
            if Arc::ptr_eq(&e.alg, alg) {
                Ok(c)
            } else {
                c.regrade(alg)
            }
        }
        Spec::Conv(v) => {
            let mut m = build_spec(&v[0], alg, ext)?;
            for x in &v[1..] {
                m = m.convolution(&build_spec(x, alg, ext)?)?;
            }
            Ok(m)
        }
        Spec::Head(v) => {
            let mut m = build_spec(&v[0], alg, ext)?;
            for x in &v[1..] {
                m = gmod::head_of(&m, &build_spec(x, alg, ext)?)?;
            }
            Ok(m)
        }
    }
}

pub fn cmd_lambda(cfg: &Config, m_spec: &str, n_spec: &str) -> Result<Value> {
    let (sm, sn) = (parse_spec(m_spec)?, parse_spec(n_spec)?);
    let sign = match (spec_sign(&sm)?, spec_sign(&sn)?) {
        (Some(a), Some(b)) if a != b => return Err(usage("specs live in different extensions".into())),
        (a, b) => a.or(b),
    };
    let sign = sign.or(match cfg.assoc {
        Some(Assoc::Pm(s)) => Some(s),
        _ => None,
    });
    let alg = alg_for(cfg, sign)?;
    let ext = match sign {
        Some(s) => Some(locext::extended(&cfg.datum, cfg.i, s)?),
        None => None,
    };
    let m = build_spec(&sm, &alg, ext.as_ref())?;
    let n = build_spec(&sn, &alg, ext.as_ref())?;
    let la = rmat::lambda(&m, &n)?;
    let lt = rmat::lambda_tilde(&m, &n)?;
    let de = rmat::delta(&m, &n)?;
    Ok(json!({
        "schema": SCHEMA,
        "command": "lambda",
        "type": alg.datum.labels,
        "associator": alg.lam.lam,
        "M": {"spec": m_spec, "label": m.label, "dim": m.dim()},
        "N": {"spec": n_spec, "label": n.label, "dim": n.dim()},
        "Lambda": la.to_string(),
        "Lambda_tilde": lt.to_string(),
        "delta": de.to_string(),
    }))
}

// ---- suites ----

fn random_elem(alg: &Alg, nu: &[u8], rng: &mut ChaCha8Rng) -> Result<Elem> {
    let n = nu.len();
    let len = rng.gen_range(1..4);
    let gens: Vec<Gen> = (0..len)
        .map(|_| if n < 2 || rng.gen_bool(1.0 / 3.0) { Gen::X(rng.gen_range(0..n)) } else { Gen::T(rng.gen_range(0..n - 1)) })
        .collect();
    alg.apply_gens(&gens, &Elem::idem(nu))
}

fn left_word(e: &Elem, dflt: &[u8]) -> Vec<u8> {
    e.terms.keys().next().map(|t| t.left()).unwrap_or_else(|| dflt.to_vec())
}

fn suite_algs(cfg: &Config) -> Result<Vec<(String, Arc<Alg>)>> {
    let mut v = vec![("base".to_string(), Alg::canonical(&cfg.datum))];
    for s in [Sign::Plus, Sign::Minus] {
        v.push((format!("ext{}", s.suffix()), locext::extended(&cfg.datum, cfg.i, s)?.alg));
    }
    Ok(v)
}

pub fn verify_relations_suite(cfg: &Config) -> Result<Report> {
    let nmax = cfg.ht.min(4);
    let mut rep = Report::new("relations", json!({"type": cfg.datum.labels, "i": cfg.datum.labels[cfg.i], "ht": nmax, "seed": cfg.seed}));
    for (tag, alg) in suite_algs(cfg)? {
        for n in 1..=nmax {
            for r in qha::verify_relations(&alg, n)? {
                let mut c = Case::from_result(&r, "normal form");
                c.case = format!("{}: {}", tag, c.case);
                rep.push(c);
            }
        }
    }
    let alg = Alg::canonical(&cfg.datum);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rank = alg.datum.rank() as u8;
    for t in 0..100 {
        let n = rng.gen_range(2..=nmax.max(2));
        let w: Vec<u8> = (0..n).map(|_| rng.gen_range(0..rank)).collect();
        let c = random_elem(&alg, &w, &mut rng)?;
        let mid = left_word(&c, &w);
        let b = random_elem(&alg, &mid, &mut rng)?;
        let top = left_word(&b, &mid);
        let a = random_elem(&alg, &top, &mut rng)?;
        let ab_c = alg.mul(&alg.mul(&a, &b)?, &c)?;
        let a_bc = alg.mul(&a, &alg.mul(&b, &c)?)?;
        rep.push(Case::eq(
            format!("associativity:{}", t),
            json!(qha::render(&alg, &ab_c)),
            json!(qha::render(&alg, &a_bc)),
            "(ab)c vs a(bc)",
        ));
    }
    Ok(rep)
}

pub fn verify_appendix_suite(cfg: &Config) -> Result<Report> {
    let nmax = cfg.ht.min(4);
    let mut rep = Report::new("appendixB", json!({"type": cfg.datum.labels, "nmax": nmax}));
    let alg = Alg::canonical(&cfg.datum);
    for r in qha::verify_appendix_b(&alg, nmax)? {
        rep.push(Case::from_result(&r, "normal form"));
    }
    Ok(rep)
}

/// simple modules of weight at most 3 built from the catalogue
fn simple_pool(alg: &Arc<Alg>) -> Result<Vec<Module>> {
    let r = alg.datum.rank();
    let mut v = vec![];
    for a in 0..r {
        v.push(Module::simple_letter(alg, a));
    }
    for a in 0..r {
        v.push(gmod::simple_power(alg, a, 2)?);
    }
    for a in 0..r {
        for b in 0..r {
            if a != b && alg.datum.gcm[a][b] != 0 {
                v.push(gmod::head_of(&Module::simple_letter(alg, a), &Module::simple_letter(alg, b))?);
            }
        }
    }
    Ok(v)
}

fn q_json(x: &Result<crate::Q>) -> Value {
    match x {
        Ok(v) => json!(v.to_string()),
        Err(e) => json!(format!("{}", e)),
    }
}

pub fn verify_rmatrix_suite(cfg: &Config) -> Result<Report> {
    let mut rep = Report::new("rmatrix", json!({"type": cfg.datum.labels, "i": cfg.datum.labels[cfg.i], "seed": cfg.seed}));
    let mut algs = vec![Alg::canonical(&cfg.datum)];
    for s in [Sign::Plus, Sign::Minus] {
        algs.push(locext::extended(&cfg.datum, cfg.i, s)?.alg);
    }
    // unmixed law
    let mut count = 0;
    'outer: for alg in &algs {
        let pool = simple_pool(alg)?;
        for m in &pool {
            for n in &pool {
                if !rmat::is_unmixed(m, n) {
                    continue;
                }
                let wt = alg.lam.on_roots(&m.content().unwrap(), &n.content().unwrap());
                let name = format!("unmixed:{}:({},{})", alg.datum.labels.join(""), m.label, n.label);
                rep.push(Case::eq(
                    name.clone() + ":Lambda",
                    json!(q(wt).to_string()),
                    q_json(&rmat::lambda(m, n)),
                    "lambda(wt M, wt N)",
                ));
                rep.push(Case::eq(name + ":Lambda_tilde", json!("0"), q_json(&rmat::lambda_tilde(m, n)), "unmixed"));
                count += 1;
                if count == 20 {
                    break 'outer;
                }
            }
        }
    }
    // Yang–Baxter on letters a, b and the head <ab>
    let (alg, a, b) = if cfg.datum.rank() >= 2 {
        let (a, b) = (0..cfg.datum.rank())
            .flat_map(|a| (0..cfg.datum.rank()).map(move |b| (a, b)))
            .find(|&(a, b)| a < b && cfg.datum.gcm[a][b] != 0)
            .unwrap_or((0, 1));
        (algs[0].clone(), a, b)
    } else {
        let e = &algs[1];
        (e.clone(), cfg.i, e.datum.rank() - 1)
    };
    let la = Module::simple_letter(&alg, a);
    let lb = Module::simple_letter(&alg, b);
    let hab = gmod::head_of(&la, &lb)?;
    let trio = [&la, &lb, &hab];
    for x in trio {
        for y in trio {
            for z in trio {
                let (l, r) = rmat::yang_baxter(x, y, z)?;
                rep.push(Case::eq(
                    format!("yang-baxter:({},{},{})", x.label, y.label, z.label),
                    json!("equal"),
                    json!(if l == r { "equal" } else { "differ" }),
                    "R12 R23 R12 = R23 R12 R23",
                ));
            }
        }
    }
    // associator independence
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for s in [Sign::Plus, Sign::Minus] {
        let e = locext::extended(&cfg.datum, cfg.i, s)?;
        let can = e.alg.regraded(canonical_associator(&e.alg.datum))?;
        let pm = e.alg.clone();
        let pool = simple_pool(&can)?;
        for _ in 0..10 {
            let (m, n) = (&pool[rng.gen_range(0..pool.len())], &pool[rng.gen_range(0..pool.len())]);
            let (km, kn) = (m.regrade(&pm)?, n.regrade(&pm)?);
            let (beta, gamma) = (m.content().unwrap(), n.content().unwrap());
            let shift = q(pm.lam.on_roots(&beta, &gamma) - can.lam.on_roots(&beta, &gamma));
            let name = format!("regrade{}:({},{})", s.suffix(), m.label, n.label);
            let expected = rmat::lambda(m, n).map(|x| x + shift);
            rep.push(Case::eq(name.clone() + ":Lambda", q_json(&expected), q_json(&rmat::lambda(&km, &kn)), "Lambda + (lambda' - lambda)(wt, wt)"));
            rep.push(Case::eq(name.clone() + ":Lambda_tilde", q_json(&rmat::lambda_tilde(m, n)), q_json(&rmat::lambda_tilde(&km, &kn)), "unchanged"));
            rep.push(Case::eq(name + ":delta", q_json(&rmat::delta(m, n)), q_json(&rmat::delta(&km, &kn)), "unchanged"));
        }
    }
    Ok(rep)
}

fn merge(name: &str, config: Value, parts: Vec<(String, Report)>) -> Report {
    let mut rep = Report::new(name, config);
    let mut summary = serde_json::Map::new();
    for (tag, p) in parts {
        summary.insert(tag.clone(), json!({"pass": p.pass(), "cases": p.cases.len(), "config": p.config}));
        for mut c in p.cases {
            c.case = format!("{}/{}", tag, c.case);
            rep.push(c);
        }
    }
    rep.extra = Some(Value::Object(summary));
    rep
}

pub fn run_suite(cfg: &Config, suite: &str) -> Result<Report> {
    let d = &cfg.datum;
    let i = cfg.i;
    match suite {
        "relations" => verify_relations_suite(cfg),
        "appendixB" => verify_appendix_suite(cfg),
        "rmatrix" => verify_rmatrix_suite(cfg),
        "lasw" => {
            let parts = vec![("+".to_string(), locext::verify_lasw(d, i, Sign::Plus)?), ("-".to_string(), locext::verify_lasw(d, i, Sign::Minus)?)];
            Ok(merge("lasw", json!({"type": d.labels, "i": d.labels[i]}), parts))
        }
        "cpm" => {
            let parts = vec![("+".to_string(), locext::verify_cpm(d, i, Sign::Plus)?), ("-".to_string(), locext::verify_cpm(d, i, Sign::Minus)?)];
            Ok(merge("cpm", json!({"type": d.labels, "i": d.labels[i]}), parts))
        }
        "loc" => locext::verify_loc(d, i, (1, 2)),
        "desw" => locext::verify_desw(d, i, (cfg.trunc, cfg.trunc + 1), cfg.seed),
        "thJ" => reflect::verify_thj(d, cfg.ht),
        "diei" => reflect::verify_diei(d, i, cfg.trunc, cfg.seed),
        "bos" => Ok(reflect::verify_bos(d, i)?.0),
        "gen2" => reflect::verify_gen2_suite(d, i, 2 * cfg.trunc as i64 + 2),
        "all" => {
            let names = &SUITES[..SUITES.len() - 1];
            let results: Vec<Result<Report>> = std::thread::scope(|s| {
                let hs: Vec<_> = names.iter().map(|n| s.spawn(move || run_suite(cfg, n))).collect();
                hs.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
            });
            let parts = results.into_iter().collect::<Result<Vec<_>>>()?;
            let parts = names.iter().map(|n| n.to_string()).zip(parts).collect();
            Ok(merge("all", json!({"type": d.labels, "i": d.labels[i], "trunc": cfg.trunc, "ht": cfg.ht, "seed": cfg.seed}), parts))
        }
        _ => Err(usage(format!("unknown suite {} (expected one of {})", suite, SUITES.join(", ")))),
    }
}

pub fn cmd_reflect_check(cfg: &Config) -> Result<Report> {
    reflect::reflect_check(&cfg.datum, cfg.i, cfg.trunc, cfg.seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_grammar() {
        assert_eq!(parse_spec("1").unwrap(), Spec::Letter("1".into()));
        assert_eq!(parse_spec("hd(1,2)").unwrap(), Spec::Head(vec![Spec::Letter("1".into()), Spec::Letter("2".into())]));
        assert_eq!(parse_spec("C+").unwrap(), Spec::C(Sign::Plus));
        assert_eq!(parse_spec("1−").unwrap(), Spec::Letter("1-".into()));
        assert!(matches!(parse_spec("hd(1,"), Err(KlrError::Parse { pos: 5, .. })));
    }

    #[test]
    fn fields() {
        assert_eq!(parse_field("F7").unwrap(), Field::Fp(7));
        assert!(parse_field("F2").is_err());
        assert!(parse_field("F9").is_err());
    }
}
