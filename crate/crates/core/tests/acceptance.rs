use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use klr::cartan::{preset, CartanDatum, Sign};
use klr::cli::{self, Config, Field};
use klr::gmod::{self, Module};
use klr::locext;
use klr::qha::Alg;
use klr::reflect;
use klr::report::Report;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn cfg(name: &str, i: usize) -> Config {
    Config { datum: preset(name).unwrap(), i, assoc: None, field: Field::Q, trunc: 4, ht: 4, seed: 0 }
}

fn tally(reps: &[Report], prefix: &[&str]) -> (usize, Vec<String>) {
    let mut n = 0;
    let mut bad = vec![];
    for r in reps {
        for c in &r.cases {
            if prefix.is_empty() || prefix.iter().any(|p| c.case.contains(p)) {
                n += 1;
                if !c.pass {
                    bad.push(format!("{}:{}", r.suite, c.case));
                }
            }
        }
    }
    (n, bad)
}

fn from_reports(reps: &[Report], prefix: &[&str], min_cases: usize) -> Outcome {
    let (n, bad) = tally(reps, prefix);
    let pass = bad.is_empty() && n >= min_cases;
    let mut detail = format!("{} cases", n);
    if n < min_cases {
        detail += &format!(", expected at least {}", min_cases);
    }
    if !bad.is_empty() {
        detail += &format!(", failing: {}", bad.iter().take(5).cloned().collect::<Vec<_>>().join("; "));
    }
    Outcome { pass, detail }
}

fn c1() -> Outcome {
    let reps: Vec<Report> = ["A2", "B2"].iter().map(|t| cli::run_suite(&cfg(t, 0), "relations").unwrap()).collect();
    let assoc = tally(&reps, &["associativity"]).0;
    let mut o = from_reports(&reps, &[], 1);
    o.pass &= assoc == 200;
    o.detail += &format!(", {} associativity triples", assoc);
    o
}

fn c2() -> Outcome {
    let reps: Vec<Report> = ["A2", "B2"].iter().map(|t| cli::run_suite(&cfg(t, 0), "appendixB").unwrap()).collect();
    from_reports(&reps, &[], 1)
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn binom(n: usize, k: usize) -> usize {
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn c3() -> Outcome {
    let mut bad = vec![];
    let mut powers = 0;
    let mut pool: Vec<(Arc<Alg>, Module, usize)> = vec![];
    for t in ["A2", "B2"] {
        let alg = Alg::canonical(&preset(t).unwrap());
        for i in 0..2 {
            for n in 1..=4 {
                let m = gmod::simple_power(&alg, i, n).unwrap();
                powers += 1;
                if m.dim() != factorial(n) {
                    bad.push(format!("dim {} = {}", m.label, m.dim()));
                }
                if n <= 2 {
                    pool.push((alg.clone(), m, n));
                }
            }
        }
        let (a, b) = (Module::simple_letter(&alg, 0), Module::simple_letter(&alg, 1));
        pool.push((alg.clone(), gmod::head_of(&a, &b).unwrap(), 2));
        pool.push((alg.clone(), gmod::head_of(&b, &a).unwrap(), 2));
        pool.push((alg.clone(), gmod::determinantial(&alg, 0, 1, (-alg.datum.gcm[0][1]) as usize).unwrap(), 1 + (-alg.datum.gcm[0][1]) as usize));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut pairs = 0;
    while pairs < 30 {
        let (x, y) = (rng.gen_range(0..pool.len()), rng.gen_range(0..pool.len()));
        let ((am, m, hm), (an, n, hn)) = (&pool[x], &pool[y]);
        if !Arc::ptr_eq(am, an) {
            continue;
        }
        let conv = m.convolution(n).unwrap();
        let want = binom(hm + hn, *hm) * m.dim() * n.dim();
        if conv.dim() != want {
            bad.push(format!("dim {}∘{} = {} != {}", m.label, n.label, conv.dim(), want));
        }
        pairs += 1;
    }
    Outcome { pass: bad.is_empty(), detail: format!("{} powers, {} convolution pairs{}", powers, pairs, fmt_bad(&bad)) }
}

fn fmt_bad(bad: &[String]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!(", failing: {}", bad.join("; "))
    }
}

fn c4_c5() -> (Outcome, Outcome) {
    let rep = cli::run_suite(&cfg("A2", 0), "rmatrix").unwrap();
    let reps = [rep];
    let mut a = from_reports(&reps, &["unmixed:", "yang-baxter:"], 40 + 27);
    a.detail += " (20 unmixed pairs, 27 Yang-Baxter triples)";
    let mut b = from_reports(&reps, &["regrade"], 60);
    b.detail += " (20 pairs, both signs)";
    (a, b)
}

fn c6() -> Outcome {
    let mut reps = vec![];
    for t in ["A2", "B2"] {
        for i in 0..2 {
            for s in [Sign::Plus, Sign::Minus] {
                reps.push(locext::verify_cpm(&preset(t).unwrap(), i, s).unwrap());
            }
        }
    }
    from_reports(&reps, &[], 8)
}

fn c7() -> Outcome {
    let mut reps = vec![];
    for (t, is) in [("A2", vec![0, 1]), ("A3", vec![1]), ("B2", vec![0, 1])] {
        for i in is {
            for s in [Sign::Plus, Sign::Minus] {
                reps.push(locext::verify_lasw(&preset(t).unwrap(), i, s).unwrap());
            }
        }
    }
    from_reports(&reps, &[], 10)
}

fn c8() -> Outcome {
    let rep = locext::verify_desw(&preset("A3").unwrap(), 1, (4, 5), 0).unwrap();
    from_reports(&[rep], &[], 3)
}

fn c9() -> Outcome {
    let reps: Vec<Report> = ["A2", "B2"].iter().map(|t| reflect::verify_thj(&preset(t).unwrap(), 4).unwrap()).collect();
    from_reports(&reps, &[], 10)
}

fn c10() -> Outcome {
    let rep = reflect::verify_diei(&preset("A2").unwrap(), 0, 4, 0).unwrap();
    let mut o = from_reports(std::slice::from_ref(&rep), &[], 12);
    let modes: Vec<String> = rep
        .cases
        .iter()
        .filter(|c| c.case.contains("cokernel-iso"))
        .map(|c| format!("{}:{}", c.case.split(':').nth(1).unwrap_or("?").trim_start_matches("M="), c.computed["mode"].as_str().unwrap_or("?")))
        .collect();
    o.detail += &format!(", iso modes [{}], global shifts {}", modes.join(" "), rep.extra.as_ref().map(|e| e["global_shift2"].to_string()).unwrap_or_default());
    o
}

fn c11() -> Outcome {
    let mut reps = vec![];
    for t in ["A1", "A2"] {
        let d: CartanDatum = preset(t).unwrap();
        reps.push(reflect::verify_bos(&d, 0).unwrap().0);
        reps.push(reflect::verify_generators(&d, 0).unwrap());
    }
    from_reports(&reps, &[], 10)
}

fn c12() -> Outcome {
    let rep = locext::verify_loc(&preset("A2").unwrap(), 0, (1, 2)).unwrap();
    let rl = tally(std::slice::from_ref(&rep), &["full-faithful"]).0;
    let jc = tally(std::slice::from_ref(&rep), &["jC+"]).0;
    let mut o = from_reports(std::slice::from_ref(&rep), &[], 11);
    o.pass &= rl >= 10 && jc >= 1;
    o.detail += &format!(" ({} full-faithfulness pairs, {} vanishing checks)", rl, jc);
    o
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let t = Instant::now();
    let o = f();
    (o, t.elapsed())
}

#[test]
fn acceptance() {
    let mut rows: Vec<(usize, Outcome, Duration, u64)> = vec![];
    let budgets = [60, 120, 10, 30, 30, 60, 120, 300, 180, 300, 60, 120];
    let (o, d) = timed(c1);
    rows.push((1, o, d, budgets[0]));
    let (o, d) = timed(c2);
    rows.push((2, o, d, budgets[1]));
    let (o, d) = timed(c3);
    rows.push((3, o, d, budgets[2]));
    let t = Instant::now();
    let (o4, o5) = c4_c5();
    let d = t.elapsed();
    rows.push((4, o4, d, budgets[3]));
    rows.push((5, o5, d, budgets[4]));
    for (k, f) in [(6, c6 as fn() -> Outcome), (7, c7), (8, c8), (9, c9), (10, c10), (11, c11), (12, c12)] {
        let (o, d) = timed(f);
        rows.push((k, o, d, budgets[k - 1]));
    }
    let mut failed = vec![];
    for (k, o, d, budget) in &rows {
        let in_time = d.as_secs() < *budget;
        let ok = o.pass && in_time;
        // written to the raw handle so the lines survive output capture
        writeln!(
            std::io::stderr(),
            "criterion {}: {} {} [{:.2}s of {}s]",
            k,
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            d.as_secs_f64(),
            budget
        )
        .unwrap();
        if !ok {
            failed.push(*k);
        }
    }
    assert!(failed.is_empty(), "failing criteria {:?}", failed);
}
