//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde_json::{json, Value};

use kgrass::grothendieck::{buch_product, oracle_product};
use kgrass::involutions::{
    build_matching, reduce, verify_matching, FirstInvolution, NearRectangleCase, SecondOutcome,
};
use kgrass::partition::{partitions_in_box, partitions_up_to};
use kgrass::poset::{build_poset, check_main_theorem, mobius, ContentPoset};
use kgrass::richardson::{
    all_basic_demolitions, basic_demolition, demolish_column, demolish_row, is_multiplicity_free,
    is_multiplicity_free_brute, k_multiplicity_free_verdict, Demolition, DemolitionWitness,
    RichardsonQuadruple,
};
use kgrass::svt::{enumerate_buch_tableaux, lex_min_tableau, SetValuedFilling};
use kgrass::{AmbientBox, Partition};

const MAX_SIZE: u32 = 6;
const MAX_SIDE: u32 = 5;

type Verdict = Result<String, String>;

fn bx(r: u32, c: u32) -> AmbientBox {
    AmbientBox::new(r, c).unwrap()
}

fn boxes(rows: u32, cols: u32) -> Vec<AmbientBox> {
    (1..=rows).flat_map(|r| (1..=cols).map(move |c| bx(r, c))).collect()
}

/// Every quadruple with `|lambda|, |mu| <= MAX_SIZE` in a box of sides at
/// most `MAX_SIDE`.
fn in_range() -> Vec<RichardsonQuadruple> {
    let mut out = Vec::new();
    for b in boxes(MAX_SIDE, MAX_SIDE) {
        let shapes = partitions_up_to(MAX_SIZE, b);
        for l in &shapes {
            for m in &shapes {
                out.push(RichardsonQuadruple::new(l.clone(), m.clone(), b).unwrap());
            }
        }
    }
    out
}

fn multiplicity_free(all: &[RichardsonQuadruple]) -> Vec<&RichardsonQuadruple> {
    all.par_iter()
        .filter(|q| !q.is_zero_product() && is_multiplicity_free(q).verdict)
        .collect()
}

fn pool(n: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()
}

fn within(t: Instant, budget: Duration, what: &str) -> Result<(), String> {
    let e = t.elapsed();
    if e <= budget {
        Ok(())
    } else {
        Err(format!("{what} took {e:.1?}, budget {budget:?}"))
    }
}

fn first_failures(mut failures: Vec<String>) -> Result<(), String> {
    if failures.is_empty() {
        return Ok(());
    }
    let n = failures.len();
    failures.truncate(3);
    Err(format!("{n} failures, e.g. {}", failures.join(" | ")))
}

fn expand(args: &[&str]) -> Value {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = ["kgrass", "expand"].iter().chain(args).copied();
    let code = kgrass::cli::run(argv, &mut out, &mut err);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    serde_json::from_slice::<Value>(&out).unwrap()["terms"].clone()
}

fn figures() -> Verdict {
    let t = Instant::now();
    let g1 = expand(&["--lambda", "1", "--mu", "1", "--box", "2x2"]);
    let want1 = json!([
        {"nu": [2], "coeff": 1},
        {"nu": [1, 1], "coeff": 1},
        {"nu": [2, 1], "coeff": -1},
    ]);
    let g22 = expand(&["--lambda", "2,2", "--mu", "2,2", "--box", "4x3"]);
    let want22 = json!([
        {"nu": [3, 3, 1, 1], "coeff": 1},
        {"nu": [3, 2, 2, 1], "coeff": 1},
        {"nu": [2, 2, 2, 2], "coeff": 1},
        {"nu": [3, 3, 2, 1], "coeff": -1},
        {"nu": [3, 2, 2, 2], "coeff": -1},
    ]);
    if g1 != want1 {
        return Err(format!("g1*g1 = {g1}"));
    }
    if g22 != want22 {
        return Err(format!("g22*g22 = {g22}"));
    }
    within(t, Duration::from_secs(1), "both expansions")?;
    Ok(format!("g1*g1 and g22*g22 exact in {:.0?}", t.elapsed()))
}

fn oracle() -> Verdict {
    let t = Instant::now();
    let b = bx(4, 4);
    let shapes = partitions_up_to(4, b);
    let mut failures = Vec::new();
    let mut pairs = 0;
    for l in &shapes {
        for m in &shapes {
            let tableau = buch_product(l, m, b).coeffs;
            match oracle_product(l, m, b) {
                Ok(poly) if poly == tableau => {}
                Ok(poly) => failures.push(format!("{l} x {m}: {tableau:?} vs {poly:?}")),
                Err(e) => failures.push(format!("{l} x {m}: {e}")),
            }
            pairs += 1;
        }
    }
    first_failures(failures)?;
    within(t, Duration::from_secs(120), "oracle sweep")?;
    Ok(format!("{pairs} pairs in 4x4 agree term for term, {:.1?} single-threaded", t.elapsed()))
}

fn main_theorem(mf: &[&RichardsonQuadruple]) -> Verdict {
    let t = Instant::now();
    let results: Vec<Option<String>> = pool(4).install(|| {
        mf.par_iter()
            .map(|q| match check_main_theorem(&q.lambda, &q.mu, q.bx) {
                Ok(r) if r.verdict() => None,
                Ok(r) => Some(format!("{q}: {:?}", r.vertices.iter().filter(|v| !v.pass).collect::<Vec<_>>())),
                Err(e) => Some(format!("{q}: {e}")),
            })
            .collect()
    });
    first_failures(results.into_iter().flatten().collect())?;
    within(t, Duration::from_secs(600), "main theorem sweep")?;
    Ok(format!("{} multiplicity-free instances, every vertex agrees, {:.1?} on 4 workers", mf.len(), t.elapsed()))
}

fn matchings(mf: &[&RichardsonQuadruple]) -> Verdict {
    let results: Vec<Result<usize, String>> = mf
        .par_iter()
        .map(|q| {
            let all = enumerate_buch_tableaux(&q.lambda, &q.mu, q.bx);
            let m = build_matching(&q.lambda, &q.mu, q.bx).map_err(|e| format!("{q}: {e}"))?;
            let rep = verify_matching(&m, &q.lambda, &q.mu, q.bx, &all);
            let lex_min = lex_min_tableau(&q.lambda, &q.mu, q.bx);
            if !rep.all_pass() || m.fixed.len() != 1 || lex_min.as_ref().ok() != Some(&m.fixed[0]) {
                return Err(format!("{q}: {rep:?}"));
            }
            Ok(m.pairs.len())
        })
        .collect();
    let pairs: usize = results.iter().filter_map(|r| r.as_ref().ok()).sum();
    first_failures(results.into_iter().filter_map(|r| r.err()).collect())?;
    Ok(format!("{} instances, {pairs} sign-reversing pairs, fixed point always the lex-min tableau", mf.len()))
}

fn rectangles(b: AmbientBox) -> Vec<Partition> {
    partitions_in_box(b).into_iter().filter(|p| !p.is_empty() && p.is_rectangle()).collect()
}

fn involution_laws() -> Verdict {
    // I1 on pairs of rectangles with sides at most 4, in boxes up to 8x8
    let mut jobs = Vec::new();
    for b in boxes(8, 8) {
        for l in rectangles(b) {
            for m in rectangles(b) {
                if l.len() <= 4 && l.width() <= 4 && m.len() <= 4 && m.width() <= 4 {
                    jobs.push((l.clone(), m, b));
                }
            }
        }
    }
    let first: Vec<Result<usize, String>> = jobs
        .par_iter()
        .map(|(l, m, b)| {
            let all = enumerate_buch_tableaux(l, m, *b);
            let Ok(inv) = FirstInvolution::new(l, m, *b, None) else {
                return if all.is_empty() { Ok(0) } else { Err(format!("{l} {m} {b}: no M")) };
            };
            for t in &all {
                let u = inv.apply(t).map_err(|e| format!("{l} {m} {b}: {e}"))?;
                let back = inv.apply(&u).map_err(|e| format!("{l} {m} {b}: {e}"))?;
                let sign_ok = if &u == t { t == &inv.m } else { t.size().abs_diff(u.size()) == 1 };
                if &back != t || !sign_ok {
                    return Err(format!("{l} {m} {b} at {t:?}"));
                }
            }
            Ok(all.len())
        })
        .collect();
    let first_count: usize = first.iter().filter_map(|r| r.as_ref().ok()).sum();
    let mut failures: Vec<String> = first.into_iter().filter_map(|r| r.err()).collect();

    // I2 and I3 on near-rectangle instances with at most 12 boxes in all
    let mut near = Vec::new();
    for b in boxes(8, 8) {
        for l in partitions_up_to(11, b) {
            for m in rectangles(b) {
                if l.size() + m.size() <= 12 {
                    if let Ok(case) = NearRectangleCase::new(&l, &m, b) {
                        near.push((l.clone(), m, b, case));
                    }
                }
            }
        }
    }
    let second: Vec<Result<usize, String>> = near
        .par_iter()
        .map(|(l, m, b, case)| {
            let all = enumerate_buch_tableaux(l, m, *b);
            let survivors: Vec<&SetValuedFilling> = all.iter().filter(|t| case.first.mismatch(t).is_none()).collect();
            for t in &survivors {
                match case.i2(t) {
                    SecondOutcome::Fixed if *t == &case.first.m => {}
                    SecondOutcome::Fixed => return Err(format!("{l} {m} {b}: extra fixed point {t:?}")),
                    SecondOutcome::Partner(u) => {
                        if t.size().abs_diff(u.size()) != 1 || case.i2(&u) != SecondOutcome::Partner((*t).clone()) {
                            return Err(format!("{l} {m} {b}: i2 at {t:?}"));
                        }
                    }
                    SecondOutcome::Unmatched => {
                        let u = case.i3(t).map_err(|e| format!("{l} {m} {b}: {e}"))?;
                        let back = case.i3(&u).map_err(|e| format!("{l} {m} {b}: {e}"))?;
                        if &back != *t || t.size().abs_diff(u.size()) != 1 {
                            return Err(format!("{l} {m} {b}: i3 at {t:?}"));
                        }
                    }
                }
            }
            let matching = case.matching(&all).map_err(|e| format!("{l} {m} {b}: {e}"))?;
            if !verify_matching(&matching, l, m, *b, &all).all_pass() {
                return Err(format!("{l} {m} {b}: pipeline matching fails"));
            }
            Ok(survivors.len())
        })
        .collect();
    let survivors: usize = second.iter().filter_map(|r| r.as_ref().ok()).sum();
    failures.extend(second.into_iter().filter_map(|r| r.err()));
    first_failures(failures)?;
    Ok(format!(
        "i1 involutive on {first_count} fillings of {} rectangle pairs; i2/i3 on {survivors} survivors of {} near-rectangle instances",
        jobs.len(),
        near.len()
    ))
}

/// Content map induced by a filling bijection; fails unless it is a
/// well-defined injection.
fn content_map(pairs: &[(&SetValuedFilling, SetValuedFilling)]) -> Result<BTreeMap<Vec<u32>, Vec<u32>>, String> {
    let mut map: BTreeMap<Vec<u32>, Vec<u32>> = BTreeMap::new();
    for (t, u) in pairs {
        let (a, b) = (t.content(false).counts, u.content(false).counts);
        if let Some(old) = map.insert(a.clone(), b.clone()) {
            if old != b {
                return Err(format!("content {a:?} goes to both {old:?} and {b:?}"));
            }
        }
    }
    let images: BTreeSet<_> = map.values().collect();
    if images.len() != map.len() {
        return Err("content map is not injective".to_string());
    }
    Ok(map)
}

fn counts(ts: impl IntoIterator<Item = SetValuedFilling>) -> BTreeMap<Vec<u32>, usize> {
    let mut c = BTreeMap::new();
    for t in ts {
        *c.entry(t.content(false).counts).or_insert(0) += 1;
    }
    c
}

fn reduction(all: &[RichardsonQuadruple]) -> Verdict {
    let cases: Vec<&RichardsonQuadruple> = all
        .iter()
        .filter(|q| !q.lambda.is_empty() && q.lambda.is_rectangle() && !q.mu.is_empty())
        .collect();
    let results: Vec<Result<bool, String>> = cases
        .par_iter()
        .map(|q| {
            let fillings = enumerate_buch_tableaux(&q.lambda, &q.mu, q.bx);
            if fillings.is_empty() {
                return Ok(false);
            }
            let r = reduce(&q.lambda, &q.mu, q.bx).map_err(|e| format!("{q}: {e}"))?;
            r.verify(&fillings).map_err(|e| format!("{q}: {e}"))?;
            let survivors: Vec<&SetValuedFilling> = fillings.iter().filter(|t| r.is_survivor(t)).collect();
            let image: Vec<(&SetValuedFilling, SetValuedFilling)> =
                survivors.iter().map(|t| (*t, r.forward(t).unwrap())).collect();
            let map = content_map(&image).map_err(|e| format!("{q}: {e}"))?;
            let source = counts(survivors.iter().map(|t| (*t).clone()));
            let target = counts(r.reduced_fillings());
            let moved: BTreeMap<Vec<u32>, usize> = source.iter().map(|(c, &n)| (map[c].clone(), n)).collect();
            if moved != target {
                return Err(format!("{q}: counts per content differ"));
            }
            Ok(true)
        })
        .collect();
    let checked = results.iter().filter(|r| matches!(r, Ok(true))).count();
    first_failures(results.into_iter().filter_map(|r| r.err()).collect())?;
    Ok(format!("{checked} rectangle-lambda instances: witness bijective, counts per content preserved"))
}

fn transported(q: &RichardsonQuadruple, after: &RichardsonQuadruple, w: &DemolitionWitness) -> Result<(), String> {
    let src = enumerate_buch_tableaux(&q.lambda, &q.mu, q.bx);
    let image: Vec<(&SetValuedFilling, SetValuedFilling)> = src
        .iter()
        .map(|t| w.forward(t).map(|u| (t, u)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for (t, u) in &image {
        if &w.backward(u).map_err(|e| e.to_string())? != *t {
            return Err("backward does not invert forward".to_string());
        }
    }
    let dst = enumerate_buch_tableaux(&after.lambda, &after.mu, after.bx);
    let mut got: Vec<&SetValuedFilling> = image.iter().map(|p| &p.1).collect();
    got.sort_by_key(|t| t.order_key());
    if got.len() != dst.len() || got.iter().zip(&dst).any(|(a, b)| *a != b) {
        return Err("witness is not onto the demolished fillings".to_string());
    }
    let map = content_map(&image)?;
    let (p, p2): (ContentPoset, ContentPoset) = (
        build_poset(&q.lambda, &q.mu, q.bx).map_err(|e| e.to_string())?,
        build_poset(&after.lambda, &after.mu, after.bx).map_err(|e| e.to_string())?,
    );
    if p.len() != p2.len() {
        return Err(format!("{} vertices against {}", p.len(), p2.len()));
    }
    let image_of = |i: usize| p2.index_of(&map[&p.vertices()[i].content]).expect("image vertex");
    for (i, v) in p.vertices().iter().enumerate() {
        if p2.vertices()[image_of(i)].count != v.count {
            return Err(format!("count changes at {:?}", v.content));
        }
    }
    let covers: BTreeSet<(usize, usize)> = p.covers().iter().map(|&(a, b)| (image_of(a), image_of(b))).collect();
    if covers != p2.covers().iter().copied().collect() {
        return Err("covers are not transported".to_string());
    }
    let (m, m2) = (mobius(&p), mobius(&p2));
    if (0..p.len()).any(|i| m.values[i] != m2.values[image_of(i)]) {
        return Err("Möbius values are not transported".to_string());
    }
    Ok(())
}

fn demolition(all: &[RichardsonQuadruple]) -> Verdict {
    let results: Vec<Result<usize, String>> = all
        .par_iter()
        .filter(|q| !q.is_zero_product())
        .map(|q| {
            let moves = q
                .full_rows()
                .into_iter()
                .map(|r| demolish_row(q, r))
                .chain(q.full_columns().into_iter().map(|j| demolish_column(q, j)));
            let mut steps = 0;
            for mv in moves {
                let (after, w) = mv.map_err(|e| format!("{q}: {e}"))?;
                transported(q, &after, &w).map_err(|e| format!("{q} {:?} {}: {e}", w.kind, w.index))?;
                steps += 1;
            }
            let ends = all_basic_demolitions(q);
            let Demolition::Basic(b, _) = basic_demolition(q) else {
                return Err(format!("{q}: nonzero product demolished to zero"));
            };
            if ends.len() != 1 || !ends.contains(&b) {
                return Err(format!("{q}: demolition orders end at {ends:?}"));
            }
            Ok(steps)
        })
        .collect();
    let steps: usize = results.iter().filter_map(|r| r.as_ref().ok()).sum();
    let mut failures: Vec<String> = results.into_iter().filter_map(|r| r.err()).collect();

    // the two paths of the worked figure
    let q = RichardsonQuadruple::new(Partition::new([2, 2]).unwrap(), Partition::new([2, 1]).unwrap(), bx(3, 3)).unwrap();
    let target = RichardsonQuadruple::new(Partition::new([1]).unwrap(), Partition::new([1]).unwrap(), bx(2, 2)).unwrap();
    let (rows, cols) = (q.full_rows(), q.full_columns());
    if rows != vec![2] || cols != vec![2] {
        failures.push(format!("figure: full rows {rows:?}, full columns {cols:?}"));
    } else {
        let (by_row, _) = demolish_row(&q, 2).unwrap();
        let (by_col, _) = demolish_column(&q, 2).unwrap();
        for first in [by_row, by_col] {
            match basic_demolition(&first) {
                Demolition::Basic(b, _) if b == target => {}
                other => failures.push(format!("figure: {first} ends at {other:?}")),
            }
        }
    }
    first_failures(failures)?;
    Ok(format!("{steps} demolition steps transport posets and Möbius values, orders confluent, figure paths end at {target}"))
}

fn classifier(all: &[RichardsonQuadruple]) -> Verdict {
    let failures: Vec<String> = all
        .par_iter()
        .flat_map_iter(|q| {
            let mut f = Vec::new();
            if is_multiplicity_free(q).verdict != is_multiplicity_free_brute(q) {
                f.push(format!("{q}: H-mf verdicts differ"));
            }
            let k = k_multiplicity_free_verdict(q);
            if !k.agree() {
                f.push(format!("{q}: K-mf {k:?}"));
            }
            f
        })
        .collect();
    let mut failures = failures;
    let g = RichardsonQuadruple::new(Partition::new([2, 1]).unwrap(), Partition::new([2, 2]).unwrap(), bx(4, 4)).unwrap();
    let k = k_multiplicity_free_verdict(&g);
    if !is_multiplicity_free(&g).verdict || k.by_shape || k.by_coefficients {
        failures.push(format!("{g}: expected H-mf true, K-mf false, got {k:?}"));
    }
    first_failures(failures)?;
    Ok(format!("{} instances agree with brute force; {g} is H-mf but not K-mf", all.len()))
}

fn main() {
    let all = in_range();
    let mf = multiplicity_free(&all);
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("figure reproduction", Box::new(figures)),
        ("oracle equivalence", Box::new(oracle)),
        ("Möbius values equal coefficients", Box::new(|| main_theorem(&mf))),
        ("sign-reversing matchings", Box::new(|| matchings(&mf))),
        ("involution laws", Box::new(involution_laws)),
        ("reduction witness", Box::new(|| reduction(&all))),
        ("demolition", Box::new(|| demolition(&all))),
        ("classifier agreement", Box::new(|| classifier(&all))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
                failed += 1;
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
