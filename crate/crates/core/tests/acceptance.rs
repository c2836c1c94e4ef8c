//! Acceptance criteria. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion.

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::*;
use num_rational::BigRational;
use num_traits::{One, Signed};
use plausia::agreement::{
    check_comparison_lemma, check_useful_lemma, default_thresholds, posterior_profiles, AgreementChecker, Outcome,
    Theorem,
};
use plausia::axioms::{self, AxiomOptions};
use plausia::event::Event;
use plausia::model::{EpistemicModel, Measure, Priors};
use plausia::modelfile;
use plausia::operators;
use plausia::report::{AxiomId, Verdict};
use plausia::search::{self, brute_force_common_belief, brute_force_common_knowledge, Family, SearchParams, Target};
use plausia::values::Value;
use rayon::prelude::*;

type CriterionResult = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn value_of(w: &plausia::report::Witness, role: &str) -> Option<Value> {
    w.value_named(role).cloned().flatten()
}

fn product_cond(p: &[BigRational], e: Event, f: Event) -> BigRational {
    let m = |x: Event| x.states().fold(BigRational::from_integer(0.into()), |acc, s| acc + &p[s]);
    m(e & f) / m(f)
}

/// Product-prior example: CP7 fails at d = (1/10,1/10), E = {w2}.
fn criterion_1() -> CriterionResult {
    let m = golden("product_prior.epm");
    let d = Value::pair((1, 10), (1, 10));
    let e = m.events()["E"];
    ensure(e == Event::singleton(1), || format!("E is {e:?}"))?;

    // Independent computation from the pair prior.
    let Priors::Common(Measure::ProductPrior(p, q)) = m.priors() else {
        return Err("expected a common product prior".into());
    };
    let mut believes = Vec::new();
    for part in m.partitions() {
        let mut b = Event::EMPTY;
        for blk in part.blocks() {
            let (a, c) = (product_cond(p, e, *blk), product_cond(q, e, *blk));
            if a >= r(1, 10) && c >= r(1, 10) {
                b = b | *blk;
            }
        }
        believes.push(b);
    }
    let expected = [
        Value::Pair(r(1, 2), r(1, 2)),
        Value::Pair(r(1, 4), r(2, 3)),
    ];
    for (i, b) in believes.iter().enumerate() {
        let oracle = Value::Pair(product_cond(p, e, *b), product_cond(q, e, *b));
        ensure(oracle == expected[i], || format!("oracle Pl(E|B_{}) = {oracle}", i + 1))?;
        let lib_b = operators::d_believes(&m, i, &d, e).map_err(|x| x.to_string())?;
        ensure(lib_b == *b, || format!("B_{}^d(E) = {lib_b:?}, oracle {b:?}", i + 1))?;
        let v = m.cond(i, e, lib_b).map_err(|x| x.to_string())?;
        ensure(v.as_ref() == Some(&expected[i]), || format!("Pl(E|B_{}) = {v:?}", i + 1))?;
    }

    let opts = AxiomOptions::default();
    let at_d = axioms::check_cp7_at(&m, std::slice::from_ref(&d), &opts);
    ensure(at_d.failed(), || "CP7 passes at d".into())?;
    let on_e: Vec<_> = at_d.witnesses.iter().filter(|w| w.event_named("E") == Some(e)).collect();
    ensure(on_e.len() == 1, || format!("{} CP7 witnesses for E={{w2}}", on_e.len()))?;
    let w = &at_d.witnesses[0];
    ensure(w.event_named("E") == Some(e), || "first CP7 witness is not E={w2}".into())?;
    ensure(
        value_of(w, "Pl(E|B_i)") == Some(expected[0].clone()) && value_of(w, "Pl(E|B_j)") == Some(expected[1].clone()),
        || format!("witness values {w:?}"),
    )?;
    ensure(axioms::check_cp7(&m, &opts).failed(), || "full CP7 sweep passes".into())?;
    let ms = axioms::run_suite(&m, &[AxiomId::M1, AxiomId::M2, AxiomId::M3, AxiomId::M4], &opts);
    for rep in &ms {
        ensure(rep.passed(), || format!("{} fails", rep.subject))?;
    }
    Ok("Pl(E|B_1)=(1/2,1/2), Pl(E|B_2)=(1/4,2/3); CP7 fails; M1-M4 pass".into())
}

/// Shifted-table example: additive axioms, CP6, CP7 hold; M3 is unsatisfiable.
fn criterion_2() -> CriterionResult {
    let m = golden("shifted_table.epm");
    for exempt in [false, true] {
        let opts = AxiomOptions {
            exempt_bot_bot: exempt,
            ..AxiomOptions::default()
        };
        use AxiomId::*;
        for rep in axioms::run_suite(&m, &[CP1, CP2, CP3, CP4, A1, A2, A3, A4, CP6, CP7], &opts) {
            ensure(rep.passed(), || format!("{} fails (exempt={exempt})", rep.subject))?;
        }
    }
    let opts = AxiomOptions::default();
    let m3 = axioms::check_m3(&m, &opts);
    ensure(m3.failed(), || "M3 passes".into())?;
    let (x, y, z) = (Event::singleton(0), Event::from_states([0, 1]), m.full());
    let w = m3
        .witnesses
        .iter()
        .find(|w| w.event_named("X") == Some(x) && w.event_named("Y") == Some(y) && w.event_named("Z") == Some(z))
        .ok_or("no M3 witness on {w1} ⊆ {w1 w2} ⊆ W")?;
    let half = Value::scalar(1, 2);
    ensure(
        value_of(w, "Pl(X|Y)") == Some(half.clone()) && value_of(w, "Pl(Y|Z)") == Some(half.clone()),
        || format!("level-one conditionals {w:?}"),
    )?;
    let c = |e: Event| m.cond(0, e, z).unwrap();
    ensure(c(x) == Some(Value::scalar(13, 50)), || format!("Pl({{w1}}|W) = {:?}", c(x)))?;
    ensure(c(Event::singleton(1)) == Some(Value::scalar(12, 50)), || "Pl({w2}|W) ≠ 12/50".into())?;
    ensure(
        m.cond(0, Event::singleton(1), y).unwrap() == Some(half.clone()),
        || "Pl({w2}|{w1 w2}) ≠ 1/2".into(),
    )?;
    let sat = axioms::check_m3_satisfiability(&m, &opts);
    ensure(sat.failed(), || "M3 satisfiable".into())?;
    Ok("CP1-4, A1-A4 (both A3 modes), CP6, CP7 pass; M3 fails on 1/2·1/2 vs 13/50, 12/50".into())
}

/// The grid/6 counting model passes CP1–CP4 and A1–A4 exhaustively.
fn criterion_3() -> CriterionResult {
    let m = golden("counting_grid6.epm");
    ensure(m.domain().to_string() == "grid/6", || "domain is not grid/6".into())?;
    let opts = AxiomOptions::default();
    use AxiomId::*;
    for rep in axioms::run_suite(&m, &[CP1, CP2, CP3, CP4, A1, A2, A3, A4], &opts) {
        ensure(rep.passed() && !rep.vacuous, || format!("{} does not pass", rep.subject))?;
        ensure(rep.examined > 0, || format!("{} examined nothing", rep.subject))?;
        ensure(!rep.notes.iter().any(|n| n.contains("sampl")), || format!("{} was sampled", rep.subject))?;
    }
    Ok("exhaustive".into())
}

/// Fixpoint operators equal subset enumeration on the probability corpus.
fn criterion_4() -> CriterionResult {
    let corpus = probability_corpus();
    let thresholds = classical_thresholds();
    let results: Vec<Result<usize, String>> = corpus
        .par_iter()
        .map(|m| {
            let oracle = ProbOracle::new(m).ok_or("not a probability model")?;
            let mut count = 0;
            for e in Event::all(m.num_states()) {
                let ck = operators::common_knowledge(m, e).0;
                let expect = ev(oracle.common_knowledge(e.bits()));
                if ck != expect || brute_force_common_knowledge(m, e).unwrap() != expect {
                    return Err(format!("{}: C({e:?}) = {ck:?}, oracle {expect:?}", m.name()));
                }
                count += 1;
                for d in &thresholds {
                    let cb = operators::common_belief(m, d, e).map_err(|x| x.to_string())?.0;
                    let p = d.as_scalar().unwrap();
                    let expect = ev(oracle.common_belief(p, e.bits()));
                    if cb != expect || brute_force_common_belief(m, d, e).unwrap() != expect {
                        return Err(format!("{}: CB({d}, {e:?}) = {cb:?}, oracle {expect:?}", m.name()));
                    }
                    count += 1;
                }
            }
            Ok(count)
        })
        .collect();
    let mut total = 0;
    for r in results {
        total += r?;
    }
    Ok(format!("{} models, {total} instances, 100% agreement", corpus.len()))
}

/// Classical MSN over the probability corpus plus random models, checked
/// against the oracle; p = 1 reduces to equality.
fn msn_model(m: &EpistemicModel) -> Result<(usize, usize), String> {
    let oracle = ProbOracle::new(m).ok_or("not a probability model")?;
    let checker = AgreementChecker::new(m, AxiomOptions::default());
    let mut instances = 0;
    let mut nonvacuous = 0;
    for e in Event::all(m.num_states()) {
        let aumann = checker.check(Theorem::Aumann, e, None).map_err(|x| x.to_string())?;
        if aumann.outcome == Outcome::Violated {
            return Err(format!("{}: Aumann violated for {e:?}", m.name()));
        }
        for d in classical_thresholds() {
            let p = d.as_scalar().unwrap().clone();
            let v = checker.check(Theorem::MsnClassical, e, Some(&d)).map_err(|x| x.to_string())?;
            instances += 1;
            let mut any = false;
            for (profile, x) in oracle.profiles(e.bits()) {
                if oracle.common_belief(&p, x) == 0 {
                    continue;
                }
                any = true;
                for i in 0..profile.len() {
                    for j in 0..profile.len() {
                        if (&profile[i] - &profile[j]).abs() > BigRational::one() - &p {
                            return Err(format!("{}: oracle MSN violation E={e:?} p={p}", m.name()));
                        }
                    }
                }
            }
            let expect = if any { Outcome::Holds } else { Outcome::HoldsVacuously };
            if v.outcome != expect {
                return Err(format!("{}: E={e:?} p={p}: {} but oracle says {expect}", m.name(), v.outcome));
            }
            if any {
                nonvacuous += 1;
            }
            if p.is_one() {
                for g in v.groups.iter().filter(|g| !g.common.is_empty()) {
                    for pair in &g.pairs {
                        let equal = g.profile[pair.i] == g.profile[pair.j];
                        if pair.within_bound != Some(equal) {
                            return Err(format!("{}: p=1 bound disagrees with equality", m.name()));
                        }
                    }
                }
            }
        }
    }
    Ok((instances, nonvacuous))
}

fn criterion_5() -> CriterionResult {
    let mut corpus = probability_corpus();
    let enumerated = corpus.len();
    corpus.extend(random_corpus());
    let results: Vec<Result<(usize, usize), String>> = corpus.par_iter().map(msn_model).collect();
    let (mut instances, mut nonvacuous) = (0, 0);
    for r in results {
        let (a, b) = r?;
        instances += a;
        nonvacuous += b;
    }
    Ok(format!(
        "{enumerated} enumerated + {RANDOM_COUNT} random models, {instances} (E,p) instances ({nonvacuous} non-vacuous), 0 violations"
    ))
}

/// Generalized theorems never fail on models meeting their hypotheses.
fn criterion_6() -> CriterionResult {
    let mut corpus = product_corpus();
    corpus.extend(table_corpus());
    let results: Vec<Result<[usize; 2], String>> = corpus
        .par_iter()
        .map(|m| {
            let checker = AgreementChecker::new(m, AxiomOptions::default());
            let ds = default_thresholds(m);
            let mut applicable = [0usize; 2];
            for (k, t) in [Theorem::MsnWithMult, Theorem::MsnWithoutMult].into_iter().enumerate() {
                let verdicts = checker.sweep(t, &ds).map_err(|x| x.to_string())?;
                if let Some(v) = verdicts.iter().find(|v| v.outcome == Outcome::Violated) {
                    return Err(format!("{}: {t} violated for {:?} at {:?}", m.name(), v.event, v.threshold));
                }
                if verdicts.iter().any(|v| v.outcome != Outcome::NotApplicable) {
                    applicable[k] += 1;
                }
            }
            Ok(applicable)
        })
        .collect();
    let mut applicable = [0usize; 2];
    for r in results {
        let a = r?;
        applicable[0] += a[0];
        applicable[1] += a[1];
    }
    ensure(applicable[0] > 0 && applicable[1] > 0, || format!("too few applicable models: {applicable:?}"))?;

    let ex1 = golden("product_prior.epm");
    let d = Value::pair((1, 10), (1, 10));
    let e = ex1.events()["E"];
    let v = plausia::agreement::check_msn_without_mult(&ex1, e, &d).map_err(|x| x.to_string())?;
    ensure(v.outcome == Outcome::NotApplicable, || format!("Ex1 msn-nomult: {}", v.outcome))?;
    ensure(v.notes.iter().any(|n| n.contains("CP7")), || "Ex1 note does not name CP7".into())?;
    let checker = AgreementChecker::new(&ex1, AxiomOptions::default());
    for v in checker.sweep(Theorem::MsnWithMult, &default_thresholds(&ex1)).map_err(|x| x.to_string())? {
        ensure(
            matches!(v.outcome, Outcome::Holds | Outcome::HoldsVacuously | Outcome::Skipped),
            || format!("Ex1 msn-mult {:?} {:?}: {}", v.event, v.threshold, v.outcome),
        )?;
    }
    let ex2 = golden("shifted_table.epm");
    let checker = AgreementChecker::new(&ex2, AxiomOptions::default());
    for v in checker.sweep(Theorem::MsnWithoutMult, &default_thresholds(&ex2)).map_err(|x| x.to_string())? {
        ensure(v.outcome != Outcome::Violated && v.outcome != Outcome::NotApplicable, || {
            format!("Ex2 msn-nomult {:?}: {}", v.event, v.outcome)
        })?;
    }
    let out = Command::new(env!("CARGO_BIN_EXE_plausia"))
        .args(["agreement", examples_dir().join("product_prior.epm").to_str().unwrap()])
        .args(["--theorem", "msn-nomult", "--event", "E", "--threshold", "(1/10,1/10)"])
        .output()
        .map_err(|x| x.to_string())?;
    ensure(out.status.code() == Some(3), || format!("CLI exit {:?}", out.status.code()))?;
    let text = String::from_utf8_lossy(&out.stdout);
    ensure(
        text.contains("CP7 fails") && text.contains("(1/2,1/2)") && text.contains("(1/4,2/3)"),
        || format!("CLI output:\n{text}"),
    )?;
    Ok(format!(
        "{} models; applicable: {} with-mult, {} without-mult; Ex1 without-mult exits 3",
        corpus.len(),
        applicable[0],
        applicable[1]
    ))
}

/// Belief lemma parts 1–4 and the comparison lemma over the criterion-5 corpus.
fn criterion_7() -> CriterionResult {
    let mut corpus = probability_corpus();
    corpus.extend(random_corpus());
    let results: Vec<Result<usize, String>> = corpus
        .par_iter()
        .map(|m| {
            let mut count = 0;
            for e in Event::all(m.num_states()) {
                for p in classical_thresholds() {
                    let rep = check_useful_lemma(m, e, &p).map_err(|x| x.to_string())?;
                    if rep.verdict != Verdict::Pass {
                        return Err(format!("{}: lemma {:?} at E={e:?} p={p}", m.name(), rep.witnesses.first()));
                    }
                    count += 1;
                    for (_, x) in posterior_profiles(m, e) {
                        let rep = check_comparison_lemma(m, e, x, &p).map_err(|x| x.to_string())?;
                        if rep.failed() {
                            return Err(format!("{}: comparison lemma E={e:?} X={x:?} p={p}", m.name()));
                        }
                        count += usize::from(rep.verdict == Verdict::Pass);
                    }
                }
            }
            Ok(count)
        })
        .collect();
    let mut total = 0;
    for r in results {
        total += r?;
    }
    Ok(format!("{} models, {total} lemma instances, 0 violations", corpus.len()))
}

/// No model satisfies M1, M3, M4 (with CP1–CP4) while failing CP6.
fn criterion_8() -> CriterionResult {
    let mut corpus = probability_corpus();
    corpus.extend(random_corpus());
    corpus.extend(product_corpus());
    corpus.extend(table_corpus());
    for name in ["counting_grid6.epm", "product_prior.epm", "shifted_table.epm"] {
        corpus.push(golden(name));
    }
    let opts = AxiomOptions::default();
    let results: Vec<Result<bool, String>> = corpus
        .par_iter()
        .map(|m| {
            let rep = axioms::check_cp6_implication(m, &opts);
            match rep.verdict {
                Verdict::Fail => Err(format!("{}: M1∧M3∧M4 hold but CP6 fails", m.name())),
                _ => Ok(!rep.vacuous),
            }
        })
        .collect();
    let mut premises = 0;
    for r in results {
        premises += usize::from(r?);
    }
    Ok(format!("{} models, {premises} with all premises, 0 counterexamples", corpus.len()))
}

fn run_cli(args: &[&str], env: &[(&str, &str)]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_plausia"))
        .args(args)
        .envs(env.iter().copied())
        .output()
        .map_err(|x| x.to_string())?;
    Ok(out.stdout)
}

/// parse ∘ serialize is the identity; equal seeds give byte-identical JSON.
fn criterion_9() -> CriterionResult {
    for path in golden_paths() {
        let text = std::fs::read_to_string(&path).map_err(|x| x.to_string())?;
        let m = modelfile::parse(&text).map_err(|x| x.to_string())?;
        let canonical = modelfile::serialize(&m);
        let again = modelfile::parse(&canonical).map_err(|x| x.to_string())?;
        ensure(again == m, || format!("{}: parse∘serialize differs", path.display()))?;
        ensure(modelfile::serialize(&again) == canonical, || format!("{}: serialize not stable", path.display()))?;
    }
    let mut runs = 0;
    for path in golden_paths() {
        let p = path.to_str().unwrap();
        for args in [
            vec!["axioms", p, "--format", "json", "--seed", "7"],
            vec!["agreement", p, "--theorem", "msn-nomult", "--format", "json", "--seed", "7"],
        ] {
            // A cap below |W| forces seeded sampling.
            let env = [("PLAUSIA_MAX_STATES", "2")];
            let a = run_cli(&args, &env)?;
            let b = run_cli(&args, &env)?;
            ensure(!a.is_empty() && a == b, || format!("{args:?}: outputs differ"))?;
            runs += 1;
        }
    }
    let search = ["search", "--target", "msn", "--random", "300", "--max-states", "4", "--seed", "11", "--format", "json"];
    let a = run_cli(&search, &[])?;
    ensure(!a.is_empty() && a == run_cli(&search, &[])?, || "search outputs differ".into())?;
    let params = SearchParams {
        family: Family::Product,
        max_states: 3,
        random: Some(200),
        seed: 5,
        ..SearchParams::default()
    };
    let one = search::mine_counterexamples(Target::Axiom(AxiomId::CP7), &[], &params).map_err(|x| x.to_string())?;
    let two = search::mine_counterexamples(Target::Axiom(AxiomId::CP7), &[], &params).map_err(|x| x.to_string())?;
    let json = |o| serde_json::to_string(&search::Manifest::new(o, &params)).unwrap();
    ensure(json(&one) == json(&two), || "search manifests differ".into())?;
    Ok(format!("3 golden round-trips, {} byte-identical JSON reruns", runs + 2))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Duration, fn() -> CriterionResult); 9] = [
        (1, "product-prior CP7 counterexample", Duration::from_secs(1), criterion_1),
        (2, "shifted-table M3 counterexample", Duration::from_secs(5), criterion_2),
        (3, "grid/6 counting model", Duration::from_secs(1), criterion_3),
        (4, "oracle equivalence", Duration::from_secs(300), criterion_4),
        (5, "MSN soundness sweep", Duration::from_secs(600), criterion_5),
        (6, "generalized-theorem gating", Duration::from_secs(600), criterion_6),
        (7, "lemma suite", Duration::from_secs(600), criterion_7),
        (8, "M1+M3+M4 implies CP6", Duration::from_secs(600), criterion_8),
        (9, "round-trip and determinism", Duration::from_secs(120), criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (n, title, limit, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|a| a == &n.to_string()) {
            continue;
        }
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > limit => Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match result {
            Ok(detail) => println!("criterion {n} PASS [{elapsed:.2?}] {title}: {detail}"),
            Err(e) => {
                failed += 1;
                println!("criterion {n} FAIL [{elapsed:.2?}] {title}: {e}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
