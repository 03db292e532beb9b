//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed. The process
//! fails when a criterion's outcome differs from `EXPECTED_RED`, the list of
//! criteria known to fail on their own stated terms.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use common::{free_market, generated_market};
use rrc::fixtures::{self, college_first_order};
use rrc::gen::{generate_market, Alignment, GenConfig};
use rrc::oracle::{
    census, deferred_acceptance, optimal_profiles, search_space, strategyproofness_probe, ProbeScope, DEFAULT_BOUND,
};
use rrc::sim::{generate_cases, run_cases, ExperimentConfig, RunResult, TIMINGS_FILE};
use rrc::{
    audit, cutoffs_of, induced_matching, is_optimal, CollegeId, Contract, Market, Matching, MechanismKind,
    ResourceId, Schedule, StudentId,
};

/// Criteria whose stated property does not hold. The first fixture market
/// listed for direct-envy stability has a direct-envy stable matching that
/// leaves the only resource unit idle while a waste-blocking contract for it
/// exists, so it is not weakly stable.
const EXPECTED_RED: &[u32] = &[4];

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Duration,
    run: fn(&mut Shared) -> Outcome,
}

/// Results reused by criteria that share one run.
#[derive(Default)]
struct Shared {
    grid: Option<Vec<RunResult>>,
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn matching(m: &Market, xs: &[(u32, u32, u32)]) -> Matching {
    Matching::from_contracts(m.n_students(), xs.iter().map(|&(s, c, r)| Contract::new(s, c, r))).unwrap()
}

fn show(set: &[&Matching]) -> String {
    set.iter().map(|mu| mu.to_string()).collect::<Vec<_>>().join(" ")
}

fn example1_census(_: &mut Shared) -> Outcome {
    let m = fixtures::get("no_stable").unwrap().market;
    let c = census(&m)?;
    let stable = c.stable();
    Ok((
        c.len() == 5 && stable.is_empty(),
        format!("{} feasible IR matchings, {} stable", c.len(), stable.len()),
    ))
}

fn unique_wasteful_des(_: &mut Shared) -> Outcome {
    let m = fixtures::get("wasteful_des").unwrap().market;
    let c = census(&m)?;
    let expected = matching(&m, &[(0, 0, 0), (2, 1, 0)]);
    let des = c.direct_envy_stable();
    let inefficient = c.entry(&expected).is_some_and(|e| !e.flags.resource_efficient);
    Ok((
        des == [&expected] && inefficient,
        format!("direct-envy stable set {}; resource-inefficient={inefficient}", show(&des)),
    ))
}

fn two_des_not_envy_free(_: &mut Shared) -> Outcome {
    let m = fixtures::get("two_des").unwrap().market;
    let c = census(&m)?;
    let expected = [
        matching(&m, &[(0, 2, 0), (1, 1, 1), (2, 0, 0)]),
        matching(&m, &[(0, 0, 0), (1, 1, 0), (2, 2, 1)]),
    ];
    let des = c.direct_envy_stable();
    let same = des.len() == 2 && expected.iter().all(|mu| des.contains(&mu));
    let envy_free = des.iter().filter(|mu| c.entry(mu).is_some_and(|e| e.flags.envy_free)).count();
    Ok((same && envy_free == 0, format!("direct-envy stable set {}; envy-free members {envy_free}", show(&des))))
}

fn scan(
    m: &Market,
    label: &str,
    audits: &mut usize,
    violations: &mut Vec<String>,
) -> Result<(), Box<dyn std::error::Error>> {
    for mu in census(m)?.matchings() {
        *audits += 1;
        let flags = audit(m, mu)?.flags;
        if flags.direct_envy_stable && !flags.weakly_stable {
            violations.push(format!("{label} {mu}"));
        }
    }
    Ok(())
}

fn des_implies_weakly_stable(_: &mut Shared) -> Outcome {
    let mut audits = 0usize;
    let mut markets = 0usize;
    let mut violations = Vec::new();
    for f in fixtures::all() {
        scan(&f.market, f.name, &mut audits, &mut violations)?;
    }
    let in_fixtures = violations.len();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    while audits < 10_000 || markets < 500 {
        let seed: u64 = rng.random();
        let s = rng.random_range(1..=6);
        let c = rng.random_range(1..=3);
        let r = rng.random_range(0..=2);
        let m = if rng.random_bool(0.5) {
            free_market(seed, s, c, r)
        } else {
            match generated_market(seed, s, c, r, rng.random()) {
                Some(m) => m,
                None => continue,
            }
        };
        if search_space(&m) > 20_000 {
            continue;
        }
        markets += 1;
        scan(&m, &format!("random market {seed:#x} ({s}/{c}/{r})"), &mut audits, &mut violations)?;
    }
    let first = violations.first().cloned().unwrap_or_default();
    Ok((
        violations.is_empty(),
        format!(
            "{audits} audits over {} fixtures and {markets} random markets; violations: {in_fixtures} in fixtures, {} in random markets{}",
            fixtures::NAMES.len(),
            violations.len() - in_fixtures,
            if first.is_empty() { String::new() } else { format!(", first: {first}") }
        ),
    ))
}

fn optimal_profiles_match_des(_: &mut Shared) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = Vec::new();
    let mut members = 0;
    let total = 300;
    for _ in 0..total {
        let seed: u64 = rng.random();
        let (s, c, r) = (rng.random_range(1..=3), rng.random_range(1..=2), rng.random_range(0..=1));
        let m = match rng.random_bool(0.5) {
            true => free_market(seed, s, c, r),
            false => match generated_market(seed, s, c, r, rng.random()) {
                Some(m) => m,
                None => free_market(seed, s, c, r),
            },
        };
        let mut induced: Vec<Matching> =
            optimal_profiles(&m, DEFAULT_BOUND)?.iter().map(|k| induced_matching(&m, k)).collect();
        induced.sort_by_key(|mu| mu.to_string());
        induced.dedup();
        let c = census(&m)?;
        let mut des: Vec<Matching> = c.direct_envy_stable().into_iter().cloned().collect();
        des.sort_by_key(|mu| mu.to_string());
        let mut ok = induced == des;
        for mu in &des {
            members += 1;
            let k = cutoffs_of(&m, mu)?;
            ok &= induced_matching(&m, &k) == *mu && is_optimal(&m, &k);
        }
        if !ok {
            mismatches.push(format!("{seed:#x}"));
        }
    }
    Ok((
        mismatches.is_empty(),
        format!("{total} markets, {members} direct-envy stable matchings round-tripped, {} mismatches {mismatches:?}", mismatches.len()),
    ))
}

const GRID_REGIMES: [Alignment; 4] = [
    Alignment::None,
    Alignment::StudentFull,
    Alignment::CollegeFull,
    Alignment::StudentAndCollegeFull,
];

fn grid(shared: &mut Shared) -> Result<&[RunResult], Box<dyn std::error::Error>> {
    if shared.grid.is_none() {
        let config = ExperimentConfig {
            name: "acceptance-grid".into(),
            seed: 20240601,
            replicas: 100,
            seeds_per_market: 5,
            mechanisms: MechanismKind::ALL.to_vec(),
            alignments: GRID_REGIMES.to_vec(),
            market: GenConfig::balanced(100, 10, 4, Alignment::None),
        };
        let cases = generate_cases(&config, jobs())?;
        let results = run_cases(&cases, &config.mechanisms, 5, &config.digest(), jobs(), false)?;
        shared.grid = Some(results.into_iter().map(|(r, _)| r).collect());
    }
    Ok(shared.grid.as_deref().unwrap())
}

fn grid_check(
    shared: &mut Shared,
    regimes: &[Alignment],
    kinds: &[MechanismKind],
    holds: fn(&RunResult) -> bool,
) -> Result<(usize, usize), Box<dyn std::error::Error>> {
    let runs: Vec<&RunResult> = grid(shared)?
        .iter()
        .filter(|r| regimes.contains(&r.alignment) && kinds.contains(&r.mechanism))
        .collect();
    Ok((runs.len(), runs.iter().filter(|r| !holds(r)).count()))
}

const PROPERTY_REGIMES: [Alignment; 3] = [Alignment::None, Alignment::StudentFull, Alignment::CollegeFull];

fn cutoff_outputs_des(shared: &mut Shared) -> Outcome {
    let kinds = [MechanismKind::Irc, MechanismKind::Imc, MechanismKind::Idc];
    let (runs, bad) = grid_check(shared, &PROPERTY_REGIMES, &kinds, |r| r.flags.direct_envy_stable)?;
    Ok((bad == 0 && runs == 3 * 3 * 500, format!("{runs} runs, {bad} not direct-envy stable")))
}

fn iuc_envy_free(shared: &mut Shared) -> Outcome {
    let (runs, bad) = grid_check(shared, &PROPERTY_REGIMES, &[MechanismKind::Iuc], |r| {
        r.counts.direct_envy + r.counts.indirect_envy + r.counts.resource == 0
    })?;
    Ok((bad == 0 && runs == 3 * 500, format!("{runs} runs, {bad} with envy or resource blocks")))
}

fn serial_non_wasteful(shared: &mut Shared) -> Outcome {
    let kinds = [MechanismKind::Rsd, MechanismKind::Csd];
    let (runs, bad) = grid_check(shared, &PROPERTY_REGIMES, &kinds, |r| r.counts.resource + r.counts.seat == 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    let mut dominated = Vec::new();
    for _ in 0..300 {
        let seed: u64 = rng.random();
        let (s, c, r) = (rng.random_range(1..=4), rng.random_range(1..=3), rng.random_range(0..=2));
        let m = generated_market(seed, s, c, r, rng.random()).unwrap_or_else(|| free_market(seed, s, c, r));
        let census = census(&m)?;
        for kind in kinds {
            for run in 0..3 {
                let mu = kind.run(&m, &Schedule::Seeded(seed ^ run)).matching;
                checked += 1;
                if !census.entry(&mu).is_some_and(|e| e.pareto_efficient) {
                    dominated.push(format!("{kind} on {seed:#x}"));
                }
            }
        }
    }
    Ok((
        bad == 0 && runs == 2 * 3 * 500 && dominated.is_empty(),
        format!(
            "{runs} grid runs, {bad} wasteful; {checked} small-market runs, {} Pareto-dominated",
            dominated.len()
        ),
    ))
}

fn csd_stable_when_colleges_aligned(shared: &mut Shared) -> Outcome {
    let regimes = [Alignment::CollegeFull, Alignment::StudentAndCollegeFull];
    let (runs, bad) = grid_check(shared, &regimes, &[MechanismKind::Csd], |r| r.counts.total == 0)?;
    Ok((bad == 0 && runs == 2 * 500, format!("{runs} runs, {bad} with blocking contracts")))
}

fn no_resources_is_deferred_acceptance(_: &mut Shared) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut bad = Vec::new();
    for i in 0..100u64 {
        let students = rng.random_range(1..=60);
        let colleges = rng.random_range(1..=8.min(students));
        let alignment = Alignment::ALL[i as usize % 5];
        let m = generate_market(&GenConfig::balanced(students, colleges, 0, alignment), rng.random())?;
        let da = deferred_acceptance(&m);
        let mut ok = audit(&m, &da)?.flags.stable;
        for kind in MechanismKind::CUTOFF {
            for _ in 0..2 {
                ok &= kind.run(&m, &Schedule::Seeded(rng.random())).matching == da;
            }
        }
        if !ok {
            bad.push(i);
        }
    }
    Ok((bad.is_empty(), format!("100 markets, 4 mechanisms x 2 seeds each; mismatches {bad:?}")))
}

fn misreports(_: &mut Shared) -> Outcome {
    let f = fixtures::get("truncation_gain").unwrap();
    let m = &f.market;
    let s1 = StudentId(0);
    let truthful = matching(m, &[(0, 0, 0), (1, 1, 0)]);
    let lied = matching(m, &[(0, 1, 0), (1, 0, 0)]);
    let report = m.with_preferences(s1, vec![(CollegeId(1), ResourceId::EMPTY)])?;
    let mut improved = 0;
    for kind in MechanismKind::CUTOFF {
        let schedule = college_first_order(m, kind, ResourceId::EMPTY);
        let honest = kind.run(m, &schedule).matching;
        let gamed = kind.run(&report, &schedule).matching;
        if honest == truthful && gamed == lied && m.prefers(s1, gamed.get(s1), honest.get(s1)) {
            improved += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut probes = 0;
    let mut found = Vec::new();
    for _ in 0..60 {
        let seed: u64 = rng.random();
        let (s, c, r) = (rng.random_range(1..=3), rng.random_range(1..=2), rng.random_range(0..=1));
        let m = free_market(seed, s, c, r);
        for student in m.students() {
            if m.preferences(student).len() > 4 {
                continue;
            }
            probes += 1;
            if let Some(cx) =
                strategyproofness_probe(&m, MechanismKind::Rsd, student, &ProbeScope::AllOrders, DEFAULT_BOUND)?
            {
                found.push(format!("{seed:#x} {student} {:?}", cx.report));
            }
        }
    }
    Ok((
        improved == 4 && found.is_empty(),
        format!(
            "misreport helps under {improved}/4 cutoff mechanisms; {probes} RSD probes over all orders, {} counterexamples",
            found.len()
        ),
    ))
}

fn paired_one_sided_p(low: &[f64], high: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = high.iter().zip(low).map(|(h, l)| h - l).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).expect("valid degrees of freedom");
    (mean, 1.0 - dist.cdf(t))
}

fn cutoff_ordering(_: &mut Shared) -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/blocking_100x10x4.toml");
    let mut config = ExperimentConfig::load(&path)?;
    config.alignments = vec![Alignment::None];
    config.mechanisms = vec![MechanismKind::Imc, MechanismKind::Irc, MechanismKind::Idc];
    config.seeds_per_market = 1;
    let cases = generate_cases(&config, jobs())?;
    let results = run_cases(&cases, &config.mechanisms, 1, &config.digest(), jobs(), false)?;
    let mut totals: BTreeMap<MechanismKind, Vec<f64>> = BTreeMap::new();
    for (r, _) in &results {
        totals.entry(r.mechanism).or_default().push(r.counts.total as f64);
    }
    let mean = |k| totals[&k].iter().sum::<f64>() / totals[&k].len() as f64;
    let (imc, irc, idc) = (MechanismKind::Imc, MechanismKind::Irc, MechanismKind::Idc);
    let (_, p_low) = paired_one_sided_p(&totals[&imc], &totals[&irc]);
    let (_, p_high) = paired_one_sided_p(&totals[&irc], &totals[&idc]);
    Ok((
        mean(imc) < mean(irc) && mean(irc) < mean(idc) && p_low < 0.05 && p_high < 0.05,
        format!(
            "{} replicas: IMC {:.2} < IRC {:.2} (p={p_low:.2e}) < IDC {:.2} (p={p_high:.2e})",
            config.replicas,
            mean(imc),
            mean(irc),
            mean(idc)
        ),
    ))
}

fn rrc(args: &[&str]) -> Result<(), Box<dyn std::error::Error>> {
    let out = Command::new(env!("CARGO_BIN_EXE_rrc")).args(args).output()?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("rrc {args:?}: {}", String::from_utf8_lossy(&out.stderr)).into())
    }
}

fn snapshot(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, std::io::Error> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name != TIMINGS_FILE {
            files.insert(name, fs::read(entry.path())?);
        }
    }
    Ok(files)
}

fn determinism(_: &mut Shared) -> Outcome {
    let config = tempfile::NamedTempFile::new()?;
    let experiment = ExperimentConfig {
        name: "determinism".into(),
        seed: 3,
        replicas: 8,
        seeds_per_market: 2,
        mechanisms: MechanismKind::ALL.to_vec(),
        alignments: Alignment::ALL.to_vec(),
        market: GenConfig::balanced(40, 5, 3, Alignment::None),
    };
    fs::write(config.path(), experiment.to_toml())?;
    let config = config.path().to_str().unwrap();
    let mut snapshots = Vec::new();
    for jobs in ["1", "4"] {
        let dir = tempfile::tempdir()?;
        let out = dir.path().to_str().unwrap();
        rrc(&["generate", "--config", config, "--out", out, "--seed", "77", "--jobs", jobs])?;
        rrc(&["run", "--out", out, "--jobs", jobs])?;
        rrc(&["table", "--out", out])?;
        snapshots.push(snapshot(dir.path())?);
    }
    let same = snapshots[0] == snapshots[1];
    let files = snapshots[0].len();
    Ok((same && files > 40, format!("{files} files compared across two runs (1 and 4 jobs), identical={same}")))
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, title: "no stable matching in the two-student fixture", limit: Duration::from_secs(1), run: example1_census },
    Criterion { id: 2, title: "unique direct-envy stable matching wastes the resource", limit: Duration::from_secs(1), run: unique_wasteful_des },
    Criterion { id: 3, title: "two direct-envy stable matchings, neither envy-free", limit: Duration::from_secs(1), run: two_des_not_envy_free },
    Criterion { id: 4, title: "direct-envy stable implies weakly stable", limit: Duration::from_secs(60), run: des_implies_weakly_stable },
    Criterion { id: 5, title: "optimal cutoff profiles induce exactly the direct-envy stable set", limit: Duration::from_secs(300), run: optimal_profiles_match_des },
    Criterion { id: 6, title: "IRC, IMC, IDC outputs are direct-envy stable", limit: Duration::from_secs(600), run: cutoff_outputs_des },
    Criterion { id: 7, title: "IUC outputs have no envy and no resource blocks", limit: Duration::from_secs(600), run: iuc_envy_free },
    Criterion { id: 8, title: "RSD and CSD are non-wasteful and Pareto-efficient", limit: Duration::from_secs(600), run: serial_non_wasteful },
    Criterion { id: 9, title: "CSD is stable under aligned college priorities", limit: Duration::from_secs(600), run: csd_stable_when_colleges_aligned },
    Criterion { id: 10, title: "without resources cutoff mechanisms equal deferred acceptance", limit: Duration::from_secs(60), run: no_resources_is_deferred_acceptance },
    Criterion { id: 11, title: "cutoff mechanisms are manipulable, RSD is not", limit: Duration::from_secs(60), run: misreports },
    Criterion { id: 12, title: "mean blocking IMC < IRC < IDC, paired 5% level", limit: Duration::from_secs(600), run: cutoff_ordering },
    Criterion { id: 13, title: "byte-identical outputs across runs", limit: Duration::from_secs(300), run: determinism },
];

fn main() -> ExitCode {
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut shared = Shared::default();
    let mut surprises = Vec::new();
    for criterion in CRITERIA.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let started = Instant::now();
        let outcome = (criterion.run)(&mut shared);
        let elapsed = started.elapsed();
        let (passed, detail) = match outcome {
            Ok((passed, detail)) => (passed && elapsed <= criterion.limit, detail),
            Err(err) => (false, format!("error: {err}")),
        };
        let status = if passed { "PASS" } else { "FAIL" };
        println!("{status} {:>2}. {}: {detail} [{:.1}s]", criterion.id, criterion.title, elapsed.as_secs_f64());
        if passed == EXPECTED_RED.contains(&criterion.id) {
            surprises.push(criterion.id);
        }
    }
    if surprises.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("criteria with unexpected outcomes: {surprises:?}");
        ExitCode::FAILURE
    }
}
