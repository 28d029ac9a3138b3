use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::canonical::{
    canonical_generators, canonical_maps, random_generator_of_type, random_loxodromic,
    random_map_of_class, random_point, random_sl2,
};
use crate::equibaire::{
    theorem1_verdict, theorem2_verdict, Theorem1Config, Theorem2Config, Verdict,
};
use crate::error::{Error, Result};
use crate::flow::SubgroupTag;
use crate::moebius::{Basin, ClassTag};
use crate::sphere::SphereGrid;

pub const SUITES: [&str; 4] = ["canonical-forms", "theorem1", "theorem2", "metric-axioms"];

const CONJUGATES: usize = 100;
const THEOREM1_MAPS: usize = 5;
const THEOREM2_RANDOM: usize = 5;
const TRIPLES: usize = 10_000;
const METRIC_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct BatteryRow {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn row(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> BatteryRow {
    BatteryRow {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn verdict_name(v: Verdict) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|j| j.as_str().map(String::from))
        .unwrap_or_default()
}

fn canonical_forms(seed: u64) -> Vec<BatteryRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for (tag, f) in canonical_maps() {
        let got = f.classify().tag;
        let kept = (0..CONJUGATES)
            .filter(|_| f.conjugate_by(&random_sl2(&mut rng, 6.0)).classify().tag == tag)
            .count();
        rows.push(row(
            format!("map {tag:?}").to_lowercase(),
            got == tag && kept == CONJUGATES,
            format!("classified {got:?}, {kept}/{CONJUGATES} conjugates kept the tag")
                .to_lowercase(),
        ));
    }
    for (tag, a) in canonical_generators() {
        let got = a.classify().tag();
        let kept = (0..CONJUGATES)
            .filter(|_| random_generator_of_type(&mut rng, tag).classify().tag() == tag)
            .count();
        rows.push(row(
            format!("generator {tag:?}").to_lowercase(),
            got == tag && kept == CONJUGATES,
            format!("classified {got:?}, {kept}/{CONJUGATES} conjugates kept the tag")
                .to_lowercase(),
        ));
    }
    rows
}

fn theorem1(seed: u64, workers: usize) -> Result<Vec<BatteryRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = Theorem1Config {
        seed,
        workers,
        ..Theorem1Config::default()
    };
    let mut rows = Vec::new();
    for i in 0..THEOREM1_MAPS {
        let f = random_loxodromic(&mut rng);
        let x = loop {
            let x = random_point(&mut rng);
            if f.in_attracting_basin(&x)? == Basin::Inside {
                break x;
            }
        };
        let r = theorem1_verdict(&f, &x, &cfg)?;
        rows.push(row(
            format!("loxodromic #{i} at basin point"),
            r.verdict == Verdict::Holds,
            format!("verdict {}", verdict_name(r.verdict)),
        ));
        let q = f.normal_form()?.repelling;
        let r = theorem1_verdict(&f, &q, &cfg)?;
        rows.push(row(
            format!("loxodromic #{i} at repelling point"),
            r.verdict == Verdict::OutOfScope,
            format!("verdict {}", verdict_name(r.verdict)),
        ));
    }
    for tag in [ClassTag::Elliptic, ClassTag::Parabolic] {
        let f = random_map_of_class(&mut rng, tag);
        let x = random_point(&mut rng);
        let r = theorem1_verdict(&f, &x, &cfg)?;
        rows.push(row(
            format!("{tag:?} map").to_lowercase(),
            r.verdict == Verdict::OutOfScope,
            format!("verdict {}", verdict_name(r.verdict)),
        ));
    }
    Ok(rows)
}

fn theorem2(seed: u64, workers: usize) -> Result<Vec<BatteryRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = SphereGrid::fibonacci(64, seed)?;
    let mut cfg = Theorem2Config::default();
    cfg.collapse.seed = seed;
    cfg.collapse.workers = workers;
    let mut cases: Vec<(String, SubgroupTag, _)> = canonical_generators()
        .into_iter()
        .map(|(tag, a)| (format!("canonical {tag:?}").to_lowercase(), tag, a))
        .collect();
    for tag in [
        SubgroupTag::Elliptic,
        SubgroupTag::Hyperbolic,
        SubgroupTag::Parabolic,
        SubgroupTag::Loxodromic,
    ] {
        for i in 0..THEOREM2_RANDOM {
            let a = random_generator_of_type(&mut rng, tag);
            cases.push((format!("random {tag:?} #{i}").to_lowercase(), tag, a));
        }
    }
    let mut rows = Vec::new();
    for (name, tag, a) in cases {
        let expected = if matches!(tag, SubgroupTag::Elliptic | SubgroupTag::Trivial) {
            Verdict::Holds
        } else {
            Verdict::Fails
        };
        match theorem2_verdict(&a, &k, &cfg) {
            Ok(r) => rows.push(row(
                name,
                r.verdict == expected,
                format!(
                    "verdict {}, expected {}",
                    verdict_name(r.verdict),
                    verdict_name(expected)
                ),
            )),
            Err(Error::BasisDisagreement(d)) => {
                rows.push(row(name, false, format!("bases disagree: {d}")))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}

fn metric_axioms(seed: u64) -> Vec<BatteryRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut triangle, mut symmetry, mut identity, mut bounded) = (0, 0, 0, 0);
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..TRIPLES {
        let (x, y, z) = (
            random_point(&mut rng),
            random_point(&mut rng),
            random_point(&mut rng),
        );
        let (xy, yz, xz) = (
            x.chordal_distance(&y),
            y.chordal_distance(&z),
            x.chordal_distance(&z),
        );
        let excess = xz - xy - yz;
        worst_excess = worst_excess.max(excess);
        triangle += usize::from(excess <= METRIC_SLACK);
        symmetry += usize::from((xy - y.chordal_distance(&x)).abs() <= METRIC_SLACK);
        identity += usize::from(x.chordal_distance(&x) <= METRIC_SLACK);
        bounded += usize::from((0.0..=1.0).contains(&xy));
    }
    vec![
        row(
            "triangle inequality",
            triangle == TRIPLES,
            format!("{triangle}/{TRIPLES} triples, worst excess {worst_excess:e}"),
        ),
        row(
            "symmetry",
            symmetry == TRIPLES,
            format!("{symmetry}/{TRIPLES}"),
        ),
        row(
            "d(x, x) = 0",
            identity == TRIPLES,
            format!("{identity}/{TRIPLES}"),
        ),
        row(
            "0 <= d <= 1",
            bounded == TRIPLES,
            format!("{bounded}/{TRIPLES}"),
        ),
    ]
}

/// Runs a named built-in suite and returns one row per check.
pub fn run_battery(suite: &str, seed: u64, workers: usize) -> Result<Vec<BatteryRow>> {
    match suite {
        "canonical-forms" => Ok(canonical_forms(seed)),
        "theorem1" => theorem1(seed, workers),
        "theorem2" => theorem2(seed, workers),
        "metric-axioms" => Ok(metric_axioms(seed)),
        other => Err(Error::malformed(
            "suite",
            format!("unknown suite `{other}`; known: {}", SUITES.join(", ")),
        )),
    }
}
