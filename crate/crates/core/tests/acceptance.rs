//! Acceptance checks. Prints one `PASS`/`FAIL` line per criterion, with the
//! measured values, and exits nonzero if any criterion fails.
//!
//! Every expected value here comes from an oracle written in this file
//! (brute-force grids, hand-listed order statistics, explicit matrix
//! products), never from the library's own helpers.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use modpso::benchmark::{make_problem, FunctionId, ProblemSpec};
use modpso::cluster::{
    adjusted_rand_index, agglomerate, distance_matrix, grid_search, silhouette, DistanceMatrix, Linkage, Metric,
};
use modpso::fanova::{
    cumulative_curve, decompose, decompose_table, exact_decompose, FactorTable, ForestParams,
};
use modpso::runner::{
    capped_log_error, enumerate_configs, execute, lower_median, run_cell, run_seed, DatasetMeta, DatasetRow,
    ExecuteOptions, ExperimentPlan, PerformanceDataset, SpaceDescription,
};
use modpso::swarm::config::{InertiaWeight, InformedPerturbation, RandomMatrixKind, RandomPerturbation};
use modpso::swarm::matrix::random_matrix;
use modpso::swarm::{run, step, ModuleConfiguration, SwarmState};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    limit: Duration,
    check: fn() -> Outcome,
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Random complete factorial table: `n` features with 1..=4 levels and
/// uniform values, guaranteed non-constant.
fn random_table(rng: &mut ChaCha8Rng, max_features: usize) -> FactorTable {
    loop {
        let n = rng.random_range(1..=max_features);
        let counts: Vec<usize> = (0..n).map(|_| rng.random_range(1..=4)).collect();
        if counts.iter().product::<usize>() < 2 {
            continue;
        }
        return FactorTable::full_factorial(&counts, |_| rng.random_range(-3.0..3.0)).unwrap();
    }
}

fn exact_completeness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_sum = 0.0f64;
    let mut min_term = f64::INFINITY;
    for _ in 0..50 {
        let t = random_table(&mut rng, 4);
        let ev = exact_decompose(&t, t.n_features()).map_err(|e| e.to_string())?;
        let sum: f64 = ev.importances().iter().sum();
        worst_sum = worst_sum.max((sum - 1.0).abs());
        min_term = min_term.min(ev.importances().iter().copied().fold(f64::INFINITY, f64::min));
    }
    ensure(worst_sum <= 1e-9, format!("max |sum - 1| = {worst_sum:e}"))?;
    ensure(min_term >= 0.0, format!("negative importance {min_term:e}"))?;
    Ok(format!("50 tables, max |sum - 1| = {worst_sum:.2e}, min term = {min_term:.2e}"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let t = random_table(&mut rng, 4);
        let n = t.n_features();
        let exact = exact_decompose(&t, n).map_err(|e| e.to_string())?;
        let (_, fitted) = decompose_table(&t, ForestParams::interpolating(), n).map_err(|e| e.to_string())?;
        for (a, b) in exact.terms.iter().zip(&fitted.terms) {
            ensure(a.subset == b.subset, "term order differs")?;
            worst = worst.max((a.importance - b.importance).abs());
        }
    }
    ensure(worst <= 1e-6, format!("max per-term gap {worst:e}"))?;
    Ok(format!("20 tables, max per-term gap = {worst:.2e}"))
}

fn pure_interaction() -> Outcome {
    let xor = FactorTable::full_factorial(&[2, 2], |x| (x[0] ^ x[1]) as f64).unwrap();
    let add = FactorTable::full_factorial(&[2, 2], |x| (x[0] + x[1]) as f64).unwrap();
    let mut lines = Vec::new();
    for (mode, decomp) in [
        ("exact", Box::new(|t: &FactorTable| exact_decompose(t, 2)) as Box<dyn Fn(&FactorTable) -> _>),
        ("forest", Box::new(|t: &FactorTable| decompose_table(t, ForestParams::interpolating(), 2).map(|r| r.1))),
    ] {
        let x = decomp(&xor).map_err(|e| e.to_string())?;
        let (a, b, ab) = (x.importance_of(&[0]).unwrap(), x.importance_of(&[1]).unwrap(), x.importance_of(&[0, 1]).unwrap());
        ensure((ab - 1.0).abs() <= 1e-9 && a.abs() <= 1e-9 && b.abs() <= 1e-9, format!("{mode} xor: {a} {b} {ab}"))?;
        let s = decomp(&add).map_err(|e| e.to_string())?;
        let (a2, b2, ab2) = (s.importance_of(&[0]).unwrap(), s.importance_of(&[1]).unwrap(), s.importance_of(&[0, 1]).unwrap());
        ensure(
            (a2 - 0.5).abs() <= 1e-9 && (b2 - 0.5).abs() <= 1e-9 && ab2.abs() <= 1e-9,
            format!("{mode} additive: {a2} {b2} {ab2}"),
        )?;
        lines.push(format!("{mode}: xor I_ab={ab:.12} additive I_a={a2:.12} I_b={b2:.12} I_ab={ab2:.1e}"));
    }
    Ok(lines.join("; "))
}

fn effect_vector_shape() -> Outcome {
    let configs = enumerate_configs(&SpaceDescription::full()).unwrap();
    // Canonical order oracle: mains, then i<j, then i<j<k.
    let mut expected: Vec<Vec<usize>> = (0..8).map(|i| vec![i]).collect();
    for i in 0..8 {
        for j in i + 1..8 {
            expected.push(vec![i, j]);
        }
    }
    for i in 0..8 {
        for j in i + 1..8 {
            for k in j + 1..8 {
                expected.push(vec![i, j, k]);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut residuals = Vec::new();
    for case in 0..3 {
        let noise: Vec<f64> = (0..configs.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rows = configs
            .iter()
            .zip(&noise)
            .map(|(c, e)| {
                let l = c.levels();
                let target = match case {
                    0 => *e,
                    1 => l[4] as f64 + 0.3 * (l[0] * l[5]) as f64 + 0.1 * e,
                    _ => ((l[1] + l[2] + l[6]) % 2) as f64 - 9.0 * (l[7] == 1) as usize as f64,
                };
                DatasetRow { config: *c, target }
            })
            .collect();
        let d = PerformanceDataset { meta: meta(FunctionId::F1, 10), rows };
        let (_, ev) = decompose(&d, ForestParams { seed: case, ..ForestParams::default() }, 3).map_err(|e| e.to_string())?;
        ensure(ev.terms.len() == 92, format!("{} terms", ev.terms.len()))?;
        let order: Vec<Vec<usize>> = ev.terms.iter().map(|t| t.subset.clone()).collect();
        ensure(order == expected, "terms not in canonical order")?;
        ensure((0.0..=1.0).contains(&ev.residual), format!("residual {}", ev.residual))?;
        let curve = cumulative_curve(&ev);
        ensure(curve.windows(2).all(|w| w[1].1 >= w[0].1), "curve decreases")?;
        let last = curve.last().unwrap().1;
        ensure((last - (1.0 - ev.residual)).abs() <= 1e-12, format!("curve ends at {last}, residual {}", ev.residual))?;
        residuals.push(format!("{:.4}", ev.residual));
    }
    Ok(format!("3 datasets x 92 terms, residuals [{}]", residuals.join(", ")))
}

fn meta(function: FunctionId, dimension: usize) -> DatasetMeta {
    DatasetMeta { function, dimension, runs_per_cell: 1, budget_multiplier: 1, master_seed: 0, transform_seed: 0 }
}

fn protocol_fidelity() -> Outcome {
    for (err, want) in [(1e-12, -9.0), (1e-9, -9.0), (0.0, -9.0), (100.0, 2.0), (1e-3, -3.0)] {
        let got = capped_log_error(err);
        ensure(got == want, format!("capped_log_error({err}) = {got}, expected {want}"))?;
    }
    // Hand-listed cell: sorted, these are 0.5 1 2 3 4 | 6 7 8 9 11, so the
    // lower median (5th order statistic) is 4.
    let cell = [7.0, 2.0, 11.0, 0.5, 4.0, 9.0, 1.0, 6.0, 3.0, 8.0];
    ensure(lower_median(&cell) == 4.0, format!("lower median {}", lower_median(&cell)))?;

    // A real 10-run cell against its individually recomputed runs.
    let problem = make_problem(&ProblemSpec::new(FunctionId::F9, 4, 5)).unwrap();
    let config = ModuleConfiguration::canonical();
    let mut errors: Vec<f64> = (0..10)
        .map(|r| run(&config, &problem, 400, run_seed(3, &config, FunctionId::F9, 4, r)).unwrap().final_error)
        .collect();
    errors.sort_by(f64::total_cmp);
    let median = run_cell(&config, &problem, 10, 400, 3).map_err(|e| e.to_string())?;
    ensure(median == errors[4], format!("cell median {median} vs 5th order statistic {}", errors[4]))?;

    let plan = ExperimentPlan::from_json(
        r#"{"space": {"dnpp": ["rect", "sph"], "mtx": ["id", "rot"], "iw": ["c0.75", "succ"], "p1": ["none"], "top": ["ring"]},
            "problems": ["f1", "f9"], "dimensions": [3], "runs_per_cell": 2, "budget_multiplier": 100, "master_seed": 99}"#,
    )
    .map_err(|e| e.to_string())?;
    let texts = |workers: usize| -> Result<Vec<String>, String> {
        let ds = execute(&plan, &ExecuteOptions { workers, ..Default::default() }).map_err(|e| e.to_string())?;
        Ok(ds.iter().map(PerformanceDataset::to_text).collect())
    };
    let one = texts(1)?;
    for w in [2, 3, 8] {
        ensure(texts(w)? == one, format!("datasets differ at {w} workers"))?;
    }
    let floor_ok = one.iter().all(|t| PerformanceDataset::parse(t).unwrap().targets().iter().all(|&v| v >= -9.0));
    ensure(floor_ok, "target below -9")?;
    Ok(format!("cap exact at -9, 10-run lower median = 5th order statistic, identical bytes at 1/2/3/8 workers ({} cells)", one.len() * 64))
}

fn swarm_sanity() -> Outcome {
    let problem = make_problem(&ProblemSpec::new(FunctionId::F1, 10, 1)).unwrap();
    let config = ModuleConfiguration::canonical();
    let errors: Vec<f64> = (0..10u64)
        .into_par_iter()
        .map(|s| run(&config, &problem, 50_000, 1000 + s).unwrap().final_error)
        .collect();
    let hits = errors.iter().filter(|&&e| e <= 1e-6).count();
    ensure(hits >= 8, format!("{hits}/10 seeds reached 1e-6: {errors:?}"))?;

    // Frozen swarm: all particles share one start point, so every informant
    // coincides with the particle, w1 = 0 and nothing perturbs it.
    let mut frozen_checked = 0;
    for dnpp in ["rect", "sph"] {
        for mtx in ["id", "diag", "rot", "igb"] {
            for top in ["ring", "full"] {
                for moi in ["bon", "fi"] {
                    let token = format!("dnpp={dnpp};ac=const;top={top};moi={moi};mtx={mtx};iw=c0.0;p1=none;p2=none");
                    let cfg: ModuleConfiguration = token.parse().map_err(|e: modpso::swarm::ConfigError| e.to_string())?;
                    assert_eq!(cfg.inertia, InertiaWeight::ConstantZero);
                    assert_eq!(cfg.informed_perturbation, InformedPerturbation::None);
                    assert_eq!(cfg.random_perturbation, RandomPerturbation::None);
                    let mut rng = ChaCha8Rng::seed_from_u64(frozen_checked);
                    let start: Vec<f64> = (0..10).map(|_| rng.random_range(-100.0..100.0)).collect();
                    let mut state = SwarmState::from_positions(&problem, vec![start; 20], 200, &mut rng).unwrap();
                    let initial = state.global_best_value;
                    for _ in 0..200 {
                        step(&mut state, &cfg, &problem, &mut rng).unwrap();
                        ensure(state.global_best_value >= initial, format!("{token} improved"))?;
                    }
                    frozen_checked += 1;
                }
            }
        }
    }
    Ok(format!("{hits}/10 seeds at error <= 1e-6 (max {:.2e}); {frozen_checked} frozen variants never improved over 200 iterations", errors.iter().copied().fold(0.0, f64::max)))
}

/// 160 configurations covering every (matrix, omega1) pair: with
/// dnpp = rect and moi = bon fixed, each of the 25 pairs gets 6 random
/// settings of the four binary modules, and 10 random pairs get a 7th.
fn desk_design(seed: u64) -> Vec<ModuleConfiguration> {
    let space: SpaceDescription = serde_json::from_str(r#"{"dnpp": ["rect"], "moi": ["bon"]}"#).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: BTreeMap<(usize, usize), Vec<ModuleConfiguration>> = BTreeMap::new();
    for c in enumerate_configs(&space).unwrap() {
        let l = c.levels();
        cells.entry((l[4], l[5])).or_default().push(c);
    }
    let mut keys: Vec<(usize, usize)> = cells.keys().copied().collect();
    keys.shuffle(&mut rng);
    let bonus = &keys[..10];
    let mut chosen = Vec::new();
    for (k, v) in cells.iter_mut() {
        v.shuffle(&mut rng);
        chosen.extend_from_slice(&v[..6 + usize::from(bonus.contains(k))]);
    }
    chosen.sort();
    chosen
}

fn scaled_importance() -> Outcome {
    let design = desk_design(1);
    ensure(design.len() == 160, format!("{} configurations", design.len()))?;
    let spans = |m: usize, k: usize| (0..k).all(|l| design.iter().any(|c| c.levels()[m] == l));
    ensure(spans(4, 5) && spans(5, 5), "design misses a matrix or omega1 level")?;

    let mut report = Vec::new();
    let mut verdict = Ok(());
    for f in [FunctionId::F9, FunctionId::F10] {
        let problem = make_problem(&ProblemSpec::new(f, 10, 1)).unwrap();
        let rows: Vec<DatasetRow> = design
            .par_iter()
            .map(|c| DatasetRow { config: *c, target: capped_log_error(run_cell(c, &problem, 5, 10_000, 2024).unwrap()) })
            .collect();
        let d = PerformanceDataset { meta: meta(f, 10), rows };
        let (_, ev) = decompose(&d, ForestParams::default(), 3).map_err(|e| e.to_string())?;
        let main = |m: &str| ev.main_effect(m).unwrap();
        let mut mains: Vec<(&str, f64)> =
            ["dnpp", "ac", "top", "moi", "mtx", "iw", "p1", "p2"].iter().map(|&m| (m, main(m))).collect();
        mains.sort_by(|a, b| b.1.total_cmp(&a.1));
        report.push(format!(
            "{f}: {}",
            mains.iter().map(|(m, v)| format!("{m}={v:.3}")).collect::<Vec<_>>().join(" ")
        ));
        let others = ["top", "ac", "p1", "p2"];
        if let Some(o) = others.iter().find(|&&o| main("mtx") <= main(o)) {
            verdict = verdict.and(Err(format!("{f}: mtx main effect does not exceed {o}")));
        }
        if f == FunctionId::F10 {
            let top2: Vec<&str> = mains[..2].iter().map(|(m, _)| *m).collect();
            if !(top2.contains(&"mtx") && top2.contains(&"iw")) {
                verdict = verdict.and(Err(format!("f10 top-2 main effects are {top2:?}, expected mtx and iw")));
            }
        }
    }
    match verdict {
        Ok(()) => Ok(report.join("; ")),
        Err(e) => Err(format!("{e}; {}", report.join("; "))),
    }
}

fn clustering_correctness() -> Outcome {
    // Hand oracle on four points with distances
    //   d01=1 d02=4 d03=5 d12=3 d13=6 d23=2, clusters {0,1} {2,3}:
    //   s0 = (4.5-1)/4.5, s1 = (4.5-1)/4.5, s2 = (3.5-2)/3.5, s3 = (5.5-2)/5.5.
    let rows = vec![
        vec![0.0, 1.0, 4.0, 5.0],
        vec![1.0, 0.0, 3.0, 6.0],
        vec![4.0, 3.0, 0.0, 2.0],
        vec![5.0, 6.0, 2.0, 0.0],
    ];
    let d = DistanceMatrix::from_square(Metric::Euclidean, &rows).unwrap();
    let want = (3.5 / 4.5 + 3.5 / 4.5 + 1.5 / 3.5 + 3.5 / 5.5) / 4.0;
    let got = silhouette(&[0, 0, 1, 1], &d).map_err(|e| e.to_string())?;
    ensure((got - want).abs() <= 1e-12, format!("silhouette {got} vs hand {want}"))?;

    // Planted clusters: three orthogonal-ish profiles plus small jitter.
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut vectors = Vec::new();
    let mut truth = Vec::new();
    for i in 0..24 {
        let g = i % 3;
        let v: Vec<f64> = (0..92)
            .map(|t| if t % 3 == g { 0.03 } else { 0.002 } * (1.0 + rng.random_range(-0.05..0.05)))
            .collect();
        vectors.push(v);
        truth.push(g);
    }
    let cos = distance_matrix(&vectors, Metric::Cosine).unwrap();
    let (mut within, mut between) = (0.0f64, f64::INFINITY);
    for i in 0..24 {
        for j in i + 1..24 {
            if truth[i] == truth[j] {
                within = within.max(cos.get(i, j));
            } else {
                between = between.min(cos.get(i, j));
            }
        }
    }
    ensure(between >= 10.0 * within, format!("planted separation {between} < 10 x {within}"))?;
    let names: Vec<String> = (0..24).map(|i| format!("p{i}")).collect();
    let report = grid_search(&names, &vectors, 2..=23, &Metric::ALL, &Linkage::ALL).map_err(|e| e.to_string())?;
    ensure(report.k == 3, format!("grid search chose k = {}", report.k))?;
    let ari = adjusted_rand_index(&report.cluster_ids(), &truth);
    ensure(ari == 1.0, format!("ARI {ari}"))?;
    let cut = agglomerate(&cos, Linkage::Complete).unwrap().cut_k(3).unwrap();
    ensure(adjusted_rand_index(&cut, &truth) == 1.0, "cosine/complete cut at k = 3 misses the planted partition")?;

    // Bounds on arbitrary inputs, including every grid cell above.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in report.grid.iter().filter_map(|e| e.silhouette) {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    for _ in 0..500 {
        let n = rng.random_range(3..12);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let dm = distance_matrix(&pts, Metric::Euclidean).unwrap();
        let k = rng.random_range(2..=n);
        let mut labels: Vec<usize> = (0..n).map(|i| i % k).collect();
        labels.shuffle(&mut rng);
        let s = silhouette(&labels, &dm).unwrap();
        lo = lo.min(s);
        hi = hi.max(s);
    }
    ensure((-1.0..=1.0).contains(&lo) && (-1.0..=1.0).contains(&hi), format!("silhouette range [{lo}, {hi}]"))?;
    Ok(format!(
        "hand silhouette {got:.15}; planted k=3 ({} {}), ARI = {ari}, score {:.3}; silhouettes in [{lo:.3}, {hi:.3}]",
        report.metric, report.linkage, report.silhouette
    ))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let kind = if i % 2 == 0 { RandomMatrixKind::EuclideanRotation } else { RandomMatrixKind::IncreasingGroupBased };
        let dim = rng.random_range(2..=30);
        let t_max = 500;
        let t = rng.random_range(0..=t_max);
        let op = random_matrix(kind, &mut rng, dim, t, t_max);
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        worst = worst.max((norm(&op.apply(&v)) - norm(&v)).abs());
    }
    ensure(worst <= 1e-9, format!("norm drift {worst:e}"))?;

    let rotated = [FunctionId::F3, FunctionId::F7, FunctionId::F8, FunctionId::F10, FunctionId::F11, FunctionId::F14];
    let mut defect = 0.0f64;
    for i in 0..100u64 {
        let f = rotated[i as usize % rotated.len()];
        let dim = [2, 5, 10, 30][i as usize % 4];
        let p = make_problem(&ProblemSpec::new(f, dim, 1000 + i)).map_err(|e| e.to_string())?;
        let r = p.rotation();
        ensure((0..dim).any(|a| r.get(a, a) != 1.0), format!("{f} has no rotation"))?;
        for a in 0..dim {
            for b in 0..dim {
                let dot: f64 = (0..dim).map(|k| r.get(k, a) * r.get(k, b)).sum();
                defect = defect.max((dot - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    ensure(defect <= 1e-10, format!("max |R^T R - I| = {defect:e}"))?;
    Ok(format!("1000 operators, max norm drift {worst:.2e}; 100 rotations, max |R^T R - I| = {defect:.2e}"))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "exact decomposition completeness", limit: Duration::from_secs(10), check: exact_completeness },
        Criterion { name: "forest and exact oracle equivalence", limit: Duration::from_secs(30), check: oracle_equivalence },
        Criterion { name: "pure interaction and additive tables", limit: Duration::from_secs(10), check: pure_interaction },
        Criterion { name: "effect vector shape and cumulative curve", limit: Duration::from_secs(60), check: effect_vector_shape },
        Criterion { name: "protocol fidelity", limit: Duration::from_secs(60), check: protocol_fidelity },
        Criterion { name: "swarm sanity", limit: Duration::from_secs(120), check: swarm_sanity },
        Criterion { name: "scaled importance reproduction", limit: Duration::from_secs(1800), check: scaled_importance },
        Criterion { name: "clustering correctness", limit: Duration::from_secs(10), check: clustering_correctness },
        Criterion { name: "geometry invariants", limit: Duration::from_secs(10), check: geometry },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => Err(format!("took {elapsed:.1?}, limit {:?}; {detail}", c.limit)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {} [{elapsed:.1?}]: {detail}", c.name),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} [{elapsed:.1?}]: {detail}", c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
