//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints its own PASS/FAIL line; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use conformal_c2st::classifier::{
    init_network, Mlp, MlpScore, MlpShape, NoisyScore, OracleScore, TrainConfig,
};
use conformal_c2st::conformal::{
    conformal_pvalue, expected_pvalue_diagnostics, multiple_test_sampled, paired_pvalue_shift,
    uniform_pvalues,
};
use conformal_c2st::harness::{
    default_degradation_gamma, pool_seeds, run_experiment, DegradationMode, ExperimentSpec, Method,
    PooledRow, Profile, DEFAULT_GAMMA_GRID, DEFAULT_GAMMA_POWER,
};
use conformal_c2st::numerics::{ks_pvalue, ks_statistic, std_normal_cdf, Matrix, RngStream};
use conformal_c2st::tasks::{GaussianTask, PerturbationKind, ShiftTask1d, TaskKind, TaskPair};
use num_rational::Ratio;
use rand::Rng;

type Check = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Check);

fn cov(gamma: f64) -> GaussianTask<f64> {
    GaussianTask::new(PerturbationKind::CovScaling, gamma).unwrap()
}

fn rate(rows: &[PooledRow], label: &str, beta: f64) -> (f64, f64) {
    let r = rows
        .iter()
        .find(|r| r.label == label && r.beta == beta)
        .unwrap_or_else(|| panic!("no pooled row for {label} at {beta}"));
    (r.rejection_rate, r.se)
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn fast_spec() -> ExperimentSpec {
    ExperimentSpec::with_profile(Profile::Fast)
}

/// Null rejection rates of every method over 2000 trials.
fn null_calibration() -> Check {
    let spec = ExperimentSpec {
        methods: vec![
            Method::ConformalUniform(1),
            Method::ConformalUniform(20),
            Method::ConformalMultiple,
            Method::C2st,
            Method::Sbc,
            Method::Tarp,
        ],
        trials: 1000,
        seeds: vec![0, 1],
        ..fast_spec()
    };
    let pooled = pool_seeds(&run_experiment::<f64>(&spec).map_err(err)?);
    let mut ok = true;
    let mut parts = Vec::new();
    for r in &pooled {
        let inside = (0.035..=0.065).contains(&r.rejection_rate);
        ok &= inside && r.trials == 2000;
        parts.push(format!(
            "{}={:.4}{}",
            r.label,
            r.rejection_rate,
            if inside { "" } else { "!" }
        ));
    }
    Ok((ok && pooled.len() == 6, parts.join(" ")))
}

/// Uniformity of 10⁵ p-values from a random network under p = q.
fn pvalue_law() -> Check {
    let task = cov(0.0);
    let model = init_network(
        task.theta_dim() + task.y_dim(),
        &TrainConfig::fast().with_seed(17),
    )
    .map_err(err)?;
    let score = MlpScore::new(model);
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [1, 5, 20] {
        let batch =
            uniform_pvalues(&score, &task, m, 100_000, RngStream::new(2, m as u64)).map_err(err)?;
        let d = ks_statistic(&batch.values).map_err(err)?;
        ok &= d < 0.006;
        parts.push(format!("m={m} D={d:.5}"));
    }
    Ok((ok, parts.join(" ")))
}

/// Mean p-value against the closed-form AUC of a 1-d location shift.
fn mean_pvalue_oracle() -> Check {
    let task = ShiftTask1d::new(0.5).map_err(err)?;
    let score = OracleScore::new(task).map_err(err)?;
    let batch = uniform_pvalues(&score, &task, 200, 100_000, RngStream::new(3, 0)).map_err(err)?;
    let mean = batch.mean();
    let target = 1.0 - std_normal_cdf(0.5 / 2f64.sqrt());
    Ok((
        (mean - target).abs() < 0.01,
        format!("mean U = {mean:.5}, 1 − AUC = {target:.5}"),
    ))
}

/// The AUC and ratio-spread estimators of E[U] agree.
fn estimator_consistency() -> Check {
    let d =
        expected_pvalue_diagnostics(&cov(0.5), 200, 100_000, RngStream::new(4, 0)).map_err(err)?;
    let (a, b) = (d.one_minus_auc, d.ratio_spread);
    let se = (a.se * a.se + b.se * b.se).sqrt();
    let gap = (a.value - b.value).abs();
    Ok((
        gap <= 2.0 * se,
        format!(
            "1 − AUC = {:.5} ± {:.5}, ratio form = {:.5} ± {:.5}, |Δ| = {gap:.5} (2 SE = {:.5}); mean U = {:.5}",
            a.value,
            a.se,
            b.value,
            b.se,
            2.0 * se,
            d.mean_u.value
        ),
    ))
}

/// Rotation and shift sweeps on the toy problem.
fn toy_reproduction() -> Check {
    let conformal = Method::ConformalUniform(10);
    let conformal_label = format!("{}({})", conformal.tag(), 10);
    let base = ExperimentSpec {
        task: TaskKind::Toy,
        methods: vec![conformal, Method::C2st],
        n_q: 100,
        trials: 500,
        seeds: vec![0],
        ..fast_spec()
    };
    let rot = ExperimentSpec {
        mode: DegradationMode::ToyRotate,
        betas: vec![0.0, PI / 8.0, PI / 4.0, 3.0 * PI / 8.0, PI / 2.0],
        ..base.clone()
    };
    let rows = pool_seeds(&run_experiment::<f64>(&rot).map_err(err)?);
    let rot_power: Vec<f64> = rot
        .betas
        .iter()
        .map(|&b| rate(&rows, &conformal_label, b).0)
        .collect();
    let monotone = rot_power.windows(2).all(|w| w[1] <= w[0]);
    let orthogonal = (rot_power[4] - 0.05).abs() <= 0.02;

    let shifts: Vec<f64> = (-4..=4).map(|k| k as f64 * 0.25).collect();
    let sh = ExperimentSpec {
        mode: DegradationMode::ToyShift,
        betas: shifts.clone(),
        ..base
    };
    let rows = pool_seeds(&run_experiment::<f64>(&sh).map_err(err)?);
    let at =
        |label: &str| -> Vec<f64> { shifts.iter().map(|&c| rate(&rows, label, c).0).collect() };
    let (conf, c2st) = (at(&conformal_label), at("c2st"));
    let centre = shifts.iter().position(|&c| c == 0.0).unwrap();
    let stable = conf.iter().all(|p| (p - conf[centre]).abs() <= 0.05);
    let c2st_drop = c2st
        .iter()
        .map(|p| c2st[centre] - p)
        .fold(f64::MIN, f64::max);
    let ok = monotone && orthogonal && stable && c2st_drop > 0.3;
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|p| format!("{p:.3}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    Ok((
        ok,
        format!(
            "rotation conformal [{}]; shift conformal [{}] c2st [{}] (max drop {c2st_drop:.3})",
            fmt(&rot_power),
            fmt(&conf),
            fmt(&c2st)
        ),
    ))
}

/// Degradation sweep at the default γ.
fn degradation_ordering() -> Check {
    let base = fast_spec();
    let choice = default_degradation_gamma::<f64>(&base, &DEFAULT_GAMMA_GRID, DEFAULT_GAMMA_POWER)
        .map_err(err)?;
    let betas = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    let classifier_methods = vec![
        Method::ConformalUniform(1),
        Method::ConformalUniform(20),
        Method::ConformalUniform(50),
        Method::ConformalMultiple,
        Method::C2st,
    ];
    let spec = ExperimentSpec {
        gammas: vec![choice.gamma],
        betas: betas.clone(),
        methods: classifier_methods,
        ..base
    };
    let rows = pool_seeds(&run_experiment::<f64>(&spec).map_err(err)?);
    let mut ok = choice.target_met;
    let mut parts = vec![format!(
        "γ={} (U(200) power {:.3})",
        choice.gamma, choice.power
    )];
    for &b in &betas[1..] {
        let (u, su) = rate(&rows, "conformal_uniform(50)", b);
        let (c, sc) = rate(&rows, "c2st", b);
        let holds = u + 2.0 * (su * su + sc * sc).sqrt() >= c;
        ok &= holds;
        parts.push(format!(
            "β={b}: U(50)={u:.3} c2st={c:.3}{}",
            if holds { "" } else { "!" }
        ));
    }
    let mut at_one = Vec::new();
    for r in rows.iter().filter(|r| r.beta == 1.0) {
        let inside = (0.02..=0.08).contains(&r.rejection_rate);
        ok &= inside;
        at_one.push(format!(
            "{}={:.3}{}",
            r.label,
            r.rejection_rate,
            if inside { "" } else { "!" }
        ));
    }
    parts.push(format!("β=1: {}", at_one.join(" ")));
    Ok((ok, parts.join("; ")))
}

/// Power grows with the calibration size.
fn m_monotonicity() -> Check {
    let spec = ExperimentSpec {
        gammas: vec![0.5],
        methods: vec![
            Method::ConformalUniform(1),
            Method::ConformalUniform(10),
            Method::ConformalUniform(200),
        ],
        ..fast_spec()
    };
    let rows = pool_seeds(&run_experiment::<f64>(&spec).map_err(err)?);
    let p: Vec<(f64, f64)> = [1, 10, 200]
        .iter()
        .map(|m| rate(&rows, &format!("conformal_uniform({m})"), 0.0))
        .collect();
    let le = |a: (f64, f64), b: (f64, f64)| a.0 <= b.0 + 2.0 * (a.1 * a.1 + b.1 * b.1).sqrt();
    Ok((
        le(p[0], p[1]) && le(p[1], p[2]),
        format!(
            "power m=1 {:.3}, m=10 {:.3}, m=200 {:.3}",
            p[0].0, p[1].0, p[2].0
        ),
    ))
}

/// Null law of the multiple-test statistic.
fn multiple_null_law() -> Check {
    let task = cov(0.0);
    let model = init_network(
        task.theta_dim() + task.y_dim(),
        &TrainConfig::fast().with_seed(23),
    )
    .map_err(err)?;
    let score = MlpScore::new(model);
    let root = RngStream::new(8, 0);
    let mut t = Vec::with_capacity(2000);
    for trial in 0..2000 {
        let (_, out) = multiple_test_sampled(&score, &task, 1000, 1000, 0.05, root.child(trial))
            .map_err(err)?;
        t.push(out.statistic);
    }
    let n = t.len() as f64;
    let mean = t.iter().sum::<f64>() / n;
    let var = t.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let u: Vec<f64> = t.iter().map(|&x| std_normal_cdf(x)).collect();
    let d = ks_statistic(&u).map_err(err)?;
    let p = ks_pvalue(d, u.len());
    Ok((
        mean.abs() <= 0.07 && (0.85..=1.15).contains(&var) && p > 0.01,
        format!("mean {mean:.4}, var {var:.4}, KS p {p:.3}"),
    ))
}

/// Robustness of the mean p-value to score noise.
fn noise_robustness() -> Check {
    let task = cov(0.5);
    let oracle = OracleScore::new(task.clone()).map_err(err)?;
    let noise_stream = RngStream::new(9, 1);
    let mut gaps = Vec::new();
    for eps in [0.05, 0.1, 0.2, 0.4] {
        let noisy = NoisyScore::new(&oracle, eps, noise_stream).map_err(err)?;
        let shift = paired_pvalue_shift(&oracle, &noisy, &task, 50, 40_000, RngStream::new(9, 2))
            .map_err(err)?;
        gaps.push(shift);
    }
    let monotone = gaps.windows(2).all(|w| w[1].value >= w[0].value);
    let spec = ExperimentSpec {
        gammas: vec![0.5],
        mode: DegradationMode::ScoreNoise,
        betas: vec![0.4],
        methods: vec![Method::ConformalUniform(50)],
        seeds: vec![0],
        ..fast_spec()
    };
    let power = run_experiment::<f64>(&spec).map_err(err)?[0].rejection_rate;
    let gap_text: Vec<String> = gaps
        .iter()
        .map(|g| format!("{:.5}±{:.5}", g.value, g.se))
        .collect();
    Ok((
        monotone && power > 2.0 * spec.alpha,
        format!(
            "E[Û]−E[U] at ε=0.05,0.1,0.2,0.4: {}; U(50) power at ε=0.4: {power:.3}",
            gap_text.join(", ")
        ),
    ))
}

type Q = Ratio<i64>;

/// All orderings of `v` that sort it, as index permutations.
fn sorting_permutations(v: &[Q]) -> Vec<Vec<usize>> {
    fn go(v: &[Q], used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == v.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..v.len() {
            if used[i] || cur.last().is_some_and(|&j| v[j] > v[i]) {
                continue;
            }
            used[i] = true;
            cur.push(i);
            go(v, used, cur, out);
            cur.pop();
            used[i] = false;
        }
    }
    let mut out = Vec::new();
    go(v, &mut vec![false; v.len()], &mut Vec::new(), &mut out);
    out
}

/// Cholesky, gradient, p-value enumeration and KS brute force.
fn unit_oracles() -> Check {
    let mut rng = RngStream::new(10, 0).rng();
    let mut notes = Vec::new();

    let mut chol_err: f64 = 0.0;
    for n in 1..=8 {
        let b = Matrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let a = b
            .matmul(&b.transpose())
            .map_err(err)?
            .add(&Matrix::identity(n).scale(0.1))
            .map_err(err)?;
        let l = a.cholesky().map_err(err)?;
        chol_err = chol_err.max(
            l.matmul(&l.transpose())
                .map_err(err)?
                .max_abs_diff(&a)
                .map_err(err)?,
        );
    }
    notes.push(format!("cholesky {chol_err:.1e}"));

    let mut grad_err: f64 = 0.0;
    for seed in 0..20 {
        let net = Mlp::<f64>::init_uniform(MlpShape::new(3, 4), &mut RngStream::new(seed, 5).rng())
            .map_err(err)?;
        let xs: Vec<Vec<f64>> = (0..16)
            .map(|_| (0..3).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect())
            .collect();
        let batch: Vec<(&[f64], f64)> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| (x.as_slice(), (i % 2) as f64))
            .collect();
        let (_, grad) = net.loss_and_grad(&batch).map_err(err)?;
        let h = 1e-5;
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, g) in grad.iter().enumerate() {
            let mut plus = net.clone();
            plus.params_mut()[k] += h;
            let mut minus = net.clone();
            minus.params_mut()[k] -= h;
            let fd =
                (plus.loss(&batch).map_err(err)? - minus.loss(&batch).map_err(err)?) / (2.0 * h);
            num += (g - fd) * (g - fd);
            den += fd * fd;
        }
        grad_err = grad_err.max((num / den.max(1e-300)).sqrt());
    }
    notes.push(format!("gradient {grad_err:.1e}"));

    let mut enum_ok = true;
    let mut cases = 0;
    for m in 1..=6usize {
        for code in 0..3usize.pow(m as u32) {
            let cal: Vec<Q> = (0..m)
                .map(|i| Q::from(((code / 3usize.pow(i as u32)) % 3) as i64))
                .collect();
            for t in 0..3 {
                let test = Q::from(t);
                let mut all = cal.clone();
                all.push(test);
                let pos: Vec<i64> = sorting_permutations(&all)
                    .iter()
                    .map(|p| p.iter().position(|&i| i == m).unwrap() as i64)
                    .collect();
                let (lo, hi) = (*pos.iter().min().unwrap(), *pos.iter().max().unwrap());
                for xi in [Q::new(0, 1), Q::new(1, 3), Q::new(1, 2), Q::new(1, 1)] {
                    let want = ((Q::from(1) - xi) * Q::from(lo) + xi * Q::from(hi + 1))
                        / Q::from(m as i64 + 1);
                    enum_ok &= conformal_pvalue(&cal, &test, xi).map_err(err)? == want;
                    cases += 1;
                }
            }
        }
    }
    notes.push(format!(
        "enumeration {cases} cases {}",
        if enum_ok { "exact" } else { "MISMATCH" }
    ));

    let mut ks_err: f64 = 0.0;
    for n in [1, 2, 7, 50, 300] {
        let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let d = ks_statistic(&v).map_err(err)?;
        // sup |F_n(x) − x| is attained at a sample point or its left limit
        let mut brute: f64 = 0.0;
        for &x in &v {
            let le = v.iter().filter(|&&y| y <= x).count() as f64 / n as f64;
            let lt = v.iter().filter(|&&y| y < x).count() as f64 / n as f64;
            brute = brute.max((le - x).abs()).max((x - lt).abs());
        }
        for k in 0..=10_000 {
            let x = k as f64 / 10_000.0;
            let le = v.iter().filter(|&&y| y <= x).count() as f64 / n as f64;
            if (le - x).abs() > brute + 1e-12 {
                return Ok((
                    false,
                    format!("grid point {x} exceeds candidate sup for n={n}"),
                ));
            }
        }
        ks_err = ks_err.max((d - brute).abs());
    }
    notes.push(format!("ks {ks_err:.1e}"));

    Ok((
        chol_err < 1e-8 && grad_err < 1e-4 && enum_ok && ks_err < 1e-9,
        notes.join(", "),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("null calibration of all methods", null_calibration),
        ("finite-sample p-value law", pvalue_law),
        ("mean p-value equals 1 − AUC", mean_pvalue_oracle),
        (
            "AUC and ratio-spread estimators agree",
            estimator_consistency,
        ),
        ("toy rotation and shift", toy_reproduction),
        ("degradation ordering", degradation_ordering),
        ("power grows with m", m_monotonicity),
        ("multiple-test null law", multiple_null_law),
        ("robustness to score noise", noise_robustness),
        ("unit oracles", unit_oracles),
    ];
    // `cargo test <filter>` passes the filter through; honour it loosely
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("criterion {:>2}", i + 1);
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|p| id.contains(p.as_str()) || name.contains(p.as_str()))
        {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!pass);
        println!(
            "{id} {} [{name}] ({:.1}s): {detail}",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
