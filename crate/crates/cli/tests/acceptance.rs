//! Acceptance suite. Each test covers one numbered criterion and prints a
//! `[PASS] criterion N` line with the measured quantities; run with
//! `cargo test -p copboost-cli --test acceptance -- --nocapture` to see them.

use copboost::baselearners::{BaseLearnerDef, PSplineConfig};
use copboost::boosting::{fit, tune_mstop, BoostConfig, FittedModel, LearnerPlan, OffsetMode};
use copboost::copulas::{CopulaFamily, CopulaSpec, HWrt, Rotation};
use copboost::data::{Dataset, Partition};
use copboost::likelihood::{ModelSpec, PairKind};
use copboost::link::Link;
use copboost::margins::{MarginFamily, MarginSpec};
use copboost::scoring::{energy_score, log_score, sample_kendall_tau};
use copboost::simulate::{simulate, DgpSpec, Preset};
use copboost_cli::modelfile::{ModelFile, MODEL_FORMAT_VERSION};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const FAMILIES: [CopulaFamily; 7] = [
    CopulaFamily::Gauss,
    CopulaFamily::Clayton,
    CopulaFamily::Gumbel,
    CopulaFamily::Frank,
    CopulaFamily::Fgm,
    CopulaFamily::Joe,
    CopulaFamily::Amh,
];

const ROTATIONS: [Rotation; 4] = [Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270];

/// theta in the base (unrotated) range of the family
fn random_base_theta(fam: CopulaFamily, rng: &mut ChaCha8Rng) -> f64 {
    match fam {
        CopulaFamily::Gauss | CopulaFamily::Amh | CopulaFamily::Fgm => rng.random_range(-0.9..0.9),
        CopulaFamily::Clayton => rng.random_range(0.15..6.0),
        CopulaFamily::Gumbel | CopulaFamily::Joe => rng.random_range(1.05..6.0),
        CopulaFamily::Frank => {
            let t: f64 = rng.random_range(-9.0..9.0);
            if t.abs() < 0.05 {
                0.5
            } else {
                t
            }
        }
        CopulaFamily::Independence => 0.0,
    }
}

/// user-facing theta for a rotated spec
fn user_theta(spec: &CopulaSpec, base: f64) -> f64 {
    let flips = matches!(spec.rotation, Rotation::R90 | Rotation::R270)
        && matches!(
            spec.family,
            CopulaFamily::Clayton | CopulaFamily::Gumbel | CopulaFamily::Joe
        );
    if flips {
        -base
    } else {
        base
    }
}

fn spec_binary(copula: CopulaSpec) -> ModelSpec {
    ModelSpec::new(
        PairKind::BinaryBinary,
        MarginSpec::new(MarginFamily::Bernoulli, vec![Link::Probit]).unwrap(),
        MarginSpec::new(MarginFamily::Bernoulli, vec![Link::Cloglog]).unwrap(),
        copula,
    )
    .unwrap()
}

fn spec_count(copula: CopulaSpec) -> ModelSpec {
    ModelSpec::new(
        PairKind::CountCount,
        MarginSpec::with_default_links(MarginFamily::Zalg),
        MarginSpec::with_default_links(MarginFamily::Zinbi),
        copula,
    )
    .unwrap()
}

fn spec_mixed(copula: CopulaSpec) -> ModelSpec {
    ModelSpec::new(
        PairKind::BinaryContinuous,
        MarginSpec::new(MarginFamily::Bernoulli, vec![Link::Probit]).unwrap(),
        MarginSpec::with_default_links(MarginFamily::Gaussian),
        copula,
    )
    .unwrap()
}

/// eta for the copula predictor that lands the user theta inside the
/// rotated range
fn random_eta_vec(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(-1.2..1.2)).collect()
}

/// one observation drawn from the model at the given predictors
fn draw_pair(spec: &ModelSpec, eta: &[f64], rng: &mut ChaCha8Rng) -> (f64, f64) {
    let theta = spec.theta_from_eta(eta);
    let (k1, k2) = (spec.k1(), spec.k2());
    let u: f64 = rng.random_range(1e-9..1.0 - 1e-9);
    let w: f64 = rng.random_range(1e-9..1.0 - 1e-9);
    let v = spec.copula.inverse_hfun(w, u, theta[k1 + k2]).unwrap();
    (
        spec.margin1.family.quantile(u, &theta[..k1]).unwrap(),
        spec.margin2.family.quantile(v, &theta[k1..k1 + k2]).unwrap(),
    )
}

#[test]
fn criterion_01_gradient_oracle_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0usize;
    for fam in FAMILIES {
        for rot in ROTATIONS {
            let cop = CopulaSpec::new(fam, rot);
            for spec in [spec_binary(cop), spec_count(cop), spec_mixed(cop)] {
                for _ in 0..200 {
                    let eta = random_eta_vec(spec.k_total(), &mut rng);
                    let (y1, y2) = draw_pair(&spec, &eta, &mut rng);
                    let grad = spec.nll_gradient(y1, y2, &eta).unwrap();
                    for k in 0..spec.k_total() {
                        // step chosen so the oracle's own f64 noise stays
                        // well below the 1e-8 near-zero bound
                        let h = 1e-4;
                        let mut up = eta.clone();
                        up[k] += h;
                        let mut dn = eta.clone();
                        dn[k] -= h;
                        let fd = (spec.joint_nll(y1, y2, &up).unwrap()
                            - spec.joint_nll(y1, y2, &dn).unwrap())
                            / (2.0 * h);
                        let err = (grad[k] - fd).abs();
                        assert!(
                            err <= (1e-4 * fd.abs()).max(1e-8),
                            "{} {} k={k} y=({y1},{y2}): grad {} vs fd {fd}",
                            spec.pair_kind.name(),
                            spec.copula.label(),
                            grad[k]
                        );
                        checked += 1;
                    }
                }
            }
        }
    }
    println!("[PASS] criterion 1: gradient oracle suite ({checked} components, rel err < 1e-4)");
}

#[test]
fn criterion_02_copula_property_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    // boundary conditions to 1e-12
    for fam in FAMILIES {
        for rot in ROTATIONS {
            let spec = CopulaSpec::new(fam, rot);
            for _ in 0..100 {
                let t = user_theta(&spec, random_base_theta(fam, &mut rng));
                let (u, v): (f64, f64) = (rng.random(), rng.random());
                assert!((spec.cdf(u, 1.0, t).unwrap() - u).abs() < 1e-12);
                assert!((spec.cdf(1.0, v, t).unwrap() - v).abs() < 1e-12);
                assert_eq!(spec.cdf(u, 0.0, t).unwrap(), 0.0);
                assert_eq!(spec.cdf(0.0, v, t).unwrap(), 0.0);
            }
        }
    }
    // 2-increasing: 1e4 random rectangles per family
    for fam in FAMILIES {
        for i in 0..10_000 {
            let rot = ROTATIONS[i % 4];
            let spec = CopulaSpec::new(fam, rot);
            let t = user_theta(&spec, random_base_theta(fam, &mut rng));
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            let (c, d): (f64, f64) = (rng.random(), rng.random());
            let (u1, u2) = (a.min(b), a.max(b));
            let (v1, v2) = (c.min(d), c.max(d));
            let mass = spec.cdf(u2, v2, t).unwrap() - spec.cdf(u1, v2, t).unwrap()
                - spec.cdf(u2, v1, t).unwrap()
                + spec.cdf(u1, v1, t).unwrap();
            assert!(mass >= -1e-12, "{} theta={t}: mass {mass}", spec.label());
        }
    }
    // h-functions against central differences of the CDF
    for fam in FAMILIES {
        for rot in ROTATIONS {
            let spec = CopulaSpec::new(fam, rot);
            for _ in 0..100 {
                let t = user_theta(&spec, random_base_theta(fam, &mut rng));
                let u: f64 = rng.random_range(0.05..0.95);
                let v: f64 = rng.random_range(0.05..0.95);
                for wrt in [HWrt::First, HWrt::Second] {
                    let h = spec.hfun(u, v, t, wrt).unwrap();
                    let fd = match wrt {
                        HWrt::First => {
                            (spec.cdf(u + 1e-6, v, t).unwrap() - spec.cdf(u - 1e-6, v, t).unwrap())
                                / 2e-6
                        }
                        HWrt::Second => {
                            (spec.cdf(u, v + 1e-6, t).unwrap() - spec.cdf(u, v - 1e-6, t).unwrap())
                                / 2e-6
                        }
                    };
                    assert!(
                        (h - fd).abs() <= 1e-5 * fd.abs().max(1e-3),
                        "{} {wrt:?}: h {h} vs fd {fd}",
                        spec.label()
                    );
                }
            }
        }
    }
    println!("[PASS] criterion 2: copula boundary/2-increasing/h-function properties");
}

#[test]
fn criterion_03_kendall_tau_suite() {
    // exact closed form at the documented point
    let gauss = CopulaSpec::new(CopulaFamily::Gauss, Rotation::R0);
    assert!((gauss.kendall_tau(0.5).unwrap() - 1.0 / 3.0).abs() < 1e-12);

    let thetas = |fam: CopulaFamily| -> Vec<f64> {
        match fam {
            CopulaFamily::Gauss => vec![-0.8, 0.3, 0.9],
            CopulaFamily::Amh => vec![-0.7, 0.3, 0.9],
            CopulaFamily::Fgm => vec![-0.9, 0.2, 0.8],
            CopulaFamily::Clayton => vec![0.5, 2.0, 8.0],
            CopulaFamily::Gumbel => vec![1.2, 2.0, 6.0],
            CopulaFamily::Joe => vec![1.3, 2.0, 6.0],
            CopulaFamily::Frank => vec![-8.0, 2.0, 10.0],
            CopulaFamily::Independence => vec![0.0],
        }
    };
    let n = 200_000;
    for fam in FAMILIES {
        let spec = CopulaSpec::new(fam, Rotation::R0);
        for (i, &theta) in thetas(fam).iter().enumerate() {
            let pairs = spec.sample(theta, n, 7 + i as u64).unwrap();
            let us: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let vs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let mc = sample_kendall_tau(&us, &vs);
            let closed = spec.kendall_tau(theta).unwrap();
            assert!(
                (mc - closed).abs() < 0.015,
                "{} theta={theta}: closed {closed} vs mc {mc}",
                spec.label()
            );
        }
    }
    println!("[PASS] criterion 3: Kendall tau closed forms vs Monte-Carlo concordance (|d| < 0.015)");
}

#[test]
fn criterion_04_independence_factorization() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for fam in [CopulaFamily::Gauss, CopulaFamily::Fgm] {
        let cop = CopulaSpec::new(fam, Rotation::R0);
        for spec in [spec_binary(cop), spec_count(cop), spec_mixed(cop)] {
            for _ in 0..100 {
                let mut eta = random_eta_vec(spec.k_total(), &mut rng);
                *eta.last_mut().unwrap() = 0.0; // independence point
                let (y1, y2) = draw_pair(&spec, &eta, &mut rng);
                let joint = spec.joint_nll(y1, y2, &eta).unwrap();
                let theta = spec.theta_from_eta(&eta);
                let (k1, k2) = (spec.k1(), spec.k2());
                let marg = -spec.margin1.family.pdf(y1, &theta[..k1]).unwrap().ln()
                    - spec.margin2.family.pdf(y2, &theta[k1..k1 + k2]).unwrap().ln();
                assert!(
                    (joint - marg).abs() < 1e-10,
                    "{} {}: joint {joint} vs marginal sum {marg}",
                    spec.pair_kind.name(),
                    cop.label()
                );
            }
        }
    }
    println!("[PASS] criterion 4: independence factorization at eta_c = 0 (1e-10)");
}

#[test]
fn criterion_05_coherence() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    // four-cell masses of the binary pair: in [0,1] and summing to 1
    for fam in FAMILIES {
        for rot in ROTATIONS {
            let cop = CopulaSpec::new(fam, rot);
            for _ in 0..50 {
                let t = user_theta(&cop, random_base_theta(fam, &mut rng));
                let p1: f64 = rng.random_range(0.02..0.98);
                let p2: f64 = rng.random_range(0.02..0.98);
                let p11 = cop.cdf(p1, p2, t).unwrap();
                let cells = [p11, p1 - p11, p2 - p11, 1.0 - p1 - p2 + p11];
                for c in cells {
                    assert!((-1e-12..=1.0 + 1e-12).contains(&c), "cell {c}");
                }
                assert!((cells.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
    // rectangle masses over [0,50]^2 telescope to the joint CDF
    for (cop, eta) in [
        (CopulaSpec::new(CopulaFamily::Joe, Rotation::R0), vec![0.4, -0.3, 0.7, 0.1, -0.8, 0.9]),
        (CopulaSpec::new(CopulaFamily::Gauss, Rotation::R0), vec![-0.2, 0.5, 0.4, -0.4, 0.3, 0.6]),
    ] {
        let spec = spec_count(cop);
        let m = 50usize;
        let mut total = 0.0;
        for y1 in 0..=m {
            for y2 in 0..=m {
                total += (-spec.joint_nll(y1 as f64, y2 as f64, &eta).unwrap()).exp();
            }
        }
        let theta = spec.theta_from_eta(&eta);
        let expect = cop
            .cdf(
                spec.margin1.family.cdf(m as f64, &theta[..2]).unwrap(),
                spec.margin2.family.cdf(m as f64, &theta[2..5]).unwrap(),
                theta[5],
            )
            .unwrap();
        assert!((total - expect).abs() < 1e-8, "{}: {total} vs {expect}", cop.label());
    }
    println!("[PASS] criterion 5: four-cell masses sum to 1 (1e-12); rectangle masses telescope (1e-8)");
}

fn univariate_of(spec: &ModelSpec) -> ModelSpec {
    let mut s = spec.clone();
    s.copula = CopulaSpec::new(CopulaFamily::Independence, Rotation::R0);
    s
}

struct DeskFit {
    model: FittedModel,
    umodel: FittedModel,
    data: Dataset,
}

/// Fits the copula model and the univariate benchmark on one replicate.
fn desk_fit(preset: Preset, seed: u64, m_stop: usize, plan_kind: &str) -> DeskFit {
    let dgp = DgpSpec::new(preset, seed);
    let (data, _) = simulate(&dgp).unwrap();
    let spec = preset.model_spec();
    let k = spec.k_total();
    let mk = |j: usize| match plan_kind {
        "linear" => BaseLearnerDef::linear(j),
        _ => BaseLearnerDef::pspline(j, PSplineConfig::default(), 4.0),
    };
    let plan = LearnerPlan { per_param: (0..k).map(|_| (0..dgp.p).map(mk).collect()).collect() };
    let config = BoostConfig { m_stop, seed, ..Default::default() };
    let (model, trace) = fit(&spec, &data, &plan, &config).unwrap();
    let model = model.truncated(tune_mstop(&trace));

    let uspec = univariate_of(&spec);
    let mut uplan = plan.clone();
    uplan.per_param[k - 1] = Vec::new();
    let (umodel, utrace) = fit(&uspec, &data, &uplan, &config).unwrap();
    let umodel = umodel.truncated(tune_mstop(&utrace));
    DeskFit { model, umodel, data }
}

#[test]
fn criterion_06_s1_desk_replication() {
    let reps = 20;
    let informative = Preset::S1BinaryLinear.informative();
    let mut log_c = Vec::new();
    let mut log_u = Vec::new();
    let mut margin_sel = 0usize;
    let mut margin_tot = 0usize;
    let mut cop_sel = 0usize;
    let mut cop_tot = 0usize;
    for seed in 1..=reps {
        let fitres = desk_fit(Preset::S1BinaryLinear, seed, 1500, "linear");
        log_c.push(log_score(&fitres.model, &fitres.data, Partition::Test).unwrap());
        log_u.push(log_score(&fitres.umodel, &fitres.data, Partition::Test).unwrap());
        let selected = fitres.model.selected_covariates();
        for (param, inf) in informative.iter().enumerate() {
            for j in inf {
                if param < 2 {
                    margin_tot += 1;
                    margin_sel += usize::from(selected[param].contains(j));
                } else {
                    cop_tot += 1;
                    cop_sel += usize::from(selected[param].contains(j));
                }
            }
        }
    }
    let mean_c = log_c.iter().sum::<f64>() / reps as f64;
    let mean_u = log_u.iter().sum::<f64>() / reps as f64;
    assert!(mean_c < mean_u, "(a) mean log score: copula {mean_c} vs univariate {mean_u}");
    let margin_rate = 100.0 * margin_sel as f64 / margin_tot as f64;
    assert!(
        (margin_rate - 100.0).abs() < 1e-12,
        "(b) margin informative selection rate {margin_rate}%"
    );
    let cop_rate = 100.0 * cop_sel as f64 / cop_tot as f64;
    assert!(cop_rate >= 80.0, "(c) dependence informative selection rate {cop_rate}%");
    println!(
        "[PASS] criterion 6: s1 desk replication over {reps} replicates \
         (log {mean_c:.1} < {mean_u:.1}; margin selection {margin_rate:.1}%; \
         dependence selection {cop_rate:.1}%)"
    );
}

#[test]
fn criterion_07_s2_desk_replication() {
    let reps = 10;
    let mut log_wins = 0usize;
    let mut energy_wins = 0usize;
    let mut means = (0.0, 0.0, 0.0, 0.0);
    for seed in 1..=reps {
        let fitres = desk_fit(Preset::S2CountLinear, seed, 1000, "linear");
        let lc = log_score(&fitres.model, &fitres.data, Partition::Test).unwrap();
        let lu = log_score(&fitres.umodel, &fitres.data, Partition::Test).unwrap();
        let ec = energy_score(&fitres.model, &fitres.data, Partition::Test, 1000, 9).unwrap();
        let eu = energy_score(&fitres.umodel, &fitres.data, Partition::Test, 1000, 9).unwrap();
        log_wins += usize::from(lc < lu);
        energy_wins += usize::from(ec < eu);
        means = (means.0 + lc, means.1 + lu, means.2 + ec, means.3 + eu);
    }
    assert!(log_wins >= 9, "copula log score wins {log_wins}/10, need >= 9");
    assert!(energy_wins >= 7, "copula energy score wins {energy_wins}/10, need >= 7");
    println!(
        "[PASS] criterion 7: s2 desk replication (log wins {log_wins}/10, mean {:.1} vs {:.1}; \
         energy wins {energy_wins}/10, mean {:.4} vs {:.4})",
        means.0 / reps as f64,
        means.1 / reps as f64,
        means.2 / reps as f64,
        means.3 / reps as f64
    );
}

#[test]
fn criterion_08_s3_nonlinear_desk_replication() {
    let reps = 10;
    let grid: Vec<f64> = (0..91).map(|i| 0.05 + 0.9 * i as f64 / 90.0).collect();
    type Effect = (usize, usize, fn(f64) -> f64);
    let effects: [Effect; 4] = [
        (0, 0, |x| 0.5 * (x.powf(1.5) - 2.0 * (3.0 * x).cos())),
        (1, 0, |x| -0.7 * (x * x).exp() + x.powf(0.4).exp()),
        (2, 1, |x| -0.5 + (2.0 * x).cos()),
        (3, 2, |x| -1.0 + 3.0 * (4.0 * x).sin()),
    ];
    let center = |v: &mut Vec<f64>| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        for x in v.iter_mut() {
            *x -= m;
        }
    };
    let mut rmse_sums = [0.0f64; 4];
    let mut zero_rmse = [0.0f64; 4];
    let informative = Preset::S3MixedNonlinear.informative();
    let mut margin_sel = 0usize;
    let mut margin_tot = 0usize;
    for seed in 1..=reps {
        let fitres = desk_fit(Preset::S3MixedNonlinear, seed, 2000, "pspline");
        for (e, (param, cov, f)) in effects.iter().enumerate() {
            let mut truth: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
            let mut est: Vec<f64> =
                grid.iter().map(|&x| fitres.model.effect_at(*param, *cov, x)).collect();
            center(&mut truth);
            center(&mut est);
            let rmse = (truth
                .iter()
                .zip(&est)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                / grid.len() as f64)
                .sqrt();
            rmse_sums[e] += rmse / reps as f64;
            zero_rmse[e] =
                (truth.iter().map(|a| a * a).sum::<f64>() / grid.len() as f64).sqrt();
        }
        let selected = fitres.model.selected_covariates();
        for (param, inf) in informative.iter().enumerate().take(3) {
            for j in inf {
                margin_tot += 1;
                margin_sel += usize::from(selected[param].contains(j));
            }
        }
    }
    for e in 0..4 {
        assert!(
            rmse_sums[e] < zero_rmse[e],
            "effect {e}: mean RMSE {} not below zero-function RMSE {}",
            rmse_sums[e],
            zero_rmse[e]
        );
    }
    let margin_rate = 100.0 * margin_sel as f64 / margin_tot as f64;
    assert!((margin_rate - 100.0).abs() < 1e-12, "margin informative selection {margin_rate}%");
    println!(
        "[PASS] criterion 8: s3 nonlinear desk replication (effect RMSE {:?} below zero RMSE {:?}; \
         margin selection {margin_rate:.1}%)",
        rmse_sums.map(|v| (v * 1e3).round() / 1e3),
        zero_rmse.map(|v| (v * 1e3).round() / 1e3)
    );
}

#[test]
fn criterion_09_engine_invariants() {
    let dgp = DgpSpec {
        n_train: 250,
        n_mstop: 150,
        n_test: 100,
        ..DgpSpec::new(Preset::S1BinaryLinear, 77)
    };
    let (data, _) = simulate(&dgp).unwrap();
    let spec = Preset::S1BinaryLinear.model_spec();
    let plan = LearnerPlan {
        per_param: (0..3).map(|_| (0..10).map(BaseLearnerDef::linear).collect()).collect(),
    };
    let config = BoostConfig { m_stop: 60, seed: 77, ..Default::default() };
    let (model, trace) = fit(&spec, &data, &plan, &config).unwrap();

    // exactly one update per iteration; executed update beats all candidates
    assert_eq!(trace.rows.len(), 60);
    assert_eq!(model.update_counts().iter().flatten().sum::<usize>(), 60);
    for row in &trace.rows {
        let min = row.candidate_risks.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(row.candidate_risks[row.selected_param], min);
    }

    // m_stop = 0 predicts the offsets
    let (null_model, _) =
        fit(&spec, &data, &plan, &BoostConfig { m_stop: 0, ..config }).unwrap();
    let pred = null_model.predict(&data.x, None).unwrap();
    for i in 0..data.n() {
        assert_eq!(pred.eta_row(i), &null_model.offsets[..]);
    }

    // byte-exact determinism across two runs
    let (model2, trace2) = fit(&spec, &data, &plan, &config).unwrap();
    assert_eq!(
        serde_json::to_string(&model).unwrap(),
        serde_json::to_string(&model2).unwrap()
    );
    assert_eq!(
        serde_json::to_string(&trace).unwrap(),
        serde_json::to_string(&trace2).unwrap()
    );

    // model-file round trip reproduces predictions to 1e-12
    let dir = std::env::temp_dir().join(format!("copboost_acc9_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let mf = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        config_hash: "acceptance".into(),
        seed: 77,
        m_opt: tune_mstop(&trace),
        standardize: None,
        model,
    };
    let path = dir.join("model.json");
    mf.save(&path).unwrap();
    let loaded = ModelFile::load(&path).unwrap();
    let before = mf.model.predict(&data.x, None).unwrap();
    let after = loaded.model.predict(&data.x, None).unwrap();
    for (a, b) in before.eta.iter().zip(&after.eta) {
        assert!((a - b).abs() < 1e-12);
    }
    println!("[PASS] criterion 9: engine invariants (one update/iter, argmin updates, offsets at m=0, byte-exact reruns, round trip 1e-12)");
}

#[test]
fn criterion_10_offset_mle_convergence() {
    // mixed pair under independence: Bernoulli and Gaussian margins in one
    // model; zero offsets, intercept-only learners
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let n = 500;
    let y1: Vec<f64> = (0..n).map(|_| f64::from(rng.random::<f64>() < 0.35)).collect();
    let y2: Vec<f64> = (0..n)
        .map(|_| 1.2 + 0.8 * copboost::normal::quantile(rng.random_range(1e-12..1.0 - 1e-12)))
        .collect();
    let data = Dataset {
        y1: y1.clone(),
        y2: y2.clone(),
        x: vec![vec![0.0; n]],
        x_names: vec!["x1".into()],
        partition: vec![Partition::Train; n],
    };
    let spec = ModelSpec::new(
        PairKind::BinaryContinuous,
        MarginSpec::new(MarginFamily::Bernoulli, vec![Link::Logit]).unwrap(),
        MarginSpec::with_default_links(MarginFamily::Gaussian),
        CopulaSpec::new(CopulaFamily::Independence, Rotation::R0),
    )
    .unwrap();
    let plan = LearnerPlan {
        per_param: (0..4).map(|_| vec![BaseLearnerDef::intercept()]).collect(),
    };
    let config = BoostConfig {
        m_stop: 3000,
        offset_mode: OffsetMode::Zero,
        seed: 0,
        ..Default::default()
    };
    let (model, _) = fit(&spec, &data, &plan, &config).unwrap();
    let pred = model.predict(&data.x, None).unwrap();
    let eta = pred.eta_row(0);

    let mean1 = y1.iter().sum::<f64>() / n as f64;
    let mle_bern = (mean1 / (1.0 - mean1)).ln();
    let mean2 = y2.iter().sum::<f64>() / n as f64;
    let sd2 = (y2.iter().map(|v| (v - mean2) * (v - mean2)).sum::<f64>() / n as f64).sqrt();
    assert!((eta[0] - mle_bern).abs() < 1e-4, "bernoulli: {} vs {mle_bern}", eta[0]);
    assert!((eta[1] - mean2).abs() < 1e-4, "gaussian mean: {} vs {mean2}", eta[1]);
    assert!((eta[2] - sd2.ln()).abs() < 1e-4, "gaussian log-sd: {} vs {}", eta[2], sd2.ln());
    println!(
        "[PASS] criterion 10: intercept-only boosting reaches the closed-form MLE within 1e-4 \
         (bernoulli {:.6} ~ {mle_bern:.6}; gaussian {:.6} ~ {mean2:.6}, {:.6} ~ {:.6})",
        eta[0],
        eta[1],
        eta[2],
        sd2.ln()
    );
}
