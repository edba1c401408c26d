//! Acceptance gate: one test per criterion, each printing a PASS/FAIL line
//! with the measured quantities. Run with
//! `cargo test --test acceptance -- --nocapture` to see every line.

use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::DMatrix;
use ndarray::Array2;
use rand_distr::{Distribution, Gamma, StandardNormal};

use tvnet::data::PseudoTimeDataset;
use tvnet::evaluate::{
    auc, average_roc, geweke_test, heidelberger_test, roc_curve, RocPoint,
};
use tvnet::gibbs::{
    gibbs_fit, gibbs_fit_per_time, step_beta_column, step_intercept, step_noise_precision,
    step_nu, step_rho, ChainState, ModelHyperparams, SamplerConfig, TargetView,
};
use tvnet::network::{assemble_network, export_edges, import_edges, summarize, summarize_per_time};
use tvnet::prior::{
    build_precision, covariance_log_det, sample_prior_trajectory, sample_reverse_exp,
    CopulaCorrelation,
};
use tvnet::screening::{auto_budget, holp_screen, ScreenBudget};
use tvnet::simulate::{apply_dropout, simulate_dataset, SimulationSpec};
use tvnet::stats::gof::{ks_test_cdf, ks_test_two_sample, ks_test_uniform};
use tvnet::stats::inverse_gaussian::sample_inverse_gaussian;
use tvnet::stats::laplace::laplace_cdf;
use tvnet::stats::tridiag::sample_normal_tridiag_precision;
use tvnet::RngStream;

const STUDY_REPS: usize = 50;
const STUDY_ITER: usize = 1_500;
const STUDY_BURN: usize = 500;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

// ---------------------------------------------------------------------------
// criterion 1: precision / determinant identities
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_precision_and_determinant_identities() {
    let start = Instant::now();
    let mut worst_prod: f64 = 0.0;
    let mut worst_det: f64 = 0.0;
    for i in 0..10 {
        let rho = i as f64 * 0.1;
        for t in 2..=12 {
            let c = CopulaCorrelation::new(rho, t).unwrap();
            let p = build_precision(&c);
            let dense_p = DMatrix::from_fn(t, t, |r, s| {
                if r == s {
                    p.main()[r]
                } else if r.abs_diff(s) == 1 {
                    p.off()[r.min(s)]
                } else {
                    0.0
                }
            });
            let sigma = DMatrix::from_fn(t, t, |r, s| rho.powi(r.abs_diff(s) as i32));
            let prod = &dense_p * &sigma;
            for r in 0..t {
                for s in 0..t {
                    let expect = if r == s { 1.0 } else { 0.0 };
                    worst_prod = worst_prod.max((prod[(r, s)] - expect).abs());
                }
            }
            worst_det = worst_det.max((covariance_log_det(&c) - sigma.determinant().ln()).abs());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_prod < 1e-10 && worst_det < 1e-10 && elapsed.as_secs_f64() < 1.0;
    report(
        "1 (precision/determinant identities)",
        pass,
        &format!(
            "max |P*Sigma - I| = {worst_prod:.2e}, max log-det error = {worst_det:.2e}, {elapsed:.1?}"
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// criterion 2: marginal Bayesian-lasso recovery
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_marginal_bayesian_lasso_recovery() {
    // (a) prior trajectories: per-coordinate KS vs Laplace(1/20)
    let (lambda, k, t_len) = (20.0, 1.0, 8usize);
    let n = 100_000usize;
    let mut rng = RngStream::new(301, 0);
    let mut per_coord: Vec<Vec<f64>> = vec![Vec::with_capacity(n); t_len];
    for _ in 0..n {
        let b = sample_prior_trajectory(lambda, k, t_len, &mut rng).unwrap();
        for (t, &v) in b.iter().enumerate() {
            per_coord[t].push(v);
        }
    }
    let level = 0.01 / t_len as f64;
    let mut min_p = f64::MAX;
    for coord in &per_coord {
        let res = ks_test_cdf(coord, |x| laplace_cdf(x, lambda).unwrap());
        min_p = min_p.min(res.p_value);
    }
    let prior_pass = min_p > level;

    // (b) rho = 0 reduction: per-time fits match an independently written
    // per-time Bayesian lasso on a T=3, 2-predictor, n_t=10 instance
    let lasso_pass = rho_zero_matches_reference_lasso();

    let pass = prior_pass && lasso_pass;
    report(
        "2 (marginal Bayesian-lasso recovery)",
        pass,
        &format!(
            "prior per-coordinate KS min p = {min_p:.4} (level {level:.4}), rho=0 two-sample match: {lasso_pass}"
        ),
    );
    assert!(pass);
}

/// Reference sampler: textbook scale-mixture Bayesian lasso on one time
/// slice with per-coefficient scales, written directly from the per-cell
/// formulas.
struct ReferenceLasso {
    y: Vec<f64>,
    x: Vec<[f64; 2]>,
    lambda: f64,
    a: f64,
    tau: f64,
    b: [f64; 2],
    inv_s: [f64; 2],
}

impl ReferenceLasso {
    fn new(y: Vec<f64>, x: Vec<[f64; 2]>, lambda: f64) -> Self {
        Self {
            y,
            x,
            lambda,
            a: 0.0,
            tau: 1.0,
            b: [0.0; 2],
            inv_s: [lambda * lambda; 2],
        }
    }

    fn sweep(&mut self, rng: &mut RngStream) {
        let n = self.y.len() as f64;
        let resid_no_a: f64 = self
            .y
            .iter()
            .zip(&self.x)
            .map(|(y, x)| y - self.b[0] * x[0] - self.b[1] * x[1])
            .sum();
        let var = 1.0 / (1.0 + n * self.tau);
        let z: f64 = StandardNormal.sample(rng);
        self.a = var * self.tau * resid_no_a + var.sqrt() * z;
        let rss: f64 = self
            .y
            .iter()
            .zip(&self.x)
            .map(|(y, x)| (y - self.a - self.b[0] * x[0] - self.b[1] * x[1]).powi(2))
            .sum();
        self.tau = Gamma::new(1.0 + 0.5 * n, 1.0 / (1.0 + 0.5 * rss))
            .unwrap()
            .sample(rng);
        for j in 0..2 {
            let bj = self.b[j];
            self.inv_s[j] = if bj * bj < 1e-12 {
                loop {
                    let z: f64 = StandardNormal.sample(rng);
                    if z * z > 1e-280 {
                        break self.lambda * self.lambda / (z * z);
                    }
                }
            } else {
                sample_inverse_gaussian(self.lambda / bj.abs(), self.lambda * self.lambda, rng)
                    .unwrap()
            };
            let other = 1 - j;
            let (mut sxr, mut sxx) = (0.0, 0.0);
            for (y, x) in self.y.iter().zip(&self.x) {
                sxr += x[j] * (y - self.a - self.b[other] * x[other]);
                sxx += x[j] * x[j];
            }
            let prec = self.inv_s[j] + self.tau * sxx;
            let z: f64 = StandardNormal.sample(rng);
            self.b[j] = self.tau * sxr / prec + z / prec.sqrt();
        }
    }
}

fn rho_zero_matches_reference_lasso() -> bool {
    let lambda = 2.0;
    let hp = ModelHyperparams::new(lambda, 1.0).unwrap();
    let (t_len, n_t) = (3usize, 10usize);
    let mut rng = RngStream::new(302, 0);
    let n = t_len * n_t;
    let mut values = Array2::zeros((n, 3));
    for t in 0..t_len {
        for k in 0..n_t {
            let row = t * n_t + k;
            let x1: f64 = StandardNormal.sample(&mut rng);
            let x2: f64 = StandardNormal.sample(&mut rng);
            let e: f64 = StandardNormal.sample(&mut rng);
            values[(row, 1)] = x1;
            values[(row, 2)] = x2;
            values[(row, 0)] = 0.4 * t as f64 * x1 + 0.3 * e;
        }
    }
    let labels: Vec<i64> = (0..n).map(|i| (i / n_t + 1) as i64).collect();
    let ds = PseudoTimeDataset::new(values, labels, vec!["y".into(), "x1".into(), "x2".into()])
        .unwrap();

    let sweeps = 200_000usize;
    let burn = 2_000usize;
    let thin = 40usize;
    let cfg = SamplerConfig::new(sweeps, burn, thin, 777).unwrap();
    let slices = gibbs_fit_per_time(&ds, 0, &[1, 2], &hp, &cfg).unwrap();

    let mut all_pass = true;
    for (t, slice_draws) in slices.iter().enumerate() {
        let slice = ds.time_slice(t + 1).unwrap();
        let y: Vec<f64> = (0..n_t).map(|k| slice.values()[(k, 0)]).collect();
        let x: Vec<[f64; 2]> = (0..n_t)
            .map(|k| [slice.values()[(k, 1)], slice.values()[(k, 2)]])
            .collect();
        let mut reference = ReferenceLasso::new(y, x, lambda);
        let mut ref_rng = RngStream::new(888, t as u64);
        let mut ref_draws: Vec<[f64; 2]> = Vec::new();
        for s in 0..sweeps {
            reference.sweep(&mut ref_rng);
            if s >= burn && (s - burn) % thin == 0 {
                ref_draws.push(reference.b);
            }
        }
        for j in 0..2 {
            let ours: Vec<f64> = slice_draws.draws.iter().map(|st| st.b[(0, j)]).collect();
            let theirs: Vec<f64> = ref_draws.iter().map(|b| b[j]).collect();
            let ks = ks_test_two_sample(&ours, &theirs);
            if ks.p_value <= 0.01 {
                println!("  rho=0 mismatch at (t={t}, j={j}): KS p = {:.4}", ks.p_value);
                all_pass = false;
            }
        }
    }
    all_pass
}

// ---------------------------------------------------------------------------
// criterion 3: conditional-density grid oracles
// ---------------------------------------------------------------------------

/// Log of the joint (equation-level oracle, constants dropped): likelihood
/// x prior over (a, tau, B, rho, nu).
fn log_joint(view: &TargetView, state: &ChainState, hp: &ModelHyperparams) -> f64 {
    if state.tau <= 0.0 || state.nu.iter().any(|&v| v <= 0.0) {
        return f64::NEG_INFINITY;
    }
    let resid = view.residuals(state);
    let rss: f64 = resid.iter().flatten().map(|r| r * r).sum();
    let n = view.n_total() as f64;
    let t_len = view.t_len();
    let mut lp = 0.5 * n * state.tau.ln() - 0.5 * state.tau * rss;
    lp += -state.tau - 0.5 * state.a * state.a;
    for j in 0..state.n_predictors() {
        let rho = state.rho[j];
        let nu = state.nu[j];
        let c = CopulaCorrelation::new(rho, t_len).unwrap();
        let b_col: Vec<f64> = (0..t_len).map(|t| state.b[(t, j)]).collect();
        let q = build_precision(&c).quadratic_form(&b_col);
        lp += hp.k * rho - hp.lambda * hp.lambda / (2.0 * nu) - 1.5 * nu.ln()
            - 0.5 * covariance_log_det(&c)
            - 0.5 * nu * q;
    }
    lp
}

/// One-sample KS of `draws` against a density known on a grid (trapezoid
/// normalization, piecewise-linear CDF).
fn ks_against_grid(draws: &[f64], grid: &[f64], log_dens: &[f64]) -> f64 {
    let max_ld = log_dens.iter().cloned().fold(f64::MIN, f64::max);
    let dens: Vec<f64> = log_dens.iter().map(|l| (l - max_ld).exp()).collect();
    let mut cdf = vec![0.0; grid.len()];
    for i in 1..grid.len() {
        cdf[i] = cdf[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (grid[i] - grid[i - 1]);
    }
    let total = *cdf.last().unwrap();
    cdf.iter_mut().for_each(|v| *v /= total);
    let eval = |x: f64| -> f64 {
        if x <= grid[0] {
            return 0.0;
        }
        if x >= *grid.last().unwrap() {
            return 1.0;
        }
        let idx = grid.partition_point(|&g| g < x) - 1;
        let frac = (x - grid[idx]) / (grid[idx + 1] - grid[idx]);
        cdf[idx] + frac * (cdf[idx + 1] - cdf[idx])
    };
    ks_test_cdf(draws, eval).p_value
}

#[test]
fn criterion_3_conditional_grid_oracles() {
    // one-predictor, T=2, n_t=3 instance shared by all five checks
    let values = ndarray::array![
        [0.9, 0.5],
        [-0.3, -1.0],
        [0.6, 0.25],
        [1.4, 1.1],
        [-0.8, -0.6],
        [0.2, 0.4]
    ];
    let ds = PseudoTimeDataset::new(
        values,
        vec![1, 1, 1, 2, 2, 2],
        vec!["y".into(), "x1".into()],
    )
    .unwrap();
    let view = TargetView::new(&ds, 0, &[1]).unwrap();
    let hp = ModelHyperparams::new(2.0, 1.5).unwrap();
    let mut frozen = ChainState::initial(2, 1, &hp, None);
    frozen.a = 0.15;
    frozen.tau = 1.4;
    frozen.b[(0, 0)] = 0.45;
    frozen.b[(1, 0)] = -0.2;
    frozen.rho[0] = 0.55;
    frozen.nu[0] = 3.0;
    let n_draws = 100_000usize;
    let mut results: Vec<(String, f64)> = Vec::new();

    // intercept
    {
        let mut rng = RngStream::new(310, 0);
        let draws: Vec<f64> = (0..n_draws)
            .map(|_| step_intercept(&frozen, &view, &mut rng))
            .collect();
        let grid: Vec<f64> = (0..4001).map(|i| -3.0 + i as f64 * 6.0 / 4000.0).collect();
        let lds: Vec<f64> = grid
            .iter()
            .map(|&a| {
                let mut s = frozen.clone();
                s.a = a;
                log_joint(&view, &s, &hp)
            })
            .collect();
        results.push(("a".into(), ks_against_grid(&draws, &grid, &lds)));
    }
    // noise precision
    {
        let mut rng = RngStream::new(311, 0);
        let draws: Vec<f64> = (0..n_draws)
            .map(|_| step_noise_precision(&frozen, &view, &mut rng))
            .collect();
        let grid: Vec<f64> = (1..6001).map(|i| i as f64 * 12.0 / 6000.0).collect();
        let lds: Vec<f64> = grid
            .iter()
            .map(|&tau| {
                let mut s = frozen.clone();
                s.tau = tau;
                log_joint(&view, &s, &hp)
            })
            .collect();
        results.push(("tau".into(), ks_against_grid(&draws, &grid, &lds)));
    }
    // nu
    {
        let mut rng = RngStream::new(999, 0);
        let draws: Vec<f64> = (0..n_draws)
            .map(|_| step_nu(&frozen, 0, &hp, &mut rng))
            .collect();
        let grid: Vec<f64> = (1..40_001).map(|i| i as f64 * 80.0 / 40_000.0).collect();
        let lds: Vec<f64> = grid
            .iter()
            .map(|&nu| {
                let mut s = frozen.clone();
                s.nu[0] = nu;
                log_joint(&view, &s, &hp)
            })
            .collect();
        results.push(("nu".into(), ks_against_grid(&draws, &grid, &lds)));
    }
    // rho: chained slice transitions at k ~ 0 against the grid-normalized
    // conditional (thinning tames the slice chain's autocorrelation)
    {
        let hp0 = ModelHyperparams::new(2.0, 1e-12).unwrap();
        let mut state = frozen.clone();
        let mut rng = RngStream::new(313, 0);
        let mut draws = Vec::with_capacity(60_000);
        for i in 0..300_000usize {
            state.rho[0] = step_rho(&state, 0, &hp0, &mut rng).unwrap();
            if i % 5 == 4 {
                draws.push(state.rho[0]);
            }
        }
        let grid: Vec<f64> = (0..4001).map(|i| i as f64 * (1.0 - 1e-6) / 4000.0).collect();
        let lds: Vec<f64> = grid
            .iter()
            .map(|&rho| {
                let mut s = frozen.clone();
                s.rho[0] = rho;
                log_joint(&view, &s, &hp0)
            })
            .collect();
        results.push(("rho".into(), ks_against_grid(&draws, &grid, &lds)));
    }
    // beta column: per-coordinate marginals from a 2D grid of the joint
    {
        let mut rng = RngStream::new(314, 0);
        let mut d0 = Vec::with_capacity(n_draws);
        let mut d1 = Vec::with_capacity(n_draws);
        for _ in 0..n_draws {
            let b = step_beta_column(&frozen, 0, &view, &mut rng).unwrap();
            d0.push(b[0]);
            d1.push(b[1]);
        }
        let g: Vec<f64> = (0..601).map(|i| -2.5 + i as f64 * 5.0 / 600.0).collect();
        let mut marg0 = vec![0.0f64; g.len()];
        let mut marg1 = vec![0.0f64; g.len()];
        let mut lmat = vec![0.0f64; g.len() * g.len()];
        let mut max_l = f64::MIN;
        for (i0, &b0) in g.iter().enumerate() {
            for (i1, &b1) in g.iter().enumerate() {
                let mut s = frozen.clone();
                s.b[(0, 0)] = b0;
                s.b[(1, 0)] = b1;
                let l = log_joint(&view, &s, &hp);
                lmat[i0 * g.len() + i1] = l;
                max_l = max_l.max(l);
            }
        }
        for (i0, m0) in marg0.iter_mut().enumerate() {
            for (i1, m1) in marg1.iter_mut().enumerate() {
                let d = (lmat[i0 * g.len() + i1] - max_l).exp();
                *m0 += d;
                *m1 += d;
            }
        }
        let l0: Vec<f64> = marg0.iter().map(|d| d.max(1e-300).ln()).collect();
        let l1: Vec<f64> = marg1.iter().map(|d| d.max(1e-300).ln()).collect();
        results.push(("b[t=1]".into(), ks_against_grid(&d0, &g, &l0)));
        results.push(("b[t=2]".into(), ks_against_grid(&d1, &g, &l1)));
    }

    let pass = results.iter().all(|(_, p)| *p > 0.01);
    let detail = results
        .iter()
        .map(|(n, p)| format!("{n}: p={p:.3}"))
        .collect::<Vec<_>>()
        .join(", ");
    report("3 (conditional grid oracles)", pass, &detail);
    assert!(pass, "{detail}");
}

// ---------------------------------------------------------------------------
// criterion 4: joint correctness (successive-conditional test)
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_joint_correctness_successive_conditional() {
    const T: usize = 3;
    const M: usize = 2;
    const NT: usize = 5;
    let hp = ModelHyperparams::new(2.0, 1.5).unwrap();
    let cycles = 270_000usize;
    let thin = 15usize;
    let mut rng = RngStream::new(500, 0);
    let x = Array2::from_shape_fn((T * NT, M), |_| StandardNormal.sample(&mut rng));

    // prior draws consistent with the joint the sampler targets:
    // 1/nu ~ Gamma((T+1)/2, rate lambda^2/2), b | nu, rho ~ N(0, Sigma/nu)
    let prior_draw = |rng: &mut RngStream| -> ChainState {
        let a: f64 = StandardNormal.sample(rng);
        let tau: f64 = Gamma::new(1.0, 1.0).unwrap().sample(rng);
        let mut b = Array2::zeros((T, M));
        let mut rho = vec![0.0; M];
        let mut nu = vec![0.0; M];
        for j in 0..M {
            rho[j] = sample_reverse_exp(hp.k, rng).unwrap();
            let s: f64 = Gamma::new((T as f64 + 1.0) / 2.0, 2.0 / (hp.lambda * hp.lambda))
                .unwrap()
                .sample(rng);
            nu[j] = 1.0 / s;
            let c = CopulaCorrelation::new(rho[j], T).unwrap();
            let z =
                sample_normal_tridiag_precision(&build_precision(&c), &vec![0.0; T], rng).unwrap();
            for t in 0..T {
                b[(t, j)] = z[t] / nu[j].sqrt();
            }
        }
        ChainState { a, tau, b, rho, nu }
    };

    let simulate_y = |state: &ChainState, rng: &mut RngStream| -> PseudoTimeDataset {
        let n = T * NT;
        let mut values = Array2::zeros((n, M + 1));
        let sd = 1.0 / state.tau.sqrt();
        for t in 0..T {
            for k in 0..NT {
                let row = t * NT + k;
                let mut mean = state.a;
                for j in 0..M {
                    values[(row, j + 1)] = x[(row, j)];
                    mean += state.b[(t, j)] * x[(row, j)];
                }
                let z: f64 = StandardNormal.sample(rng);
                values[(row, 0)] = mean + sd * z;
            }
        }
        let labels: Vec<i64> = (0..n).map(|i| (i / NT + 1) as i64).collect();
        PseudoTimeDataset::new(values, labels, vec!["y".into(), "x1".into(), "x2".into()])
            .unwrap()
    };

    let prior_states: Vec<ChainState> = (0..cycles).map(|_| prior_draw(&mut rng)).collect();

    let mut state = prior_draw(&mut rng);
    let mut succ_states = Vec::with_capacity(cycles / thin);
    for cycle in 0..cycles {
        let ds = simulate_y(&state, &mut rng);
        let view = TargetView::new(&ds, 0, &[1, 2]).unwrap();
        state.a = step_intercept(&state, &view, &mut rng);
        state.tau = step_noise_precision(&state, &view, &mut rng);
        for j in 0..M {
            state.nu[j] = step_nu(&state, j, &hp, &mut rng);
            state.rho[j] = step_rho(&state, j, &hp, &mut rng).unwrap();
            let col = step_beta_column(&state, j, &view, &mut rng).unwrap();
            for t in 0..T {
                state.b[(t, j)] = col[t];
            }
        }
        if cycle % thin == thin - 1 {
            succ_states.push(state.clone());
        }
    }

    let mut details = Vec::new();
    let mut pass = true;
    let mut check = |name: String, f: &dyn Fn(&ChainState) -> f64| {
        let pa: Vec<f64> = prior_states.iter().map(f).collect();
        let pb: Vec<f64> = succ_states.iter().map(f).collect();
        let ks = ks_test_two_sample(&pa, &pb);
        pass &= ks.p_value > 0.01;
        details.push(format!("{name}: p={:.3}", ks.p_value));
    };
    check("a".into(), &|s| s.a);
    check("tau".into(), &|s| s.tau);
    for j in 0..M {
        check(format!("rho[{j}]"), &move |s: &ChainState| s.rho[j]);
        check(format!("nu[{j}]"), &move |s: &ChainState| s.nu[j]);
        for t in 0..T {
            check(format!("b[{t},{j}]"), &move |s: &ChainState| s.b[(t, j)]);
        }
    }
    report(
        "4 (successive-conditional joint correctness)",
        pass,
        &details.join(", "),
    );
    assert!(pass, "{}", details.join(", "));
}

// ---------------------------------------------------------------------------
// criteria 5-7: the simulation study
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
enum FitMode {
    Full,
    PerTimeDecoupled,
    Dropout(f64),
}

/// One study replicate: simulate, (optionally drop out), standardize, fit
/// all 40 targets, pool into one ROC curve.
fn study_curve(rep: u64, sigma: f64, lambda: f64, k: f64, mode: FitMode) -> Vec<RocPoint> {
    let spec = SimulationSpec {
        noise_sd: sigma,
        seed: rep,
        ..SimulationSpec::default()
    };
    let mut rng = RngStream::new(rep, 10_000);
    let (mut ds, gt) = simulate_dataset(&spec, &mut rng).unwrap();
    if let FitMode::Dropout(omega) = mode {
        ds = apply_dropout(&ds, omega, &mut rng).unwrap();
    }
    let ds = ds.standardize().unwrap();
    let hp = ModelHyperparams::new(lambda, k).unwrap();
    let cfg = SamplerConfig::new(STUDY_ITER, STUDY_BURN, 1, rep).unwrap();
    let p = ds.n_nodes();
    let summaries: Vec<_> = (0..p)
        .map(|target| {
            let predictors: Vec<usize> = (0..p).filter(|&j| j != target).collect();
            match mode {
                FitMode::PerTimeDecoupled => {
                    let slices = gibbs_fit_per_time(&ds, target, &predictors, &hp, &cfg).unwrap();
                    summarize_per_time(&slices).unwrap()
                }
                _ => summarize(&gibbs_fit(&ds, target, &predictors, &hp, &cfg).unwrap()).unwrap(),
            }
        })
        .collect();
    roc_curve(&gt, &summaries).unwrap()
}

fn study_auc(sigma: f64, lambda: f64, k: f64, mode: FitMode) -> f64 {
    let curves: Vec<_> = (0..STUDY_REPS as u64)
        .map(|rep| study_curve(rep, sigma, lambda, k, mode))
        .collect();
    auc(&average_roc(&curves).unwrap()).unwrap()
}

/// Full-model sigma = 0.1 run shared by criteria 5, 6, and 7.
fn full_auc_sigma01() -> f64 {
    static CACHE: OnceLock<f64> = OnceLock::new();
    *CACHE.get_or_init(|| study_auc(0.1, 50.0, 20.0, FitMode::Full))
}

#[test]
fn criterion_5_simulation_study_auc() {
    let auc_01 = full_auc_sigma01();
    let auc_02 = study_auc(0.2, 50.0, 20.0, FitMode::Full);
    let auc_03 = study_auc(0.3, 50.0, 20.0, FitMode::Full);
    let pass = auc_01 >= 0.88;
    report(
        "5 (simulation study, full model)",
        pass,
        &format!(
            "average-ROC AUC over {STUDY_REPS} reps: sigma 0.1 -> {auc_01:.4} (gate >= 0.88), 0.2 -> {auc_02:.4}, 0.3 -> {auc_03:.4}"
        ),
    );
    assert!(pass, "AUC at sigma=0.1 was {auc_01:.4}, below 0.88");
}

#[test]
fn criterion_6_ablations() {
    let full = full_auc_sigma01();
    let rho_zero = study_auc(0.1, 50.0, 20.0, FitMode::PerTimeDecoupled);
    let weak = study_auc(0.1, 0.01, 20.0, FitMode::Full);
    let rho_pass = (rho_zero - 0.50).abs() <= 0.05;
    let weak_pass = weak <= full - 0.2;
    report(
        "6 (ablations)",
        rho_pass && weak_pass,
        &format!(
            "rho=0 (per-time decoupled) AUC = {rho_zero:.4} (gate 0.50 +- 0.05: {rho_pass}), \
             lambda=0.01 AUC = {weak:.4} vs full {full:.4} (gate <= full - 0.2: {weak_pass})"
        ),
    );
    assert!(
        weak_pass,
        "lambda=0.01 AUC {weak:.4} not at least 0.2 below full {full:.4}"
    );
    // Known-red clause: the data's within-type correlation (0.5 by the 1/p'
    // coupling rule) keeps per-time fits informative at these simulation
    // parameters, so the 0.50 +- 0.05 gate cannot be met by a faithful
    // decoupled ablation. Asserted as specified.
    assert!(
        rho_pass,
        "rho=0 ablation AUC {rho_zero:.4} outside 0.50 +- 0.05 (see decisions ledger)"
    );
}

#[test]
fn criterion_7_dropout() {
    // zero fraction across the sigma family
    let mut fracs = Vec::new();
    for (i, sigma) in [0.1, 0.2, 0.3].iter().enumerate() {
        let mut acc = 0.0;
        let reps = 10u64;
        for rep in 0..reps {
            let spec = SimulationSpec {
                noise_sd: *sigma,
                seed: 5_000 + rep,
                ..SimulationSpec::default()
            };
            let mut rng = RngStream::new(5_000 + rep, 20_000 + i as u64);
            let (ds, _) = simulate_dataset(&spec, &mut rng).unwrap();
            let dropped = apply_dropout(&ds, 2.0, &mut rng).unwrap();
            let zeros = dropped.values().iter().filter(|&&v| v == 0.0).count();
            acc += zeros as f64 / dropped.values().len() as f64;
        }
        fracs.push(acc / reps as f64);
    }
    let family_mean = fracs.iter().sum::<f64>() / fracs.len() as f64;
    let frac_pass = (family_mean - 0.66).abs() <= 0.05;

    // AUC under dropout
    let full = full_auc_sigma01();
    let dropped_auc = study_auc(0.1, 50.0, 20.0, FitMode::Dropout(2.0));
    let auc_pass = (full - dropped_auc).abs() <= 0.15;

    report(
        "7 (dropout)",
        frac_pass && auc_pass,
        &format!(
            "zero fractions per sigma = {fracs:.4?}, family mean = {family_mean:.4} (gate 0.66 +- 0.05: {frac_pass}); \
             dropout AUC at sigma 0.1 = {dropped_auc:.4} vs full {full:.4} (gate |diff| <= 0.15: {auc_pass})"
        ),
    );
    assert!(
        frac_pass,
        "zero-fraction family mean {family_mean:.4} outside 0.66 +- 0.05"
    );
    // Known-red clause at sigma = 0.1 (dropout rate 0.73 there, harsher than
    // the paper's reported 66% regime; the decrease is within 0.15 at the
    // sigma levels whose dropout rate matches the paper — see ledger).
    assert!(
        auc_pass,
        "dropout AUC {dropped_auc:.4} more than 0.15 below full {full:.4} (see decisions ledger)"
    );
}

// ---------------------------------------------------------------------------
// criterion 8: screening budget
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_screening_budget() {
    let budget_ok = auto_budget(1557) == 212;

    // HOLP at N = 1557 with auto budget returns 212 ranked predictors
    let (n, p, t_len) = (1557usize, 220usize, 3usize);
    let mut rng = RngStream::new(330, 0);
    let values = Array2::from_shape_fn((n, p), |_| StandardNormal.sample(&mut rng));
    let labels: Vec<i64> = (0..n).map(|i| (i % t_len + 1) as i64).collect();
    let names = (0..p).map(|i| format!("n{i:04}")).collect();
    let ds = PseudoTimeDataset::new(values, labels, names).unwrap();
    let picked = holp_screen(&ds, 0, ScreenBudget::Auto).unwrap();
    let holp_ok = picked.len() == 212 && !picked.contains(&0);

    let pass = budget_ok && holp_ok;
    report(
        "8 (screening auto budget)",
        pass,
        &format!(
            "auto_budget(1557) = {} (expect 212), HOLP returned {} predictors",
            auto_budget(1557),
            picked.len()
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// criterion 10: pipeline smoke + diagnostics uniformity
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_pipeline_smoke_and_diagnostics_uniformity() {
    // end-to-end: simulate -> standardize -> screen -> fit -> summarize ->
    // assemble -> export -> score
    let spec = SimulationSpec {
        seed: 42,
        ..SimulationSpec::default()
    };
    let mut rng = RngStream::new(42, 10_000);
    let (ds, gt) = simulate_dataset(&spec, &mut rng).unwrap();
    let ds = ds.standardize().unwrap();
    let hp = ModelHyperparams::new(50.0, 20.0).unwrap();
    let cfg = SamplerConfig::new(STUDY_ITER, STUDY_BURN, 1, 42).unwrap();
    let p = ds.n_nodes();
    let mut summaries = Vec::with_capacity(p);
    let mut all_draws = Vec::with_capacity(p);
    for target in 0..p {
        let screened = holp_screen(&ds, target, ScreenBudget::Fixed(20)).unwrap();
        let draws = gibbs_fit(&ds, target, &screened, &hp, &cfg).unwrap();
        summaries.push(summarize(&draws).unwrap());
        all_draws.push(draws);
    }
    let net = assemble_network(&summaries, 0.05).unwrap();
    let dir = std::env::temp_dir().join(format!("tvnet-acc10-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let edges_path = dir.join("edges.csv");
    export_edges(&net, &edges_path).unwrap();
    let reimported = import_edges(&edges_path).unwrap();
    let roundtrip_ok = reimported.edge_count() == net.edge_count();
    let curve = roc_curve(&gt, &summaries).unwrap();
    let smoke_auc = auc(&curve).unwrap();
    let smoke_ok = smoke_auc.is_finite() && smoke_auc > 0.7 && roundtrip_ok;

    // chain diagnostics behave on real sampler output: a healthy share of
    // coefficient chains passes both tests
    let mut gp = Vec::new();
    let mut heidel_ok = 0usize;
    let mut heidel_total = 0usize;
    for draws in all_draws.iter().take(6) {
        for j in 0..draws.predictor_names.len().min(4) {
            let chain: Vec<f64> = draws.draws.iter().map(|s| s.b[(0, j)]).collect();
            if let Ok(g) = geweke_test(&chain) {
                gp.push(g.p);
            }
            if let Ok(h) = heidelberger_test(&chain) {
                heidel_total += 1;
                heidel_ok += h.stationary as usize;
            }
        }
    }
    let geweke_healthy = gp.iter().filter(|&&p| p > 0.01).count() as f64 / gp.len() as f64;
    let heidel_healthy = heidel_ok as f64 / heidel_total as f64;

    // Monte Carlo uniformity of the diagnostics' p-values on iid chains
    let mut rng = RngStream::new(331, 0);
    let mut geweke_ps = Vec::new();
    let mut heidel_ps = Vec::new();
    for _ in 0..200 {
        let chain: Vec<f64> = (0..4_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        geweke_ps.push(geweke_test(&chain).unwrap().p);
        heidel_ps.push(heidelberger_test(&chain).unwrap().stationarity_p);
    }
    let g_uniform = ks_test_uniform(&geweke_ps);
    let h_uniform = ks_test_uniform(&heidel_ps);
    let uniform_ok = g_uniform.p_value > 0.01 && h_uniform.p_value > 0.01;

    let pass = smoke_ok && uniform_ok && geweke_healthy > 0.9 && heidel_healthy > 0.9;
    report(
        "10 (pipeline smoke + diagnostics uniformity)",
        pass,
        &format!(
            "smoke AUC = {smoke_auc:.4}, {} edges exported/reimported, \
             sampler chains passing Geweke: {:.0}%, stationary: {:.0}%, \
             uniformity KS p (Geweke {:.3}, Heidelberger {:.3})",
            net.edge_count(),
            100.0 * geweke_healthy,
            100.0 * heidel_healthy,
            g_uniform.p_value,
            h_uniform.p_value
        ),
    );
    std::fs::remove_dir_all(&dir).ok();
    assert!(pass);
}
