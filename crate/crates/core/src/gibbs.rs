//! Per-target-node Gibbs sampler.
//!
//! One sweep updates, in order: the intercept `a`, the noise precision
//! `tau`, and then for every predictor `j` the mixture scale `nu_j`, the
//! copula correlation `rho_j` (one slice-sampler transition), and the whole
//! coefficient trajectory `b_{:,j}` as a block draw from a multivariate
//! normal whose precision `nu_j Sigma_j^{-1} + V_j^{-1}` stays tridiagonal,
//! so every step runs in O(T) after the per-time sufficient statistics.
//!
//! The conditionals:
//!   a    ~ N(mu_a, sigma_a^2),   sigma_a^{-2} = 1 + n tau,
//!                                mu_a = sigma_a^2 tau sum(y - b x)
//!   tau  ~ Gamma(1 + n/2, 1 / (1 + RSS/2))      (scale parameterization)
//!   nu_j ~ InverseGaussian(lambda / sqrt(b' S^{-1} b), lambda^2)
//!   rho_j ~ slice target  exp(k rho) |S|^{-1/2} exp(-nu_j b' S^{-1} b / 2)
//!   b_j  ~ N with precision nu_j S^{-1} + diag(tau sum_k x_{t,j,k}^2) and
//!          natural parameter tau sum_k x_{t,j,k} (partial residual)
//! with per-time inner sums over samples k only, and S = Sigma(rho_j).

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::Array2;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::data::PseudoTimeDataset;
use crate::error::{Error, Result};
use crate::prior::{build_precision, covariance_log_det, CopulaCorrelation};
use crate::stats::inverse_gaussian::sample_inverse_gaussian;
use crate::stats::rng::RngStream;
use crate::stats::slice::slice_sample_bounded;
use crate::stats::tridiag::{sample_normal_tridiag_precision, TridiagonalMatrix};

/// Upper truncation of the correlation support, keeping |Sigma| finite.
pub const RHO_MAX: f64 = 1.0 - 1e-6;

/// Quadratic-form threshold below which the nu draw falls back to the
/// Levy(lambda^2) limit.
const NU_LEVY_THRESHOLD: f64 = 1e-12;

/// Sweeps between residual-cache rebuilds.
const RESID_REFRESH: usize = 512;

/// Sparsity rate lambda and correlation-prior rate k.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelHyperparams {
    pub lambda: f64,
    pub k: f64,
}

impl ModelHyperparams {
    pub fn new(lambda: f64, k: f64) -> Result<Self> {
        if !(lambda > 0.0) || !(k > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "hyperparameters must be positive, got lambda={lambda}, k={k}"
            )));
        }
        Ok(Self { lambda, k })
    }
}

/// Chain-length settings. `rho_fixed` pins every correlation (used by the
/// rho = 0 ablation); production runs leave it `None`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub rho_fixed: Option<f64>,
}

impl SamplerConfig {
    pub fn new(iterations: usize, burn_in: usize, thin: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            iterations,
            burn_in,
            thin,
            seed,
            rho_fixed: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_rho_fixed(mut self, rho: f64) -> Self {
        self.rho_fixed = Some(rho);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burn_in {
            return Err(Error::InvalidParameter(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidParameter(
                "thinning interval must be >= 1".into(),
            ));
        }
        if let Some(r) = self.rho_fixed {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidParameter(format!(
                    "fixed rho must lie in [0,1), got {r}"
                )));
            }
        }
        Ok(())
    }

    /// Number of retained draws.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// One Gibbs state for one target node.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub a: f64,
    pub tau: f64,
    /// T x m coefficient matrix, column j is predictor j's trajectory.
    pub b: Array2<f64>,
    pub rho: Vec<f64>,
    pub nu: Vec<f64>,
}

impl ChainState {
    /// Initial state: a = 0, tau = 1, B = 0, rho = 0.5, nu = lambda^2.
    pub fn initial(t_len: usize, m: usize, hp: &ModelHyperparams, rho_fixed: Option<f64>) -> Self {
        Self {
            a: 0.0,
            tau: 1.0,
            b: Array2::zeros((t_len, m)),
            rho: vec![rho_fixed.unwrap_or(0.5); m],
            nu: vec![hp.lambda * hp.lambda; m],
        }
    }

    pub fn t_len(&self) -> usize {
        self.b.nrows()
    }

    pub fn n_predictors(&self) -> usize {
        self.b.ncols()
    }

    fn is_finite(&self) -> bool {
        self.a.is_finite()
            && self.tau.is_finite()
            && self.b.iter().all(|v| v.is_finite())
            && self.rho.iter().all(|v| v.is_finite())
            && self.nu.iter().all(|v| v.is_finite())
    }
}

/// Per-time view of one target's response and predictor blocks, with the
/// sufficient statistics the sweeps reuse.
#[derive(Clone, Debug)]
pub struct TargetView {
    t_len: usize,
    m: usize,
    n_total: usize,
    /// Response block per time group.
    y: Vec<Vec<f64>>,
    /// Predictor blocks per time group, column-major: x[t][j * n_t + k].
    x: Vec<Vec<f64>>,
    /// sum_k x_{t,j,k}^2 per time group and predictor.
    sumsq: Vec<Vec<f64>>,
}

impl TargetView {
    pub fn new(ds: &PseudoTimeDataset, target: usize, predictors: &[usize]) -> Result<Self> {
        let p = ds.n_nodes();
        if target >= p {
            return Err(Error::InvalidParameter(format!(
                "target index {target} out of range for {p} nodes"
            )));
        }
        let mut seen = vec![false; p];
        for &j in predictors {
            if j >= p {
                return Err(Error::InvalidParameter(format!(
                    "predictor index {j} out of range for {p} nodes"
                )));
            }
            if j == target {
                return Err(Error::InvalidParameter(
                    "predictors must exclude the target node".into(),
                ));
            }
            if seen[j] {
                return Err(Error::InvalidParameter(format!(
                    "duplicate predictor index {j}"
                )));
            }
            seen[j] = true;
        }
        let t_len = ds.n_times();
        let m = predictors.len();
        let values = ds.values();
        let mut y = Vec::with_capacity(t_len);
        let mut x = Vec::with_capacity(t_len);
        let mut sumsq = Vec::with_capacity(t_len);
        for t in 1..=t_len {
            let rows = ds.rows_at(t);
            let n_t = rows.len();
            let mut yt = Vec::with_capacity(n_t);
            for &row in rows {
                yt.push(values[(row, target)]);
            }
            let mut xt = vec![0.0; m * n_t];
            let mut st = vec![0.0; m];
            for (jj, &col) in predictors.iter().enumerate() {
                let base = jj * n_t;
                let mut s = 0.0;
                for (k, &row) in rows.iter().enumerate() {
                    let v = values[(row, col)];
                    xt[base + k] = v;
                    s += v * v;
                }
                st[jj] = s;
            }
            y.push(yt);
            x.push(xt);
            sumsq.push(st);
        }
        let n_total = y.iter().map(Vec::len).sum();
        Ok(Self {
            t_len,
            m,
            n_total,
            y,
            x,
            sumsq,
        })
    }

    /// A view with no observations: every conditional reduces to its prior.
    pub fn empty(t_len: usize, m: usize) -> Self {
        Self {
            t_len,
            m,
            n_total: 0,
            y: vec![Vec::new(); t_len],
            x: vec![Vec::new(); t_len],
            sumsq: vec![vec![0.0; m]; t_len],
        }
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn n_predictors(&self) -> usize {
        self.m
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn group_size(&self, t: usize) -> usize {
        self.y[t - 1].len()
    }

    fn x_col(&self, t_idx: usize, j: usize) -> &[f64] {
        let n_t = self.y[t_idx].len();
        &self.x[t_idx][j * n_t..(j + 1) * n_t]
    }

    /// Residuals y - a - B x per time group under `state`.
    pub fn residuals(&self, state: &ChainState) -> Vec<Vec<f64>> {
        let mut resid = Vec::with_capacity(self.t_len);
        for t_idx in 0..self.t_len {
            let n_t = self.y[t_idx].len();
            let mut rt = Vec::with_capacity(n_t);
            for k in 0..n_t {
                rt.push(self.y[t_idx][k] - state.a);
            }
            for j in 0..self.m {
                let b = state.b[(t_idx, j)];
                if b == 0.0 {
                    continue;
                }
                let col = self.x_col(t_idx, j);
                for (k, r) in rt.iter_mut().enumerate() {
                    *r -= b * col[k];
                }
            }
            resid.push(rt);
        }
        resid
    }
}

/// Log of the model likelihood of the target block given `state`.
pub fn log_likelihood(view: &TargetView, state: &ChainState) -> f64 {
    let resid = view.residuals(state);
    let n = view.n_total() as f64;
    let rss: f64 = resid.iter().flatten().map(|r| r * r).sum();
    0.5 * n * (state.tau / (2.0 * std::f64::consts::PI)).ln() - 0.5 * state.tau * rss
}

// -- conditional parameter helpers shared by the free steps and the chain --

fn intercept_params(resid_sum_no_a: f64, n: f64, tau: f64) -> (f64, f64) {
    let var = 1.0 / (1.0 + n * tau);
    (var * tau * resid_sum_no_a, var)
}

fn noise_params(rss: f64, n: f64) -> (f64, f64) {
    (1.0 + 0.5 * n, 1.0 / (1.0 + 0.5 * rss))
}

fn draw_nu_given_q(q: f64, lambda: f64, rng: &mut RngStream) -> f64 {
    if q < NU_LEVY_THRESHOLD {
        // Levy(lambda^2) limit: lambda^2 / z^2 for standard normal z
        loop {
            let z: f64 = StandardNormal.sample(rng);
            if z * z > 1e-280 {
                return lambda * lambda / (z * z);
            }
        }
    } else {
        let mu = lambda / q.sqrt();
        sample_inverse_gaussian(mu, lambda * lambda, rng)
            .expect("positive IG parameters by construction")
    }
}

fn rho_log_target(b_col: &[f64], nu: f64, k: f64, t_len: usize) -> impl Fn(f64) -> f64 + '_ {
    move |rho: f64| {
        let c = CopulaCorrelation::new(rho, t_len).expect("rho within support");
        let q = build_precision(&c).quadratic_form(b_col);
        k * rho - 0.5 * covariance_log_det(&c) - 0.5 * nu * q
    }
}

struct BetaColumnStats {
    /// tau * sum_k x_{t,j,k} * (y - a - b_{t,\j} x_{\j}), per time.
    shift: Vec<f64>,
    /// tau * sum_k x_{t,j,k}^2, per time (V^{-1} diagonal).
    lik_precision: Vec<f64>,
}

fn beta_precision_and_shift(
    stats: &BetaColumnStats,
    nu: f64,
    rho: f64,
    t_len: usize,
) -> (TridiagonalMatrix, Vec<f64>) {
    let c = CopulaCorrelation::new(rho, t_len).expect("rho within support");
    let prior = build_precision(&c);
    let mut main: Vec<f64> = prior.main().iter().map(|v| nu * v).collect();
    for (t, m) in main.iter_mut().enumerate() {
        *m += stats.lik_precision[t];
    }
    let off: Vec<f64> = prior.off().iter().map(|v| nu * v).collect();
    let precision = TridiagonalMatrix::new(main, off).expect("dimensions consistent");
    (precision, stats.shift.clone())
}

// ------------------------------ free steps ------------------------------

/// Draws the intercept from its exact conditional.
pub fn step_intercept(state: &ChainState, view: &TargetView, rng: &mut RngStream) -> f64 {
    let resid = view.residuals(state);
    let resid_sum_no_a: f64 = resid.iter().flatten().map(|r| r + state.a).sum();
    let (mean, var) = intercept_params(resid_sum_no_a, view.n_total() as f64, state.tau);
    let z: f64 = StandardNormal.sample(rng);
    mean + var.sqrt() * z
}

/// Draws the noise precision from its exact gamma conditional.
pub fn step_noise_precision(state: &ChainState, view: &TargetView, rng: &mut RngStream) -> f64 {
    let resid = view.residuals(state);
    let rss: f64 = resid.iter().flatten().map(|r| r * r).sum();
    let (shape, scale) = noise_params(rss, view.n_total() as f64);
    Gamma::new(shape, scale)
        .expect("valid gamma parameters")
        .sample(rng)
}

/// Draws the mixture scale `nu_j` from its inverse-Gaussian conditional.
pub fn step_nu(state: &ChainState, j: usize, hp: &ModelHyperparams, rng: &mut RngStream) -> f64 {
    let t_len = state.t_len();
    let b_col: Vec<f64> = (0..t_len).map(|t| state.b[(t, j)]).collect();
    let c = CopulaCorrelation::new(state.rho[j], t_len).expect("rho within support");
    let q = build_precision(&c).quadratic_form(&b_col);
    draw_nu_given_q(q, hp.lambda, rng)
}

/// One slice-sampler transition for `rho_j` on [0, RHO_MAX].
pub fn step_rho(
    state: &ChainState,
    j: usize,
    hp: &ModelHyperparams,
    rng: &mut RngStream,
) -> Result<f64> {
    let t_len = state.t_len();
    let b_col: Vec<f64> = (0..t_len).map(|t| state.b[(t, j)]).collect();
    let target = rho_log_target(&b_col, state.nu[j], hp.k, t_len);
    slice_sample_bounded(target, 0.0, RHO_MAX, state.rho[j].min(RHO_MAX - 1e-12), rng)
}

/// Block draw of predictor `j`'s full trajectory.
pub fn step_beta_column(
    state: &ChainState,
    j: usize,
    view: &TargetView,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let t_len = view.t_len();
    let resid = view.residuals(state);
    let mut stats = BetaColumnStats {
        shift: vec![0.0; t_len],
        lik_precision: vec![0.0; t_len],
    };
    for t_idx in 0..t_len {
        let col = view.x_col(t_idx, j);
        let b_old = state.b[(t_idx, j)];
        let mut sxr = 0.0;
        for (k, r) in resid[t_idx].iter().enumerate() {
            // partial residual: add predictor j's own contribution back
            sxr += col[k] * (r + b_old * col[k]);
        }
        stats.shift[t_idx] = state.tau * sxr;
        stats.lik_precision[t_idx] = state.tau * view.sumsq[t_idx][j];
    }
    let (precision, shift) = beta_precision_and_shift(&stats, state.nu[j], state.rho[j], t_len);
    sample_normal_tridiag_precision(&precision, &shift, rng)
}

// ------------------------------- the chain -------------------------------

/// A running chain owning its state, residual cache, and random stream.
pub struct GibbsChain<'a> {
    view: &'a TargetView,
    hp: ModelHyperparams,
    rho_fixed: Option<f64>,
    state: ChainState,
    resid: Vec<Vec<f64>>,
    rng: RngStream,
    sweeps_done: usize,
}

impl<'a> GibbsChain<'a> {
    pub fn new(
        view: &'a TargetView,
        hp: ModelHyperparams,
        rho_fixed: Option<f64>,
        rng: RngStream,
    ) -> Self {
        let state = ChainState::initial(view.t_len(), view.n_predictors(), &hp, rho_fixed);
        let resid = view.residuals(&state);
        Self {
            view,
            hp,
            rho_fixed,
            state,
            resid,
            rng,
            sweeps_done: 0,
        }
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn set_state(&mut self, state: ChainState) {
        self.resid = self.view.residuals(&state);
        self.state = state;
    }

    /// One full sweep: a, tau, then (nu_j, rho_j, b_j) per predictor.
    pub fn sweep(&mut self) -> Result<()> {
        let n = self.view.n_total() as f64;
        let t_len = self.view.t_len();

        let resid_sum: f64 = self.resid.iter().flatten().sum();
        let (mean, var) = intercept_params(resid_sum + n * self.state.a, n, self.state.tau);
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let a_new = mean + var.sqrt() * z;
        let delta = self.state.a - a_new;
        self.resid.iter_mut().flatten().for_each(|r| *r += delta);
        self.state.a = a_new;

        let rss: f64 = self.resid.iter().flatten().map(|r| r * r).sum();
        let (shape, scale) = noise_params(rss, n);
        self.state.tau = Gamma::new(shape, scale)
            .expect("valid gamma parameters")
            .sample(&mut self.rng);

        let mut b_col = vec![0.0; t_len];
        for j in 0..self.view.n_predictors() {
            for (t_idx, b) in b_col.iter_mut().enumerate() {
                *b = self.state.b[(t_idx, j)];
            }
            let c = CopulaCorrelation::new(self.state.rho[j], t_len).expect("rho in support");
            let q = build_precision(&c).quadratic_form(&b_col);
            self.state.nu[j] = draw_nu_given_q(q, self.hp.lambda, &mut self.rng);

            if self.rho_fixed.is_none() {
                let target = rho_log_target(&b_col, self.state.nu[j], self.hp.k, t_len);
                self.state.rho[j] = slice_sample_bounded(
                    target,
                    0.0,
                    RHO_MAX,
                    self.state.rho[j].min(RHO_MAX - 1e-12),
                    &mut self.rng,
                )?;
            }

            let mut stats = BetaColumnStats {
                shift: vec![0.0; t_len],
                lik_precision: vec![0.0; t_len],
            };
            for t_idx in 0..t_len {
                let col = self.view.x_col(t_idx, j);
                let rt = &self.resid[t_idx];
                let mut sxr = 0.0;
                for (k, r) in rt.iter().enumerate() {
                    sxr += col[k] * r;
                }
                sxr += b_col[t_idx] * self.view.sumsq[t_idx][j];
                stats.shift[t_idx] = self.state.tau * sxr;
                stats.lik_precision[t_idx] = self.state.tau * self.view.sumsq[t_idx][j];
            }
            let (precision, shift) =
                beta_precision_and_shift(&stats, self.state.nu[j], self.state.rho[j], t_len);
            let b_new = sample_normal_tridiag_precision(&precision, &shift, &mut self.rng)?;
            for t_idx in 0..t_len {
                let db = b_col[t_idx] - b_new[t_idx];
                if db != 0.0 {
                    let col = self.view.x_col(t_idx, j);
                    for (k, r) in self.resid[t_idx].iter_mut().enumerate() {
                        *r += db * col[k];
                    }
                }
                self.state.b[(t_idx, j)] = b_new[t_idx];
            }
        }

        self.sweeps_done += 1;
        if self.sweeps_done % RESID_REFRESH == 0 {
            self.resid = self.view.residuals(&self.state);
        }
        Ok(())
    }
}

// ------------------------------- full fits -------------------------------

/// Thinned post-burn-in history of one target node's chain.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorDraws {
    pub target: usize,
    pub target_name: String,
    pub predictors: Vec<usize>,
    pub predictor_names: Vec<String>,
    pub hyperparams: ModelHyperparams,
    pub config: SamplerConfig,
    pub t_len: usize,
    pub draws: Vec<ChainState>,
}

/// Runs the full Gibbs sampler for one target node. The random stream id is
/// `seed ^ target`, so per-target runs are reproducible independently of
/// scheduling.
pub fn gibbs_fit(
    ds: &PseudoTimeDataset,
    target: usize,
    predictors: &[usize],
    hp: &ModelHyperparams,
    cfg: &SamplerConfig,
) -> Result<PosteriorDraws> {
    cfg.validate()?;
    let view = TargetView::new(ds, target, predictors)?;
    let rng = RngStream::new(cfg.seed, cfg.seed ^ target as u64);
    let mut chain = GibbsChain::new(&view, *hp, cfg.rho_fixed, rng);
    let mut draws = Vec::with_capacity(cfg.retained());
    for sweep in 1..=cfg.iterations {
        chain.sweep().map_err(|e| Error::DivergedChain {
            sweep,
            detail: e.to_string(),
        })?;
        if sweep > cfg.burn_in && (sweep - cfg.burn_in) % cfg.thin == 0 {
            if !chain.state().is_finite() {
                return Err(Error::DivergedChain {
                    sweep,
                    detail: "non-finite chain state".into(),
                });
            }
            draws.push(chain.state().clone());
        }
    }
    Ok(PosteriorDraws {
        target,
        target_name: ds.node_names()[target].clone(),
        predictors: predictors.to_vec(),
        predictor_names: predictors
            .iter()
            .map(|&j| ds.node_names()[j].clone())
            .collect(),
        hyperparams: *hp,
        config: *cfg,
        t_len: ds.n_times(),
        draws,
    })
}

/// Fits every time group independently as its own single-time model (the
/// sampler specialized to T = 1 per slice, which is the plain Bayesian
/// lasso). This is the "no sparsity across time" ablation: with the copula
/// correlation pinned at zero the model decomposes into per-time fits, so
/// the decomposition is run literally. Slice chains use distinct derived
/// stream ids.
pub fn gibbs_fit_per_time(
    ds: &PseudoTimeDataset,
    target: usize,
    predictors: &[usize],
    hp: &ModelHyperparams,
    cfg: &SamplerConfig,
) -> Result<Vec<PosteriorDraws>> {
    let mut slices = Vec::with_capacity(ds.n_times());
    for t in 1..=ds.n_times() {
        let slice = ds.time_slice(t)?;
        let mut slice_cfg = *cfg;
        slice_cfg.seed = cfg
            .seed
            .wrapping_add((t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        slice_cfg.rho_fixed = Some(0.0);
        slices.push(gibbs_fit(&slice, target, predictors, hp, &slice_cfg)?);
    }
    Ok(slices)
}

// ------------------------------ persistence ------------------------------

const DRAWS_FORMAT: &str = "tvnet-draws/1";

/// Writes the draw file: versioned `#` header lines carrying the metadata,
/// then one CSV record per retained draw with columns
/// `draw,a,tau,rho.<pred>...,nu.<pred>...,b.t<t>.<pred>...`.
pub fn write_draws<P: AsRef<Path>>(draws: &PosteriorDraws, path: P) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path.as_ref())?);
    writeln!(out, "#{DRAWS_FORMAT}")?;
    writeln!(out, "#target={}", draws.target_name)?;
    writeln!(out, "#target_index={}", draws.target)?;
    writeln!(out, "#predictors={}", draws.predictor_names.join(","))?;
    writeln!(
        out,
        "#predictor_indices={}",
        draws
            .predictors
            .iter()
            .map(|j| j.to_string())
            .collect::<Vec<_>>()
            .join(",")
    )?;
    writeln!(
        out,
        "#lambda={} k={} t_len={} seed={} iterations={} burn_in={} thin={} rho_fixed={}",
        draws.hyperparams.lambda,
        draws.hyperparams.k,
        draws.t_len,
        draws.config.seed,
        draws.config.iterations,
        draws.config.burn_in,
        draws.config.thin,
        draws
            .config
            .rho_fixed
            .map_or("none".to_string(), |r| r.to_string()),
    )?;
    let mut header = vec!["draw".to_string(), "a".to_string(), "tau".to_string()];
    for name in &draws.predictor_names {
        header.push(format!("rho.{name}"));
    }
    for name in &draws.predictor_names {
        header.push(format!("nu.{name}"));
    }
    for t in 1..=draws.t_len {
        for name in &draws.predictor_names {
            header.push(format!("b.t{t}.{name}"));
        }
    }
    writeln!(out, "{}", header.join(","))?;
    for (idx, state) in draws.draws.iter().enumerate() {
        let mut fields = Vec::with_capacity(header.len());
        fields.push(idx.to_string());
        fields.push(format!("{}", state.a));
        fields.push(format!("{}", state.tau));
        for v in &state.rho {
            fields.push(format!("{v}"));
        }
        for v in &state.nu {
            fields.push(format!("{v}"));
        }
        for t in 0..draws.t_len {
            for j in 0..state.n_predictors() {
                fields.push(format!("{}", state.b[(t, j)]));
            }
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a draw file written by [`write_draws`].
pub fn read_draws<P: AsRef<Path>>(path: P) -> Result<PosteriorDraws> {
    let reader = BufReader::new(std::fs::File::open(path.as_ref())?);
    let mut lines = reader.lines();
    let version = lines
        .next()
        .ok_or_else(|| Error::Format("empty draws file".into()))??;
    if version != format!("#{DRAWS_FORMAT}") {
        return Err(Error::Format(format!(
            "unsupported draws format {version:?}, expected #{DRAWS_FORMAT}"
        )));
    }
    let mut target_name = String::new();
    let mut target = usize::MAX;
    let mut predictor_names: Vec<String> = Vec::new();
    let mut predictors: Vec<usize> = Vec::new();
    let mut params: Option<(ModelHyperparams, SamplerConfig, usize)> = None;
    let mut header_line = String::new();
    for line in lines.by_ref() {
        let line = line?;
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.strip_prefix("target=") {
                target_name = v.to_string();
            } else if let Some(v) = rest.strip_prefix("target_index=") {
                target = v
                    .parse()
                    .map_err(|_| Error::Format(format!("bad target index {v:?}")))?;
            } else if let Some(v) = rest.strip_prefix("predictors=") {
                predictor_names = v.split(',').map(str::to_owned).collect();
            } else if let Some(v) = rest.strip_prefix("predictor_indices=") {
                predictors = v
                    .split(',')
                    .map(|s| {
                        s.parse()
                            .map_err(|_| Error::Format(format!("bad predictor index {s:?}")))
                    })
                    .collect::<Result<_>>()?;
            } else if rest.starts_with("lambda=") {
                params = Some(parse_params_line(rest)?);
            }
        } else {
            header_line = line;
            break;
        }
    }
    let (hp, cfg, t_len) =
        params.ok_or_else(|| Error::Format("missing parameter header line".into()))?;
    if header_line.is_empty() {
        return Err(Error::Format("missing column header".into()));
    }
    let m = predictor_names.len();
    let expected_cols = 3 + 2 * m + t_len * m;
    let mut draws = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected_cols {
            return Err(Error::Format(format!(
                "draw row has {} fields, expected {expected_cols}",
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Format(format!("bad float {s:?} in draws file")))
        };
        let a = parse(fields[1])?;
        let tau = parse(fields[2])?;
        let mut pos = 3;
        let mut rho = Vec::with_capacity(m);
        for _ in 0..m {
            rho.push(parse(fields[pos])?);
            pos += 1;
        }
        let mut nu = Vec::with_capacity(m);
        for _ in 0..m {
            nu.push(parse(fields[pos])?);
            pos += 1;
        }
        let mut b = Array2::zeros((t_len, m));
        for t in 0..t_len {
            for j in 0..m {
                b[(t, j)] = parse(fields[pos])?;
                pos += 1;
            }
        }
        draws.push(ChainState { a, tau, b, rho, nu });
    }
    Ok(PosteriorDraws {
        target,
        target_name,
        predictors,
        predictor_names,
        hyperparams: hp,
        config: cfg,
        t_len,
        draws,
    })
}

fn parse_params_line(rest: &str) -> Result<(ModelHyperparams, SamplerConfig, usize)> {
    let mut lambda = None;
    let mut k = None;
    let mut t_len = None;
    let mut seed = None;
    let mut iterations = None;
    let mut burn_in = None;
    let mut thin = None;
    let mut rho_fixed = None;
    for pair in rest.split_whitespace() {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad parameter pair {pair:?}")))?;
        match key {
            "lambda" => lambda = Some(parse_f64(value)?),
            "k" => k = Some(parse_f64(value)?),
            "t_len" => t_len = Some(parse_usize(value)?),
            "seed" => {
                seed = Some(
                    value
                        .parse::<u64>()
                        .map_err(|_| Error::Format(format!("bad seed {value:?}")))?,
                )
            }
            "iterations" => iterations = Some(parse_usize(value)?),
            "burn_in" => burn_in = Some(parse_usize(value)?),
            "thin" => thin = Some(parse_usize(value)?),
            "rho_fixed" => {
                rho_fixed = if value == "none" {
                    Some(None)
                } else {
                    Some(Some(parse_f64(value)?))
                }
            }
            other => return Err(Error::Format(format!("unknown parameter key {other:?}"))),
        }
    }
    let missing = || Error::Format("incomplete parameter header".into());
    let hp = ModelHyperparams::new(lambda.ok_or_else(missing)?, k.ok_or_else(missing)?)?;
    let mut cfg = SamplerConfig::new(
        iterations.ok_or_else(missing)?,
        burn_in.ok_or_else(missing)?,
        thin.ok_or_else(missing)?,
        seed.ok_or_else(missing)?,
    )?;
    cfg.rho_fixed = rho_fixed.ok_or_else(missing)?;
    Ok((hp, cfg, t_len.ok_or_else(missing)?))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Format(format!("bad float {s:?}")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Format(format!("bad integer {s:?}")))
}
