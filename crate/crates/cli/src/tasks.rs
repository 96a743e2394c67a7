//! Task execution.

use std::sync::OnceLock;
use std::time::Instant;

use anyhow::{anyhow, bail};
use itertools::Itertools;
use nelson_core::nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use nelson_core::nelson::{solve_ground_state, CgOptions, GradientOptions, GroundStateResult, LanczosOptions, NelsonModel};
use nelson_core::recurrence::{expand_closed_form, solve_closed, solve_direct, RecurrenceProblem, UniformOps};
use nelson_core::verification::{
    check_bound_ratios, check_psi_derivatives, check_pull_through, check_resolvent_bounds, delta_grid, fingerprint,
    fit_sweep, sweep_point, IdentitySuite, Quantity, SweepConfig, SweepResult,
};
use nelson_core::wavefunctions::{Method, RouteOptions, WaveFunctionTable, WaveFunctions};

use crate::config::{ExperimentConfig, MethodName, TaskConfig, TruncationName};
use crate::output::{col, modes, num, Column, OutputWriter, Table};

/// Longest recurrence still checked against the closed form; the expansion has `Fib(n+1)` monomials.
pub const CLOSED_FORM_LIMIT: usize = 24;

/// Finite-difference steps of the derivative check.
pub const DERIVATIVE_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
pub const ORDER_TOLERANCE: f64 = 0.25;
pub const RESOLVENT_SCALED_MAX: f64 = 10.0;
pub const LAMBDA_EXPECTATION_MAX: f64 = 1e-8;
pub const RATIO_SPREAD_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Completed, nothing to check.
    Ok,
    Passed,
    Failed,
    Error,
    Skipped,
}

impl Status {
    pub fn is_failure(self) -> bool {
        matches!(self, Status::Failed | Status::Error)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub kind: &'static str,
    pub status: Status,
    pub summary: Vec<String>,
    pub outputs: Vec<String>,
    pub error: Option<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold }
    }
}

/// Model and ground state, built on first use and shared by the tasks.
pub struct Session<'c> {
    pub config: &'c ExperimentConfig,
    pub eig: LanczosOptions,
    pub cg: CgOptions,
    solved: OnceLock<(NelsonModel, GroundStateResult)>,
    hessian: bool,
}

impl<'c> Session<'c> {
    pub fn new(config: &'c ExperimentConfig) -> Self {
        let hessian = config.tasks.iter().any(|t| matches!(t, TaskConfig::GroundState { hessian: true }));
        Self {
            config,
            eig: LanczosOptions::default(),
            cg: CgOptions::default(),
            solved: OnceLock::new(),
            hessian,
        }
    }

    pub fn solved(&self) -> anyhow::Result<&(NelsonModel, GroundStateResult)> {
        if let Some(s) = self.solved.get() {
            return Ok(s);
        }
        let model = self.config.model()?;
        let grad = GradientOptions { hessian: self.hessian, ..Default::default() };
        let gs = solve_ground_state(&model, grad, self.eig)?;
        Ok(self.solved.get_or_init(|| (model, gs)))
    }
}

/// Output stem per task: the kind, suffixed by the index when a kind repeats.
pub fn stems(tasks: &[TaskConfig]) -> Vec<String> {
    let counts = tasks.iter().map(|t| t.name()).counts();
    tasks
        .iter()
        .enumerate()
        .map(|(i, t)| if counts[t.name()] > 1 { format!("{}_{i}", t.name()) } else { t.name().to_string() })
        .collect()
}

pub fn run_task(
    session: &Session,
    index: usize,
    stem: &str,
    task: &TaskConfig,
    out: &mut OutputWriter,
) -> TaskReport {
    let t0 = Instant::now();
    let before = out.written().len();
    let mut summary = Vec::new();
    let result = match task {
        TaskConfig::GroundState { .. } => ground_state(session, stem, out, &mut summary),
        TaskConfig::Wavefunctions { n, methods, truncation } => {
            wavefunctions(session, stem, n, methods, *truncation, out, &mut summary)
        }
        TaskConfig::Verify { vectors, seed, tolerance } => {
            verify(session, stem, *vectors, *seed, *tolerance, out, &mut summary)
        }
        TaskConfig::Sweep { lambdas, sigmas, n_max, shells_per_decade } => {
            let template = SweepConfig {
                template: session.config.params(),
                sigmas: sigmas.clone(),
                n_max: *n_max,
                shells_per_decade: *shells_per_decade,
                deltas: delta_grid(),
            };
            sweep(session, stem, &template, lambdas, out, &mut summary)
        }
        TaskConfig::RecurrenceDemo { n, a, b } => recurrence_task(stem, *n, *a, *b, out, &mut summary),
    };
    let (status, error) = match result {
        Ok(s) => (s, None),
        Err(e) => (Status::Error, Some(format!("{e:#}"))),
    };
    TaskReport {
        index,
        kind: task.name(),
        status,
        summary,
        outputs: out.written()[before..].iter().map(|p| p.display().to_string()).collect(),
        error,
        seconds: t0.elapsed().as_secs_f64(),
    }
}

const GROUND_COLUMNS: [Column; 10] = [
    col("p_x", "float", "total momentum, x"),
    col("p_y", "float", "total momentum, y"),
    col("p_z", "float", "total momentum, z"),
    col("energy", "float", "ground-state energy E(P)"),
    col("gap", "float", "distance to the next Ritz value"),
    col("residual", "float", "eigen-residual norm"),
    col("iterations", "int", "Lanczos iterations"),
    col("grad_x", "float", "dE/dP_x"),
    col("grad_y", "float", "dE/dP_y"),
    col("grad_z", "float", "dE/dP_z"),
];

const GRID_COLUMNS: [Column; 8] = [
    col("mode", "int", "mode index j"),
    col("k_x", "float", "momentum, x"),
    col("k_y", "float", "momentum, y"),
    col("k_z", "float", "momentum, z"),
    col("weight", "float", "quadrature weight w_j"),
    col("norm", "float", "|k_j|"),
    col("form_factor", "float", "v(k_j)"),
    col("coupling", "float", "sqrt(w_j) v(k_j)"),
];

const BASIS_COLUMNS: [Column; 4] = [
    col("photons", "int", "sector photon number"),
    col("offset", "int", "first basis index of the sector"),
    col("dim", "int", "sector dimension"),
    col("norm_squared", "float", "ground-state weight in the sector"),
];

fn ground_state(session: &Session, stem: &str, out: &mut OutputWriter, summary: &mut Vec<String>) -> anyhow::Result<Status> {
    let (model, gs) = session.solved()?;
    let mut t = Table::new(stem, &GROUND_COLUMNS);
    let mut row: Vec<String> = gs.p.iter().map(|&x| num(x)).collect();
    row.extend([num(gs.energy()), num(gs.state.gap), num(gs.state.residual), gs.state.iterations.to_string()]);
    row.extend(gs.grad_e.iter().map(|&x| num(x)));
    t.push(row);
    out.table(&t)?;
    if let Some(h) = gs.hess_e {
        let mut t = Table::new(
            format!("{stem}_hessian"),
            &[col("row", "int", "component a"), col("column", "int", "component b"), col("value", "float", "d2E/dP_a dP_b")],
        );
        for (a, r) in h.iter().enumerate() {
            for (b, v) in r.iter().enumerate() {
                t.push(vec![a.to_string(), b.to_string(), num(*v)]);
            }
        }
        out.table(&t)?;
    }
    let grid = model.grid();
    let mut t = Table::new("grid", &GRID_COLUMNS);
    for j in 0..grid.len() {
        let k = grid.k(j);
        t.push(vec![
            j.to_string(),
            num(k[0]),
            num(k[1]),
            num(k[2]),
            num(grid.w(j)),
            num(grid.norm(j)),
            num(model.form_factor()[j]),
            num(model.coupling(j)),
        ]);
    }
    out.table(&t)?;
    let basis = model.basis();
    let mut t = Table::new("basis", &BASIS_COLUMNS);
    for m in 0..=basis.n_max() {
        let r = basis.sector(m);
        let w: f64 = gs.psi().rows(r.start, r.len()).norm_squared();
        t.push(vec![m.to_string(), r.start.to_string(), r.len().to_string(), num(w)]);
    }
    out.table(&t)?;
    out.json(
        &format!("{stem}_metadata"),
        &serde_json::json!({
            "fingerprint": fingerprint(model),
            "modes": grid.len(),
            "n_max": basis.n_max(),
            "dim": basis.dim(),
            "quadratic": model.quadratic(),
            "energy": gs.energy(),
            "grad_e": gs.grad_e,
            "hess_e": gs.hess_e,
        }),
    )?;
    summary.push(format!("E = {:.12}, dim = {}, residual = {:.2e}", gs.energy(), basis.dim(), gs.state.residual));
    Ok(Status::Ok)
}

fn params_hash(model: &NelsonModel, truncation: TruncationName) -> String {
    let mut h = Sha256::new();
    h.update(fingerprint(model).as_bytes());
    h.update(format!(" truncation={truncation:?}").as_bytes());
    hex::encode(&h.finalize()[..8])
}

const WAVE_COLUMNS: [Column; 5] = [
    col("params_hash", "string", "first 8 bytes of sha256 over the model fingerprint and truncation, hex"),
    col("method", "string", "direct | froehlich | novel"),
    col("n", "int", "photon number"),
    col("modes", "string", "sorted mode indices joined by ';'"),
    col("value", "float", "f^n at the mode momenta"),
];

fn wavefunctions(
    session: &Session,
    stem: &str,
    ns: &[usize],
    methods: &[MethodName],
    truncation: TruncationName,
    out: &mut OutputWriter,
    summary: &mut Vec<String>,
) -> anyhow::Result<Status> {
    let (model, gs) = session.solved()?;
    let wf = WaveFunctions::new(model, gs, RouteOptions { truncation: truncation.into(), ..Default::default() });
    let jobs: Vec<(usize, Method)> = ns.iter().flat_map(|&n| methods.iter().map(move |&m| (n, m.into()))).collect();
    let tables: Vec<WaveFunctionTable> =
        jobs.par_iter().map(|&(n, m)| wf.table(m, n)).collect::<nelson_core::Result<_>>()?;
    let hash = params_hash(model, truncation);
    let mut t = Table::new(stem, &WAVE_COLUMNS);
    for tab in &tables {
        for e in &tab.entries {
            t.push(vec![hash.clone(), tab.method.name().into(), tab.n.to_string(), modes(&e.modes), num(e.value)]);
        }
    }
    out.table(&t)?;
    out.json(stem, &tables)?;
    for &n in ns {
        let Some(direct) = tables.iter().find(|t| t.n == n && t.method == Method::Direct) else { continue };
        for other in tables.iter().filter(|t| t.n == n && t.method != Method::Direct) {
            let worst = direct
                .entries
                .iter()
                .zip(&other.entries)
                .filter(|(d, _)| d.value.abs() > 1e-12)
                .map(|(d, o)| (o.value - d.value).abs() / d.value.abs())
                .fold(0.0, f64::max);
            summary.push(format!("n = {n}: max |{} - direct| / |direct| = {worst:.3e}", other.method.name()));
        }
    }
    Ok(Status::Ok)
}

const IDENTITY_COLUMNS: [Column; 7] = [
    col("id", "string", "identity name"),
    col("raw", "float", "max relative residual over all sectors"),
    col("projected", "float", "max relative residual on the sectors unaffected by truncation"),
    col("tolerance", "float", "pass threshold for `projected`"),
    col("pass", "bool", "projected <= tolerance"),
    col("fingerprint", "string", "model parameters"),
    col("anchor", "string", "the identity checked"),
];

const DERIVATIVE_COLUMNS: [Column; 5] = [
    col("step", "float", "finite-difference step h"),
    col("first_error", "float", "max_c ||FD_h d_c psi - R Lambda^c psi||"),
    col("second_error", "float", "max_{c,c'} ||FD_h d_c d_c' psi - analytic||"),
    col("first_order", "float", "log2 error ratio to the previous step; empty on the first row"),
    col("second_order", "float", "same for the second derivative"),
];

const RESOLVENT_COLUMNS: [Column; 4] = [
    col("modes", "string", "tuple k_1..k_n, mode indices joined by ';'"),
    col("i", "int", "prefix length"),
    col("norm", "float", "||R_{P;k_1..k_i}||"),
    col("scaled", "float", "||R_i|| (|k_1| + .. + |k_i|)"),
];

const RATIO_COLUMNS: [Column; 5] = [
    col("n", "int", "photon number"),
    col("beta", "int", "derivative order in k_1"),
    col("modes", "string", "tuple, mode indices joined by ';'"),
    col("value", "float", "|d^beta f^n|"),
    col("ratio", "float", "value over the bound shape with c = 1"),
];

const GROUP_COLUMNS: [Column; 5] = [
    col("n", "int", "photon number"),
    col("beta", "int", "derivative order"),
    col("min", "float", "smallest ratio"),
    col("max", "float", "largest ratio"),
    col("spread", "float", "max / min"),
];

/// Tuples of length `1..=max_n` over about four spread-out modes.
pub fn ratio_tuples(modes: usize, max_n: usize) -> Vec<Vec<usize>> {
    let pick: Vec<usize> = (0..modes).step_by((modes / 4).max(1)).collect();
    (1..=max_n).flat_map(|n| pick.iter().copied().combinations_with_replacement(n)).collect()
}

#[allow(clippy::too_many_arguments)]
fn verify(
    session: &Session,
    stem: &str,
    vectors: usize,
    seed: u64,
    tolerance: f64,
    out: &mut OutputWriter,
    summary: &mut Vec<String>,
) -> anyhow::Result<Status> {
    let (model, gs) = session.solved()?;
    let mut checks = Vec::new();

    let mut suite = IdentitySuite::default_for(model);
    suite.vectors = vectors;
    suite.seed = seed;
    suite.tolerance = tolerance;
    let reports = check_pull_through(model, gs, &suite)?;
    let mut t = Table::new(format!("{stem}_identities"), &IDENTITY_COLUMNS);
    for r in &reports {
        t.push(vec![
            r.id.clone(),
            num(r.raw),
            num(r.projected),
            num(r.tolerance),
            r.pass.to_string(),
            r.fingerprint.clone(),
            r.anchor.clone(),
        ]);
        checks.push(Check::at_most(&format!("identity {}", r.id), r.projected, r.tolerance));
    }
    out.table(&t)?;

    let comps: Vec<usize> = (0..3).collect();
    let d = check_psi_derivatives(model, gs, &comps, &DERIVATIVE_STEPS, session.eig, session.cg)?;
    let (o1, o2) = (d.first_orders(), d.second_orders());
    let mut t = Table::new(format!("{stem}_derivatives"), &DERIVATIVE_COLUMNS);
    for (i, &h) in d.steps.iter().enumerate() {
        let order = |o: &[f64]| if i == 0 { String::new() } else { num(o[i - 1]) };
        t.push(vec![num(h), num(d.first[i]), num(d.second[i]), order(&o1), order(&o2)]);
    }
    out.table(&t)?;
    for (which, o) in [("first", &o1), ("second", &o2)] {
        let worst = o.iter().map(|x| (x - 2.0).abs()).fold(0.0, f64::max);
        checks.push(Check::at_most(&format!("{which} derivative |order - 2|"), worst, ORDER_TOLERANCE));
    }

    let r = check_resolvent_bounds(model, gs, &suite.tuples, session.cg)?;
    let mut t = Table::new(format!("{stem}_resolvent_bounds"), &RESOLVENT_COLUMNS);
    for s in &r.samples {
        t.push(vec![modes(&s.modes), s.i.to_string(), num(s.norm), num(s.scaled)]);
    }
    out.table(&t)?;
    checks.push(Check::at_most("max ||R_i|| |k|_i", r.max_scaled, RESOLVENT_SCALED_MAX));
    let lam = r.lambda_expectation.iter().map(|x| x.abs()).fold(0.0, f64::max);
    checks.push(Check::at_most("|<psi, Lambda psi>|", lam, LAMBDA_EXPECTATION_MAX));

    let wf = WaveFunctions::new(model, gs, RouteOptions::default());
    let b = check_bound_ratios(&wf, &ratio_tuples(model.grid().len(), model.n_max().min(3)), 2)?;
    let mut t = Table::new(format!("{stem}_bound_ratios"), &RATIO_COLUMNS);
    for s in &b.samples {
        t.push(vec![s.n.to_string(), s.beta.to_string(), modes(&s.modes), num(s.value), num(s.ratio)]);
    }
    out.table(&t)?;
    let mut t = Table::new(format!("{stem}_bound_ratio_groups"), &GROUP_COLUMNS);
    for g in &b.groups {
        t.push(vec![g.n.to_string(), g.beta.to_string(), num(g.min), num(g.max), num(g.spread)]);
        checks.push(Check::at_most(&format!("ratio spread n={} beta={}", g.n, g.beta), g.spread, RATIO_SPREAD_MAX));
    }
    out.table(&t)?;

    out.json(
        &format!("{stem}_summary"),
        &serde_json::json!({
            "fingerprint": fingerprint(model),
            "checks": checks,
            "resolvent": { "min_scaled": r.min_scaled, "max_scaled": r.max_scaled,
                           "lambda_expectation": r.lambda_expectation, "q_lambda": r.q_lambda,
                           "r_lambda_psi": r.r_lambda_psi },
            "c_fit": b.c_fit,
        }),
    )?;
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
    summary.push(format!("{} checks, {} failed", checks.len(), failed.len()));
    for c in &failed {
        summary.push(format!("FAILED {}: {:.3e} > {:.3e}", c.name, c.value, c.threshold));
    }
    Ok(if failed.is_empty() { Status::Passed } else { Status::Failed })
}

const SWEEP_COLUMNS: [Column; 6] = [
    col("lambda", "float", "coupling"),
    col("sigma", "float", "infrared cutoff"),
    col("modes", "int", "grid size; 0 if the point failed"),
    col("quantity", "string", "measured norm"),
    col("value", "float", "norm value"),
    col("error", "string", "failure message, empty on success"),
];

const FIT_COLUMNS: [Column; 6] = [
    col("lambda", "float", "coupling"),
    col("quantity", "string", "measured norm"),
    col("delta", "float", "fitted exponent in norm ~ sigma^-delta"),
    col("residual", "float", "RMS residual of the log-log fit"),
    col("points", "int", "cutoffs used by the fit"),
    col("identically_zero", "bool", "every norm vanished"),
];

/// Runs all `(lambda, sigma)` points in parallel and fits per `lambda`.
pub fn run_sweep(template: &SweepConfig, lambdas: &[f64], eig: LanczosOptions, cg: CgOptions) -> Vec<SweepResult> {
    let configs: Vec<SweepConfig> = lambdas
        .iter()
        .map(|&l| SweepConfig { template: template.template.with_lambda(l), ..template.clone() })
        .collect();
    let jobs: Vec<(usize, f64)> = (0..lambdas.len()).flat_map(|i| template.sigmas.iter().map(move |&s| (i, s))).collect();
    let points: Vec<_> = jobs.par_iter().map(|&(i, s)| sweep_point(&configs[i], s, eig, cg)).collect();
    let mut points = points.into_iter();
    lambdas
        .iter()
        .map(|&l| fit_sweep(l, points.by_ref().take(template.sigmas.len()).collect()))
        .collect()
}

fn sweep(
    session: &Session,
    stem: &str,
    template: &SweepConfig,
    lambdas: &[f64],
    out: &mut OutputWriter,
    summary: &mut Vec<String>,
) -> anyhow::Result<Status> {
    let results = run_sweep(template, lambdas, session.eig, session.cg);
    let mut t = Table::new(stem, &SWEEP_COLUMNS);
    let mut f = Table::new(format!("{stem}_fits"), &FIT_COLUMNS);
    for r in &results {
        for p in &r.points {
            if let Some(e) = &p.error {
                t.push(vec![num(r.lambda), num(p.sigma), "0".into(), String::new(), String::new(), e.clone()]);
            }
            for (q, v) in &p.values {
                t.push(vec![num(r.lambda), num(p.sigma), p.modes.to_string(), q.name().into(), num(*v), String::new()]);
            }
        }
        for fit in &r.fits {
            f.push(vec![
                num(r.lambda),
                fit.quantity.name().into(),
                num(fit.delta),
                num(fit.residual),
                fit.points.to_string(),
                fit.identically_zero.to_string(),
            ]);
        }
    }
    out.table(&t)?;
    out.table(&f)?;
    out.json(stem, &results)?;
    let failed = results.iter().flat_map(|r| &r.points).filter(|p| p.error.is_some()).count();
    let mut order: Vec<(f64, f64)> = results
        .iter()
        .filter_map(|r| r.fit(Quantity::DPsi).map(|f| (r.lambda, f.delta)))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let listing = order.iter().map(|(l, d)| format!("lambda {l}: {d:.4}")).join(", ");
    summary.push(format!("delta_fit(||d_P psi||) {listing}"));
    if failed > 0 {
        summary.push(format!("{failed} sweep points failed"));
    }
    Ok(Status::Ok)
}

const RECURRENCE_COLUMNS: [Column; 5] = [
    col("n", "int", "index"),
    col("direct", "int", "x_n by iteration"),
    col("closed", "int", "x_n from the closed form; empty above the expansion limit"),
    col("monomials", "int", "terms of the closed-form expansion; empty above the limit"),
    col("agree", "bool", "direct == closed, true when not compared"),
];

/// `x_n = a x_{n-1} + b x_{n-2}`, `x_0 = 1`, both ways, in integers.
pub fn recurrence_table(name: &str, n: usize, a: i64, b: i64) -> anyhow::Result<Table> {
    // |x_n| is bounded by the recurrence with |a|, |b|
    let (mut p2, mut p1) = (1i128, a.unsigned_abs() as i128);
    for _ in 2..=n {
        let next = (a.unsigned_abs() as i128)
            .checked_mul(p1)
            .and_then(|x| x.checked_add((b.unsigned_abs() as i128).checked_mul(p2)?))
            .filter(|x| *x <= i64::MAX as i128)
            .ok_or_else(|| anyhow!("x_n overflows 64-bit integers before n = {n}"))?;
        (p2, p1) = (p1, next);
    }
    let prob = RecurrenceProblem::new(UniformOps::scalar(a, b), DVector::from_element(1, 1i64))?;
    let mut t = Table::new(name, &RECURRENCE_COLUMNS);
    for i in 0..=n {
        let direct = solve_direct(&prob, i)?[0];
        let (closed, count) = if (1..=CLOSED_FORM_LIMIT).contains(&i) {
            (Some(solve_closed(&prob, i)?[0]), Some(expand_closed_form(i).len()))
        } else if i == 0 {
            (Some(1), Some(1))
        } else {
            (None, None)
        };
        let s = |x: Option<i64>| x.map(|v| v.to_string()).unwrap_or_default();
        t.push(vec![
            i.to_string(),
            direct.to_string(),
            s(closed),
            count.map(|c| c.to_string()).unwrap_or_default(),
            closed.is_none_or(|c| c == direct).to_string(),
        ]);
    }
    Ok(t)
}

fn recurrence_task(stem: &str, n: usize, a: i64, b: i64, out: &mut OutputWriter, summary: &mut Vec<String>) -> anyhow::Result<Status> {
    let t = recurrence_table(stem, n, a, b)?;
    out.table(&t)?;
    let last = t.rows.last().ok_or_else(|| anyhow!("empty recurrence"))?;
    summary.push(format!("x_{n} = {}, monomials = {}", last[1], if last[3].is_empty() { "-" } else { &last[3] }));
    if t.rows.iter().any(|r| r[4] != "true") {
        bail!("closed form disagrees with the direct recurrence");
    }
    Ok(Status::Passed)
}
