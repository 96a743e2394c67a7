//! Infrared sweeps: norms as functions of the cutoff and fitted exponents.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::MomentumGrid;
use crate::nelson::{
    lambda_component, resolvent_solve, solve_ground_state, CgOptions, GradientOptions, GroundStateResult, LanczosOptions,
    NelsonModel, NelsonParams, ResolventSpec,
};
use crate::wavefunctions::{Method, RouteOptions, WaveFunctions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quantity {
    /// `||d_P psi|| = ||R Lambda psi||`.
    DPsi,
    /// `sup_Delta ||R(Delta) Lambda psi||`.
    SupRLambdaPsi,
    /// `sup_{Delta_1, Delta_2} ||R(Delta_1) Q^perp Lambda R(Delta_2) Lambda psi||`.
    SupRQLambdaRLambdaPsi,
    /// `||f^1||` from the direct route.
    F1Direct,
    /// `||f^1||` from the resolvent-product route.
    F1Froehlich,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::DPsi,
        Quantity::SupRLambdaPsi,
        Quantity::SupRQLambdaRLambdaPsi,
        Quantity::F1Direct,
        Quantity::F1Froehlich,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::DPsi => "dpsi",
            Quantity::SupRLambdaPsi => "sup_r_lambda_psi",
            Quantity::SupRQLambdaRLambdaPsi => "sup_r_q_lambda_r_lambda_psi",
            Quantity::F1Direct => "f1_direct",
            Quantity::F1Froehlich => "f1_froehlich",
        }
    }
}

/// `{0} u` 24 geometric points in `[1e-6, 1e2]`.
pub fn delta_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    let (lo, hi) = (1e-6f64.ln(), 1e2f64.ln());
    for i in 0..24 {
        g.push((lo + (hi - lo) * i as f64 / 23.0).exp());
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub template: NelsonParams,
    pub sigmas: Vec<f64>,
    pub n_max: usize,
    /// Shell count is `ceil(shells_per_decade * log10(kappa / sigma))`, at least 1.
    pub shells_per_decade: f64,
    pub deltas: Vec<f64>,
}

impl SweepConfig {
    /// Eight geometric cutoffs in `[0.005, 0.1]`, two to three shells, `N_max = 4`.
    pub fn desk(lambda: f64) -> Self {
        let (lo, hi) = (0.005f64.ln(), 0.1f64.ln());
        Self {
            template: NelsonParams::default().with_lambda(lambda),
            sigmas: (0..8).map(|i| (hi + (lo - hi) * i as f64 / 7.0).exp()).collect(),
            n_max: 4,
            shells_per_decade: 1.0,
            deltas: delta_grid(),
        }
    }

    pub fn shells_for(&self, sigma: f64) -> usize {
        ((self.shells_per_decade * (self.template.kappa / sigma).log10()).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sigma: f64,
    pub modes: usize,
    pub values: Vec<(Quantity, f64)>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub quantity: Quantity,
    /// `delta` in `norm ~ sigma^{-delta}`.
    pub delta: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub points: usize,
    /// Every norm vanished, so the quantity is constant (zero) in sigma.
    pub identically_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub lambda: f64,
    pub points: Vec<SweepPoint>,
    pub fits: Vec<ExponentFit>,
}

impl SweepResult {
    pub fn fit(&self, q: Quantity) -> Option<&ExponentFit> {
        self.fits.iter().find(|f| f.quantity == q)
    }
}

/// Norms below this are treated as exact zeros.
pub const ZERO_FLOOR: f64 = 1e-10;

fn reduced(model: &NelsonModel, gs: &GroundStateResult, delta: f64, x: &DVector<f64>, cg: CgOptions) -> Result<DVector<f64>> {
    resolvent_solve(model, gs, ResolventSpec::reduced(delta), x, cg)
}

/// All sweep quantities at one solved model.
pub fn measure(model: &NelsonModel, gs: &GroundStateResult, deltas: &[f64], cg: CgOptions) -> Result<Vec<(Quantity, f64)>> {
    let psi = gs.psi();
    let lam: Vec<DVector<f64>> = (0..3).map(|c| lambda_component(model, gs, c, [0.0; 3], psi)).collect();
    let mut sup1: f64 = 0.0;
    let mut sup2: f64 = 0.0;
    let mut dpsi = 0.0;
    for &d in deltas {
        let rl: Vec<DVector<f64>> = lam.iter().map(|l| reduced(model, gs, d, l, cg)).collect::<Result<_>>()?;
        let n1 = rl.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
        if d == 0.0 {
            dpsi = n1;
        }
        sup1 = sup1.max(n1);
        // R(Delta_1) is largest at Delta_1 = 0 on Q^perp, so only Delta_2 is scanned
        let mut n2 = 0.0;
        for v in &rl {
            for c in 0..3 {
                let y = lambda_component(model, gs, c, [0.0; 3], v);
                n2 += reduced(model, gs, 0.0, &y, cg)?.norm_squared();
            }
        }
        sup2 = sup2.max(n2.sqrt());
    }
    let wf = WaveFunctions::new(model, gs, RouteOptions { cg, ..Default::default() });
    let grid = model.grid();
    let mut fd = 0.0;
    let mut ff = 0.0;
    for j in 0..grid.len() {
        fd += grid.w(j) * wf.evaluate(Method::Direct, &[j])?.powi(2);
        ff += grid.w(j) * wf.evaluate(Method::Froehlich, &[j])?.powi(2);
    }
    Ok(vec![
        (Quantity::DPsi, dpsi),
        (Quantity::SupRLambdaPsi, sup1),
        (Quantity::SupRQLambdaRLambdaPsi, sup2),
        (Quantity::F1Direct, fd.sqrt()),
        (Quantity::F1Froehlich, ff.sqrt()),
    ])
}

/// Least squares `log y = a - delta log sigma` on the given points.
pub fn fit_exponent(quantity: Quantity, data: &[(f64, f64)]) -> ExponentFit {
    let points = data.len();
    if data.iter().all(|&(_, y)| y.abs() <= ZERO_FLOOR) {
        return ExponentFit { quantity, delta: 0.0, residual: 0.0, points, identically_zero: true };
    }
    if points < 2 {
        return ExponentFit { quantity, delta: f64::NAN, residual: f64::NAN, points, identically_zero: false };
    }
    let xs: Vec<f64> = data.iter().map(|&(s, _)| s.ln()).collect();
    let ys: Vec<f64> = data.iter().map(|&(_, y)| y.ln()).collect();
    let n = points as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let a = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - a - slope * x).powi(2)).sum();
    ExponentFit { quantity, delta: -slope, residual: (rss / n).sqrt(), points, identically_zero: false }
}

/// Solves and measures the model at one cutoff. Failures are recorded in the point.
pub fn sweep_point(config: &SweepConfig, sigma: f64, eig: LanczosOptions, cg: CgOptions) -> SweepPoint {
    let params = config.template.with_sigma(sigma);
    let run = || -> Result<(usize, Vec<(Quantity, f64)>)> {
        params.validate()?;
        let grid = MomentumGrid::shells(sigma, params.kappa, config.shells_for(sigma))?;
        let modes = grid.len();
        let model = NelsonModel::new(params, grid, config.n_max)?;
        let gs = solve_ground_state(&model, GradientOptions::default(), eig)?;
        Ok((modes, measure(&model, &gs, &config.deltas, cg)?))
    };
    match run() {
        Ok((modes, values)) => SweepPoint { sigma, modes, values, error: None },
        Err(e) => SweepPoint { sigma, modes: 0, values: vec![], error: Some(e.to_string()) },
    }
}

/// Fits exponents over the lower half of the cutoff range; failed points are skipped.
pub fn fit_sweep(lambda: f64, points: Vec<SweepPoint>) -> SweepResult {
    let mut ok: Vec<&SweepPoint> = points.iter().filter(|p| p.error.is_none()).collect();
    ok.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));
    let lower = &ok[..ok.len().div_ceil(2)];
    let fits = if ok.len() < 2 {
        vec![]
    } else {
        Quantity::ALL
            .iter()
            .map(|&q| {
                let data: Vec<(f64, f64)> = lower
                    .iter()
                    .filter_map(|p| p.values.iter().find(|(k, _)| *k == q).map(|&(_, v)| (p.sigma, v)))
                    .collect();
                fit_exponent(q, &data)
            })
            .collect()
    };
    SweepResult { lambda, points, fits }
}

/// One model per cutoff, then [`fit_sweep`].
pub fn sigma_sweep(config: &SweepConfig, eig: LanczosOptions, cg: CgOptions) -> Result<SweepResult> {
    if config.sigmas.is_empty() {
        return Err(Error::InvalidParameter { field: "sigmas", reason: "empty".into() });
    }
    let points = config.sigmas.iter().map(|&s| sweep_point(config, s, eig, cg)).collect();
    Ok(fit_sweep(config.template.lambda, points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_grid_shape() {
        let g = delta_grid();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 1e-6).abs() < 1e-18 && (g[24] - 1e2).abs() < 1e-10);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn fit_recovers_power_law() {
        let data: Vec<(f64, f64)> = [0.01, 0.02, 0.04, 0.08].iter().map(|&s: &f64| (s, 3.0 * s.powf(-0.3))).collect();
        let f = fit_exponent(Quantity::DPsi, &data);
        assert!((f.delta - 0.3).abs() < 1e-12 && f.residual < 1e-12);
        let zero = fit_exponent(Quantity::DPsi, &[(0.1, 0.0), (0.2, 1e-14)]);
        assert!(zero.identically_zero && zero.delta == 0.0);
        assert!(fit_exponent(Quantity::DPsi, &[(0.1, 1.0)]).delta.is_nan());
    }

    #[test]
    fn free_sweep_is_flat() {
        let mut c = SweepConfig::desk(0.0);
        c.sigmas = vec![0.1, 0.05, 0.025];
        c.n_max = 2;
        c.deltas = vec![0.0, 1.0];
        let r = sigma_sweep(&c, LanczosOptions::default(), CgOptions::default()).unwrap();
        assert_eq!(r.points.len(), 3);
        for f in &r.fits {
            assert!(f.identically_zero && f.delta == 0.0, "{f:?}");
        }
    }

    #[test]
    fn single_point_gives_norms_only() {
        let mut c = SweepConfig::desk(0.1);
        c.sigmas = vec![0.1];
        c.n_max = 2;
        c.deltas = vec![0.0];
        let r = sigma_sweep(&c, LanczosOptions::default(), CgOptions::default()).unwrap();
        assert!(r.fits.is_empty());
        assert_eq!(r.points[0].values.len(), Quantity::ALL.len());
    }
}
