//! Effective attenuation fits, spacing interpolation and repeater-count
//! optimization.
//!
//! The chain rate is modelled as `eta_eff(L) = 10^(c - alpha_eff · L / 10)`
//! for total distance `L`, with `alpha_eff` and `c` fitted per repeater
//! spacing `L0` and interpolated linearly between spacings.

use crate::codes::CssCode;
use crate::decoding::DecoderKind;
use crate::error::{Error, Result};
use crate::foliation::foliate;
use crate::montecarlo::{estimate_etr, LossModel, SimResult};
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub alpha_eff: f64,
    pub log10_prefactor: f64,
    /// Root-mean-square residual of `log10(eta_eff)`.
    pub rms_residual: f64,
    pub points: usize,
}

/// Ordinary least squares of `log10(eta_eff) = c - (alpha_eff / 10) · L`.
pub fn fit_attenuation(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    if points.iter().any(|&(_, eta)| !(eta > 0.0)) {
        return Err(Error::CannotFitZeroRate);
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("fit needs at least two distinct distances".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    Ok(FitResult {
        alpha_eff: -10.0 * slope,
        log10_prefactor: intercept,
        rms_residual: (ss / n).sqrt(),
        points: points.len(),
    })
}

/// Fits `(L, eta_eff)` points after dropping zero-rate points, which have
/// no logarithm.
pub fn fit_nonzero(points: &[(f64, f64)], context: &str) -> Result<FitResult> {
    let kept: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0).collect();
    if kept.len() < points.len() {
        log::warn!(
            "{context}: dropped {} zero-rate point(s) from the fit",
            points.len() - kept.len()
        );
    }
    fit_attenuation(&kept)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub l0_km: f64,
    pub alpha_eff: f64,
    pub log10_prefactor: f64,
    pub rms_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub code: String,
    pub eta_r: f64,
    /// Strictly increasing in `l0_km`.
    pub rows: Vec<AlphaRow>,
    pub hops_min: usize,
    pub hops_max: usize,
}

impl AlphaGrid {
    pub fn new(code: &str, eta_r: f64, mut rows: Vec<AlphaRow>, hops: RangeInclusive<usize>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("alpha grid needs at least one row".into()));
        }
        rows.sort_by(|a, b| a.l0_km.total_cmp(&b.l0_km));
        if rows.windows(2).any(|w| w[0].l0_km >= w[1].l0_km) {
            return Err(Error::InvalidParameter("alpha grid spacings must be distinct".into()));
        }
        Ok(Self {
            code: code.to_string(),
            eta_r,
            rows,
            hops_min: *hops.start(),
            hops_max: *hops.end(),
        })
    }

    pub fn l0_range(&self) -> (f64, f64) {
        (self.rows[0].l0_km, self.rows[self.rows.len() - 1].l0_km)
    }

    /// `(alpha_eff, log10_prefactor)` at spacing `l0_km`, interpolated
    /// linearly between rows. Spacings outside the grid are refused.
    pub fn parameters_at(&self, l0_km: f64) -> Result<(f64, f64)> {
        let (min_km, max_km) = self.l0_range();
        if !(l0_km >= min_km && l0_km <= max_km) {
            return Err(Error::OutsideGrid { l0_km, min_km, max_km });
        }
        let upper = self.rows.partition_point(|r| r.l0_km < l0_km);
        let hi = &self.rows[upper];
        if hi.l0_km == l0_km || upper == 0 {
            return Ok((hi.alpha_eff, hi.log10_prefactor));
        }
        let lo = &self.rows[upper - 1];
        let t = (l0_km - lo.l0_km) / (hi.l0_km - lo.l0_km);
        Ok((
            lo.alpha_eff + t * (hi.alpha_eff - lo.alpha_eff),
            lo.log10_prefactor + t * (hi.log10_prefactor - lo.log10_prefactor),
        ))
    }
}

/// Simulates every `(L0, N)` cell and fits one row per spacing. Returns the
/// grid and the raw simulation results in cell order.
pub fn build_alpha_grid(
    code: &CssCode,
    eta_r: f64,
    l0_km: &[f64],
    hops: RangeInclusive<usize>,
    trials: u64,
    seed: u64,
    decoder: DecoderKind,
) -> Result<(AlphaGrid, Vec<SimResult>)> {
    if hops.is_empty() || *hops.start() < 1 {
        return Err(Error::InvalidParameter(format!("invalid hop range {hops:?}")));
    }
    let chains = hops.clone().map(|h| foliate(code, h)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(l0_km.len());
    let mut sims = Vec::new();
    for &l0 in l0_km {
        let at = |e: Error| Error::AtSpacing {
            l0_km: l0,
            source: Box::new(e),
        };
        let model = LossModel::new(eta_r, l0).map_err(at)?;
        let eta = model.channel_transmission();
        if !(eta > 0.0 && eta < 1.0) {
            return Err(at(Error::InvalidParameter(format!("channel transmission {eta} not in (0, 1)"))));
        }
        let mut points = Vec::with_capacity(chains.len());
        for chain in &chains {
            let r = estimate_etr(chain, &model, trials, seed, decoder).map_err(at)?;
            points.push((chain.hops as f64 * l0, r.eta_eff));
            sims.push(r);
        }
        let fit = fit_nonzero(&points, &format!("{} eta_r={eta_r} L0={l0}", code.name)).map_err(at)?;
        rows.push(AlphaRow {
            l0_km: l0,
            alpha_eff: fit.alpha_eff,
            log10_prefactor: fit.log10_prefactor,
            rms_residual: fit.rms_residual,
        });
    }
    Ok((AlphaGrid::new(&code.name, eta_r, rows, hops)?, sims))
}

/// Modelled chain rate at spacing `l0_km` over total distance `l_km`,
/// clamped to `[0, 1]`.
pub fn eta_eff_model(grid: &AlphaGrid, l0_km: f64, l_km: f64) -> Result<f64> {
    if !(l_km > 0.0) {
        return Err(Error::InvalidParameter(format!("distance must be positive, got {l_km}")));
    }
    let (alpha, c) = grid.parameters_at(l0_km)?;
    Ok(10f64.powf(c - alpha * l_km / 10.0).clamp(0.0, 1.0))
}

/// Repeaters per unit length divided by the rate, times photons per
/// logical qubit. A zero rate costs `f64::INFINITY`.
pub fn cost(hops: usize, l_km: f64, eta_eff: f64, n: usize, k: usize) -> Result<f64> {
    if !(l_km > 0.0) || k == 0 || !(eta_eff >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cost needs L > 0, k >= 1 and eta_eff >= 0 (got L={l_km}, k={k}, eta_eff={eta_eff})"
        )));
    }
    if eta_eff == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((hops as f64 / l_km) / eta_eff * (n as f64 / k as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub distance_km: f64,
    pub n_opt: usize,
    pub l0_km: f64,
    pub eta_eff: f64,
    pub cost: f64,
    pub n_min_scanned: usize,
    pub n_max_scanned: usize,
}

/// `ceil(2 · L)` capped at 100 000.
pub fn default_n_max(l_km: f64) -> usize {
    ((2.0 * l_km).ceil() as usize).clamp(1, 100_000)
}

/// Scans `N = 1..=n_max` and returns the cheapest feasible repeater count,
/// preferring the smaller `N` on ties. `n`/`k` scale the cost only.
pub fn optimize_repeaters(grid: &AlphaGrid, l_km: f64, n_max: usize, n: usize, k: usize) -> Result<OptimizationResult> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("N_max must be at least 1".into()));
    }
    let mut best: Option<OptimizationResult> = None;
    let (mut lo, mut hi) = (usize::MAX, 0);
    for hops in 1..=n_max {
        let l0 = l_km / hops as f64;
        let eta = match eta_eff_model(grid, l0, l_km) {
            Ok(eta) => eta,
            Err(Error::OutsideGrid { .. }) => continue,
            Err(e) => return Err(e),
        };
        lo = lo.min(hops);
        hi = hi.max(hops);
        let c = cost(hops, l_km, eta, n, k)?;
        if best.is_none_or(|b| c < b.cost) {
            best = Some(OptimizationResult {
                distance_km: l_km,
                n_opt: hops,
                l0_km: l0,
                eta_eff: eta,
                cost: c,
                n_min_scanned: 0,
                n_max_scanned: 0,
            });
        }
    }
    let mut best = best.ok_or(Error::GridRangeInsufficient)?;
    best.n_min_scanned = lo;
    best.n_max_scanned = hi;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(rows: &[(f64, f64, f64)]) -> AlphaGrid {
        let rows = rows
            .iter()
            .map(|&(l0_km, alpha_eff, log10_prefactor)| AlphaRow {
                l0_km,
                alpha_eff,
                log10_prefactor,
                rms_residual: 0.0,
            })
            .collect();
        AlphaGrid::new("test", 0.9, rows, 2..=30).unwrap()
    }

    #[test]
    fn fit_recovers_exact_model() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|i| (i as f64 * 7.0, 10f64.powf(-0.02 * i as f64 * 7.0))).collect();
        let f = fit_attenuation(&pts).unwrap();
        assert!((f.alpha_eff - 0.2).abs() < 1e-12);
        assert!(f.log10_prefactor.abs() < 1e-12);
        assert!(f.rms_residual < 1e-12);
        assert_eq!(f.points, 10);
    }

    #[test]
    fn fit_is_exact_on_random_log_linear_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10_000 {
            let alpha = rng.gen_range(0.0..0.5);
            let c = rng.gen_range(-1.0..0.0);
            let m = rng.gen_range(2..30);
            let pts: Vec<(f64, f64)> = (0..m)
                .map(|i| {
                    let l = 3.0 + 4.0 * i as f64;
                    (l, 10f64.powf(c - alpha * l / 10.0))
                })
                .collect();
            let f = fit_attenuation(&pts).unwrap();
            assert!((f.alpha_eff - alpha).abs() <= 1e-12 * alpha.max(1.0));
            assert!((f.log10_prefactor - c).abs() <= 1e-12 * c.abs().max(1.0));
            assert!(f.rms_residual < 1e-12);
        }
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(fit_attenuation(&[(1.0, 0.5)]), Err(Error::TooFewPoints(1))));
        assert!(matches!(fit_attenuation(&[(1.0, 0.5), (2.0, 0.0)]), Err(Error::CannotFitZeroRate)));
        let f = fit_nonzero(&[(1.0, 0.5), (2.0, 0.25), (3.0, 0.0)], "t").unwrap();
        assert_eq!(f.points, 2);
    }

    #[test]
    fn interpolation_rules() {
        let g = grid(&[(2.0, 0.01, -0.1), (4.0, 0.03, -0.2), (6.0, 0.1, -0.3)]);
        // On a row: reproduces the row's model.
        let eta = eta_eff_model(&g, 4.0, 40.0).unwrap();
        assert!((eta - 10f64.powf(-0.2 - 0.03 * 4.0)).abs() < 1e-15);
        // Midpoint averages alpha.
        let (a, c) = g.parameters_at(3.0).unwrap();
        assert!((a - 0.02).abs() < 1e-15 && (c + 0.15).abs() < 1e-15);
        assert!(matches!(eta_eff_model(&g, 1.0, 10.0), Err(Error::OutsideGrid { .. })));
        assert!(matches!(eta_eff_model(&g, 6.5, 10.0), Err(Error::OutsideGrid { .. })));

        let flat = grid(&[(1.0, 0.0, -0.1), (3.0, 0.0, -0.1)]);
        let e1 = eta_eff_model(&flat, 2.0, 10.0).unwrap();
        let e2 = eta_eff_model(&flat, 2.0, 10_000.0).unwrap();
        assert_eq!(e1, e2);
        // Positive prefactors are clamped.
        let hot = grid(&[(1.0, 0.0, 0.5)]);
        assert_eq!(eta_eff_model(&hot, 1.0, 10.0).unwrap(), 1.0);
    }

    #[test]
    fn model_stays_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let g = grid(&[(1.0, -0.01, 0.2), (5.0, 0.3, -2.0), (9.0, 1.5, -0.5)]);
        for _ in 0..10_000 {
            let eta = eta_eff_model(&g, rng.gen_range(1.0..=9.0), rng.gen_range(0.1..1e4)).unwrap();
            assert!((0.0..=1.0).contains(&eta));
        }
    }

    #[test]
    fn cost_examples_and_monotonicity() {
        assert!((cost(1, 10.0, 1.0, 8, 1).unwrap() - 0.8).abs() < 1e-15);
        let c1 = cost(3, 100.0, 0.4, 48, 6).unwrap();
        let c2 = cost(3, 100.0, 0.8, 48, 6).unwrap();
        assert!((c1 - 2.0 * c2).abs() < 1e-12);
        assert_eq!(cost(3, 100.0, 0.0, 7, 1).unwrap(), f64::INFINITY);
        assert!(cost(3, 0.0, 0.5, 7, 1).is_err());
        assert!(cost(3, 1.0, 0.5, 7, 0).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10_000 {
            let n = rng.gen_range(1..1000);
            let l = rng.gen_range(1.0..1e4);
            let e = rng.gen_range(0.01..1.0);
            let base = cost(n, l, e, 48, 6).unwrap();
            assert!(cost(n + 1, l, e, 48, 6).unwrap() > base);
            assert!(cost(n, l, e * 1.01, 48, 6).unwrap() < base);
        }
    }

    #[test]
    fn optimizer_finds_global_minimum() {
        let g = grid(&[(0.5, 0.0, -0.05), (2.0, 0.002, -0.06), (5.0, 0.05, -0.1), (10.0, 0.2, -0.2)]);
        for &l in &[10.0, 50.0, 300.0, 1000.0, 5000.0] {
            let n_max = default_n_max(l);
            let best = optimize_repeaters(&g, l, n_max, 48, 6).unwrap();
            for hops in 1..=n_max {
                if let Ok(eta) = eta_eff_model(&g, l / hops as f64, l) {
                    assert!(cost(hops, l, eta, 48, 6).unwrap() >= best.cost, "L={l} N={hops}");
                }
            }
            for delta in [-1i64, 1] {
                let hops = best.n_opt as i64 + delta;
                if hops >= 1 {
                    if let Ok(eta) = eta_eff_model(&g, l / hops as f64, l) {
                        assert!(cost(hops as usize, l, eta, 48, 6).unwrap() >= best.cost);
                    }
                }
            }
        }
    }

    #[test]
    fn optimizer_prefers_one_repeater_at_flat_rate() {
        let g = grid(&[(1.0, 0.0, -0.1), (100.0, 0.0, -0.1)]);
        let best = optimize_repeaters(&g, 50.0, 40, 7, 1).unwrap();
        assert_eq!(best.n_opt, 1);
        assert!(matches!(optimize_repeaters(&g, 1e6, 10, 7, 1), Err(Error::GridRangeInsufficient)));
    }
}
