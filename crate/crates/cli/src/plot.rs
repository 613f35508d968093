//! Figure-style SVG plots built from the tool's own CSV tables.

use foliated_link::io::svg::{LinePlot, Series};
use foliated_link::io::{AlphaRecord, GridRecord, OptRecord};
use std::collections::BTreeMap;

/// Single-photon loss of a channel qubit for one grid cell.
fn channel_loss(r: &GridRecord) -> f64 {
    1.0 - r.eta_r * 10f64.powf(-r.alpha0_db_per_km * r.l0_km / 10.0)
}

pub fn loss_tolerance(records: &[GridRecord]) -> String {
    let mut groups: BTreeMap<(String, u64, usize), Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.code.clone(), r.eta_r.to_bits(), r.hops))
            .or_default()
            .push((channel_loss(r), r.eta_eff));
    }
    let mut series = vec![Series::line("direct", vec![(0.0, 1.0), (1.0, 0.0)]).dashed()];
    for ((code, eta_bits, hops), mut pts) in groups {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        series.push(Series::markers(
            format!("{code} eta_r={} N={hops}", f64::from_bits(eta_bits)),
            pts,
        ));
    }
    LinePlot {
        title: "Loss tolerance".into(),
        x_label: "single-photon loss".into(),
        y_label: "eta_eff".into(),
        series,
        ..Default::default()
    }
    .render()
}

pub fn attenuation(records: &[AlphaRecord]) -> String {
    let mut groups: BTreeMap<(String, u64), Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.code.clone(), r.eta_r.to_bits()))
            .or_default()
            .push((r.l0_km, r.alpha_eff_db_per_km));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut series = Vec::new();
    for ((code, eta_bits), mut pts) in groups {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        lo = lo.min(pts[0].0);
        hi = hi.max(pts[pts.len() - 1].0);
        series.push(Series::line(format!("{code} eta_r={}", f64::from_bits(eta_bits)), pts));
    }
    if lo.is_finite() {
        series.push(Series::line("fiber 0.2 dB/km", vec![(lo, 0.2), (hi, 0.2)]).dashed());
    }
    for s in series.iter_mut().filter(|s| !s.dashed) {
        s.markers = true;
    }
    LinePlot {
        title: "Effective attenuation".into(),
        x_label: "repeater spacing L0 (km)".into(),
        y_label: "alpha_eff (dB/km)".into(),
        series,
        ..Default::default()
    }
    .render()
}

pub fn optimal(records: &[OptRecord]) -> String {
    let mut pts: Vec<(f64, f64)> = records.iter().map(|r| (r.distance_km, r.eta_eff)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut per_10km: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.distance_km, 10.0 * r.n_opt as f64 / r.distance_km))
        .collect();
    per_10km.sort_by(|a, b| a.0.total_cmp(&b.0));
    LinePlot {
        title: "Optimized chain".into(),
        x_label: "distance L (km)".into(),
        y_label: "eta_eff / repeaters per 10 km".into(),
        series: vec![
            Series::line("eta_eff", pts),
            Series::line("repeaters per 10 km", per_10km).dashed(),
        ],
        ..Default::default()
    }
    .render()
}
