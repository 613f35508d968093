//! Table persistence (CSV with `#` metadata lines) and SVG plots.

pub mod svg;

use crate::analysis::{AlphaGrid, AlphaRow};
use crate::error::{Error, Result};
use crate::montecarlo::SimResult;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub const FORMAT_VERSION: &str = concat!("foliated-link ", env!("CARGO_PKG_VERSION"));

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Pretty JSON with every array of plain numbers kept on one line, so
/// check matrices read as one row per line. Ends with a newline.
pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let pretty = serde_json::to_string_pretty(value)?;
    let mut out = String::with_capacity(pretty.len());
    let mut in_string = false;
    let mut escaped = false;
    let mut chars = pretty.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if in_string {
            out.push(c);
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_string = false,
                _ => {}
            }
            continue;
        }
        if c == '"' {
            in_string = true;
        }
        if c == '[' {
            let rest = &pretty[i + 1..];
            let end = rest.find(']').unwrap_or(0);
            let body = &rest[..end];
            let numeric = end > 0 && body.chars().all(|ch| ch.is_ascii_digit() || " \n,.-+eE".contains(ch));
            if numeric && body.chars().any(|ch| ch.is_ascii_digit()) {
                let items: Vec<&str> = body.split(',').map(str::trim).collect();
                out.push('[');
                out.push_str(&items.join(", "));
                out.push(']');
                for _ in 0..body.chars().count() + 1 {
                    chars.next();
                }
                continue;
            }
        }
        out.push(c);
    }
    out.push('\n');
    Ok(out)
}

/// Short stable digest of a configuration string.
pub fn config_hash(config: &str) -> String {
    let digest = Sha256::digest(config.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// One Monte Carlo cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub code: String,
    pub eta_r: f64,
    pub l0_km: f64,
    pub alpha0_db_per_km: f64,
    pub hops: usize,
    pub trials: u64,
    pub seed: u64,
    pub p_primal: f64,
    pub p_dual: f64,
    pub eta_eff: f64,
    pub stderr: f64,
}

impl GridRecord {
    pub fn from_sim(r: &SimResult) -> Self {
        Self {
            code: r.code.clone(),
            eta_r: r.eta_r,
            l0_km: r.l0_km,
            alpha0_db_per_km: r.alpha0_db_per_km,
            hops: r.hops,
            trials: r.trials,
            seed: r.seed,
            p_primal: r.p_primal,
            p_dual: r.p_dual,
            eta_eff: r.eta_eff,
            stderr: r.stderr_eta_eff,
        }
    }

    /// Cells are identified by code, repeater efficiency, spacing and hops.
    pub fn key(&self) -> CellKey {
        CellKey::new(&self.code, self.eta_r, self.l0_km, self.hops)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub code: String,
    eta_r_bits: u64,
    l0_bits: u64,
    pub hops: usize,
}

impl CellKey {
    pub fn new(code: &str, eta_r: f64, l0_km: f64, hops: usize) -> Self {
        Self {
            code: code.to_string(),
            eta_r_bits: eta_r.to_bits(),
            l0_bits: l0_km.to_bits(),
            hops,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaRecord {
    pub code: String,
    pub eta_r: f64,
    pub l0_km: f64,
    pub alpha_eff_db_per_km: f64,
    pub log10_prefactor: f64,
    pub rms_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptRecord {
    pub distance_km: f64,
    pub n_opt: usize,
    pub l0_km: f64,
    pub eta_eff: f64,
    pub cost: f64,
}

/// Serializes records as CSV with a header and leading `#` metadata lines.
pub fn to_csv_string<T: Serialize>(records: &[T], header: &[&str], metadata: &[(&str, String)]) -> Result<String> {
    let mut out = String::new();
    for (k, v) in metadata {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.push_str(std::str::from_utf8(&bytes).map_err(|e| Error::Parse(e.to_string()))?);
    Ok(out)
}

pub fn write_csv<T: Serialize>(path: &Path, records: &[T], header: &[&str], metadata: &[(&str, String)]) -> Result<()> {
    write_atomic(path, to_csv_string(records, header, metadata)?.as_bytes())
}

pub fn parse_csv<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    r.deserialize().map(|rec| rec.map_err(Error::from)).collect()
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    parse_csv(&std::fs::read_to_string(path)?)
}

pub const GRID_HEADER: [&str; 11] = [
    "code",
    "eta_r",
    "l0_km",
    "alpha0_db_per_km",
    "hops",
    "trials",
    "seed",
    "p_primal",
    "p_dual",
    "eta_eff",
    "stderr",
];
pub const ALPHA_HEADER: [&str; 6] = [
    "code",
    "eta_r",
    "l0_km",
    "alpha_eff_db_per_km",
    "log10_prefactor",
    "rms_residual",
];
pub const OPT_HEADER: [&str; 5] = ["distance_km", "n_opt", "l0_km", "eta_eff", "cost"];

/// Groups grid cells by `(code, eta_r)` and fits one alpha row per spacing.
/// Zero-rate cells are dropped with a warning.
pub fn fit_grid_records(records: &[GridRecord]) -> Result<Vec<AlphaRecord>> {
    let mut groups: BTreeMap<(String, u64, u64), Vec<&GridRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.code.clone(), r.eta_r.to_bits(), r.l0_km.to_bits()))
            .or_default()
            .push(r);
    }
    let mut out = Vec::with_capacity(groups.len());
    for ((code, eta_bits, l0_bits), cells) in groups {
        let (eta_r, l0_km) = (f64::from_bits(eta_bits), f64::from_bits(l0_bits));
        let points: Vec<(f64, f64)> = cells.iter().map(|c| (c.hops as f64 * l0_km, c.eta_eff)).collect();
        let fit = crate::analysis::fit_nonzero(&points, &format!("{code} eta_r={eta_r} L0={l0_km}")).map_err(|e| {
            Error::AtSpacing {
                l0_km,
                source: Box::new(e),
            }
        })?;
        out.push(AlphaRecord {
            code,
            eta_r,
            l0_km,
            alpha_eff_db_per_km: fit.alpha_eff,
            log10_prefactor: fit.log10_prefactor,
            rms_residual: fit.rms_residual,
        });
    }
    out.sort_by(|a, b| {
        a.code
            .cmp(&b.code)
            .then(a.eta_r.total_cmp(&b.eta_r))
            .then(a.l0_km.total_cmp(&b.l0_km))
    });
    Ok(out)
}

/// Builds one grid per `(code, eta_r)` group of alpha records.
pub fn alpha_grids(records: &[AlphaRecord]) -> Result<Vec<AlphaGrid>> {
    let mut groups: BTreeMap<(String, u64), Vec<AlphaRow>> = BTreeMap::new();
    for r in records {
        groups.entry((r.code.clone(), r.eta_r.to_bits())).or_default().push(AlphaRow {
            l0_km: r.l0_km,
            alpha_eff: r.alpha_eff_db_per_km,
            log10_prefactor: r.log10_prefactor,
            rms_residual: r.rms_residual,
        });
    }
    groups
        .into_iter()
        .map(|((code, eta_bits), rows)| AlphaGrid::new(&code, f64::from_bits(eta_bits), rows, 0..=0))
        .collect()
}

pub fn alpha_records(grid: &AlphaGrid) -> Vec<AlphaRecord> {
    grid.rows
        .iter()
        .map(|r| AlphaRecord {
            code: grid.code.clone(),
            eta_r: grid.eta_r,
            l0_km: r.l0_km,
            alpha_eff_db_per_km: r.alpha_eff,
            log10_prefactor: r.log10_prefactor,
            rms_residual: r.rms_residual,
        })
        .collect()
}
