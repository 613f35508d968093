//! Linear-cluster foliation of a CSS code over `2N + 1` sites.
//!
//! Sites are numbered `1..=2N+1`. Odd sites carry ancillas for the `H_Z`
//! rows and even sites ancillas for the `H_X` rows; every site carries `n`
//! data qubits. Global qubit indices run site-major, data before ancilla.
//!
//! Measuring everything in the X basis leaves two independent syndrome
//! subgraphs:
//!
//! * primal: data at odd sites plus ancillas at even sites. Row `i` of
//!   `H_X` centred at odd site `l` touches the data of `l` and ancilla `i`
//!   at sites `l - 1` and `l + 1` when those exist.
//! * dual: data at even sites plus ancillas at odd sites, built the same
//!   way from `H_Z`.
//!
//! Logical rows are the product of `L_X[i]` (primal) or `L_Z[i]` (dual)
//! over every data site of the subgraph. Channel transit happens at the
//! primal data of sites `1, 3, ..., 2N - 1`; site `2N + 1` is generated
//! locally at the receiver.

use crate::codes::{CodeFile, CssCode};
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QubitKind {
    Data,
    Ancilla,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubgraphLabel {
    Primal,
    Dual,
}

impl fmt::Display for SubgraphLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SubgraphLabel::Primal => "primal",
            SubgraphLabel::Dual => "dual",
        })
    }
}

/// Whether a qubit crosses a fiber link or stays inside a repeater.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossClass {
    Channel,
    Internal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitId {
    pub site: usize,
    pub kind: QubitKind,
    pub local: usize,
    pub global: usize,
}

/// One of the two decoupled decoding problems of a chain.
#[derive(Debug, Clone)]
pub struct SyndromeSubgraph {
    pub label: SubgraphLabel,
    pub qubits: Vec<QubitId>,
    /// One row per reduced cluster stabilizer; columns index `qubits`.
    pub stabilizers: BitMatrix,
    /// One row per logical qubit.
    pub logicals: BitMatrix,
    pub loss_class: Vec<LossClass>,
    /// For each stabilizer row, the site it is centred on and its check row.
    pub stabilizer_origin: Vec<(usize, usize)>,
    pub(crate) stabilizer_support: Vec<Vec<u32>>,
    pub(crate) logical_support: Vec<Vec<u32>>,
}

impl SyndromeSubgraph {
    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    pub fn channel_count(&self) -> usize {
        self.loss_class.iter().filter(|&&c| c == LossClass::Channel).count()
    }

    /// Position of a global qubit index inside this subgraph.
    pub fn position_of(&self, global: usize) -> Option<usize> {
        self.qubits.binary_search_by_key(&global, |q| q.global).ok()
    }

    fn from_parts(
        label: SubgraphLabel,
        qubits: Vec<QubitId>,
        stabilizers: BitMatrix,
        logicals: BitMatrix,
        loss_class: Vec<LossClass>,
        stabilizer_origin: Vec<(usize, usize)>,
    ) -> Self {
        let support = |m: &BitMatrix| -> Vec<Vec<u32>> {
            (0..m.rows())
                .map(|r| m.row(r).iter_ones().map(|c| c as u32).collect())
                .collect()
        };
        let stabilizer_support = support(&stabilizers);
        let logical_support = support(&logicals);
        Self {
            label,
            qubits,
            stabilizers,
            logicals,
            loss_class,
            stabilizer_origin,
            stabilizer_support,
            logical_support,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FoliatedChain {
    pub code: CssCode,
    pub hops: usize,
    pub primal: SyndromeSubgraph,
    pub dual: SyndromeSubgraph,
    site_offsets: Vec<usize>,
}

impl FoliatedChain {
    pub fn sites(&self) -> usize {
        2 * self.hops + 1
    }

    /// Ancilla count at a site: `H_Z` rows at odd sites, `H_X` rows at even.
    pub fn ancillas_at(&self, site: usize) -> usize {
        ancillas_at(&self.code, site)
    }

    pub fn total_qubits(&self) -> usize {
        *self.site_offsets.last().unwrap()
    }

    pub fn global_index(&self, site: usize, kind: QubitKind, local: usize) -> usize {
        assert!((1..=self.sites()).contains(&site), "site {site} out of range");
        let base = self.site_offsets[site - 1];
        match kind {
            QubitKind::Data => base + local,
            QubitKind::Ancilla => base + self.code.n + local,
        }
    }

    pub fn subgraph(&self, label: SubgraphLabel) -> &SyndromeSubgraph {
        match label {
            SubgraphLabel::Primal => &self.primal,
            SubgraphLabel::Dual => &self.dual,
        }
    }

    /// Which subgraph owns a global qubit, and its position there.
    pub fn locate(&self, global: usize) -> Option<(SubgraphLabel, usize)> {
        self.primal
            .position_of(global)
            .map(|p| (SubgraphLabel::Primal, p))
            .or_else(|| self.dual.position_of(global).map(|p| (SubgraphLabel::Dual, p)))
    }
}

fn ancillas_at(code: &CssCode, site: usize) -> usize {
    if site % 2 == 1 {
        code.h_z.rows()
    } else {
        code.h_x.rows()
    }
}

pub fn foliate(code: &CssCode, hops: usize) -> Result<FoliatedChain> {
    if hops < 1 {
        return Err(Error::InvalidParameter("hops must be at least 1".into()));
    }
    let sites = 2 * hops + 1;
    let mut site_offsets = Vec::with_capacity(sites + 1);
    site_offsets.push(0);
    for site in 1..=sites {
        let last = *site_offsets.last().unwrap();
        site_offsets.push(last + code.n + ancillas_at(code, site));
    }
    let primal = build_subgraph(code, hops, &site_offsets, SubgraphLabel::Primal);
    let dual = build_subgraph(code, hops, &site_offsets, SubgraphLabel::Dual);
    Ok(FoliatedChain {
        code: code.clone(),
        hops,
        primal,
        dual,
        site_offsets,
    })
}

fn build_subgraph(code: &CssCode, hops: usize, offsets: &[usize], label: SubgraphLabel) -> SyndromeSubgraph {
    let sites = 2 * hops + 1;
    let n = code.n;
    let (checks, logical_rows, data_parity) = match label {
        SubgraphLabel::Primal => (&code.h_x, &code.l_x, 1),
        SubgraphLabel::Dual => (&code.h_z, &code.l_z, 0),
    };
    let is_data_site = |site: usize| site % 2 == data_parity;

    // Qubits in ascending global order; remember each block's first column.
    let mut qubits = Vec::new();
    let mut loss_class = Vec::new();
    let mut data_col = vec![usize::MAX; sites + 1];
    let mut ancilla_col = vec![usize::MAX; sites + 1];
    for site in 1..=sites {
        let base = offsets[site - 1];
        if is_data_site(site) {
            data_col[site] = qubits.len();
            let class = if label == SubgraphLabel::Primal && site < sites {
                LossClass::Channel
            } else {
                LossClass::Internal
            };
            for q in 0..n {
                qubits.push(QubitId {
                    site,
                    kind: QubitKind::Data,
                    local: q,
                    global: base + q,
                });
                loss_class.push(class);
            }
        } else {
            ancilla_col[site] = qubits.len();
            for a in 0..checks.rows() {
                qubits.push(QubitId {
                    site,
                    kind: QubitKind::Ancilla,
                    local: a,
                    global: base + n + a,
                });
                loss_class.push(LossClass::Internal);
            }
        }
    }

    let data_sites: Vec<usize> = (1..=sites).filter(|&s| is_data_site(s)).collect();
    let cols = qubits.len();
    let mut stabilizers = BitMatrix::zeros(data_sites.len() * checks.rows(), cols);
    let mut origin = Vec::with_capacity(stabilizers.rows());
    let mut row = 0;
    for &site in &data_sites {
        for i in 0..checks.rows() {
            for q in checks.row(i).iter_ones() {
                stabilizers.set(row, data_col[site] + q, true);
            }
            if site > 1 {
                stabilizers.set(row, ancilla_col[site - 1] + i, true);
            }
            if site < sites {
                stabilizers.set(row, ancilla_col[site + 1] + i, true);
            }
            origin.push((site, i));
            row += 1;
        }
    }

    let mut logicals = BitMatrix::zeros(logical_rows.rows(), cols);
    for j in 0..logical_rows.rows() {
        for &site in &data_sites {
            for q in logical_rows.row(j).iter_ones() {
                logicals.set(j, data_col[site] + q, true);
            }
        }
    }

    SyndromeSubgraph::from_parts(label, qubits, stabilizers, logicals, loss_class, origin)
}

/// One row of the qubit table in a [`ChainDump`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitRecord {
    pub global: usize,
    pub site: usize,
    pub kind: QubitKind,
    pub local: usize,
    pub subgraph: SubgraphLabel,
    pub loss_class: LossClass,
}

/// Stabilizer and logical rows as sorted global-index lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphDump {
    pub stabilizers: Vec<Vec<usize>>,
    pub logicals: Vec<Vec<usize>>,
}

/// Self-contained description of a chain, used as the `chain.json` file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainDump {
    pub code: CodeFile,
    pub hops: usize,
    pub report: ConsistencyReport,
    pub qubits: Vec<QubitRecord>,
    pub primal: SubgraphDump,
    pub dual: SubgraphDump,
}

impl SubgraphDump {
    fn of(sub: &SyndromeSubgraph) -> Self {
        let rows = |m: &BitMatrix| -> Vec<Vec<usize>> {
            m.row_iter()
                .map(|r| {
                    let mut g: Vec<usize> = r.iter_ones().map(|p| sub.qubits[p].global).collect();
                    g.sort_unstable();
                    g
                })
                .collect()
        };
        Self {
            stabilizers: rows(&sub.stabilizers),
            logicals: rows(&sub.logicals),
        }
    }
}

impl FoliatedChain {
    pub fn dump(&self) -> Result<ChainDump> {
        let report = subgraph_consistency_check(self)?;
        let mut qubits = Vec::with_capacity(self.total_qubits());
        for sub in [&self.primal, &self.dual] {
            for (q, class) in sub.qubits.iter().zip(&sub.loss_class) {
                qubits.push(QubitRecord {
                    global: q.global,
                    site: q.site,
                    kind: q.kind,
                    local: q.local,
                    subgraph: sub.label,
                    loss_class: *class,
                });
            }
        }
        qubits.sort_by_key(|q| q.global);
        Ok(ChainDump {
            code: self.code.to_file(),
            hops: self.hops,
            report,
            qubits,
            primal: SubgraphDump::of(&self.primal),
            dual: SubgraphDump::of(&self.dual),
        })
    }
}

impl ChainDump {
    /// Re-foliates the stored code and requires the result to match the
    /// stored tables exactly.
    pub fn rebuild(&self) -> Result<FoliatedChain> {
        let chain = foliate(&self.code.clone().into_code()?, self.hops)?;
        let fresh = chain.dump()?;
        if fresh.report != self.report {
            return Err(Error::InconsistentSubgraph("stored counts differ from the rebuilt chain".into()));
        }
        if fresh.qubits != self.qubits {
            return Err(Error::InconsistentSubgraph("stored qubit table differs from the rebuilt chain".into()));
        }
        for (label, a, b) in [
            (SubgraphLabel::Primal, &fresh.primal, &self.primal),
            (SubgraphLabel::Dual, &fresh.dual, &self.dual),
        ] {
            if let Some(row) = (0..a.stabilizers.len().max(b.stabilizers.len()))
                .find(|&r| a.stabilizers.get(r) != b.stabilizers.get(r))
            {
                return Err(Error::InconsistentSubgraph(format!("{label} stabilizer row {row} differs")));
            }
            if a.logicals != b.logicals {
                return Err(Error::InconsistentSubgraph(format!("{label} logical rows differ")));
            }
        }
        Ok(chain)
    }
}

/// Counts reported by [`subgraph_consistency_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub total_qubits: usize,
    pub primal_qubits: usize,
    pub dual_qubits: usize,
    pub primal_stabilizers: usize,
    pub dual_stabilizers: usize,
    pub primal_logicals: usize,
    pub dual_logicals: usize,
    pub channel_qubits: usize,
}

/// Re-derives every structural property of the two subgraphs from the
/// code and reports the first violation by site and row.
pub fn subgraph_consistency_check(chain: &FoliatedChain) -> Result<ConsistencyReport> {
    let code = &chain.code;
    let sites = chain.sites();
    let fail = |msg: String| Err(Error::InconsistentSubgraph(msg));

    let mut expected_total = 0;
    for site in 1..=sites {
        expected_total += code.n + chain.ancillas_at(site);
    }
    if expected_total != chain.total_qubits() {
        return fail(format!("total qubits {} != {expected_total}", chain.total_qubits()));
    }
    let mut seen = vec![false; chain.total_qubits()];

    for sub in [&chain.primal, &chain.dual] {
        let (checks, logical_rows, data_parity) = match sub.label {
            SubgraphLabel::Primal => (&code.h_x, &code.l_x, 1),
            SubgraphLabel::Dual => (&code.h_z, &code.l_z, 0),
        };
        if sub.loss_class.len() != sub.len() {
            return fail(format!("{}: loss class length mismatch", sub.label));
        }
        for (pos, q) in sub.qubits.iter().enumerate() {
            if q.global >= seen.len() || seen[q.global] {
                return fail(format!("{}: global index {} repeated or out of range", sub.label, q.global));
            }
            seen[q.global] = true;
            if q.global != chain.global_index(q.site, q.kind, q.local) {
                return fail(format!("{}: qubit {pos} has inconsistent global index", sub.label));
            }
            let data_site = q.site % 2 == data_parity;
            if (q.kind == QubitKind::Data) != data_site {
                return fail(format!("{}: site {} holds a qubit of the wrong kind", sub.label, q.site));
            }
            let channel = sub.label == SubgraphLabel::Primal && q.kind == QubitKind::Data && q.site < sites;
            let expected = if channel { LossClass::Channel } else { LossClass::Internal };
            if sub.loss_class[pos] != expected {
                return fail(format!("{}: qubit {pos} at site {} misclassified", sub.label, q.site));
            }
        }

        for r in 0..sub.stabilizers.rows() {
            let (site, i) = sub.stabilizer_origin[r];
            let mut data = vec![0u8; code.n];
            let mut ancilla_sites = Vec::new();
            for c in sub.stabilizers.row(r).iter_ones() {
                let q = sub.qubits[c];
                match q.kind {
                    QubitKind::Data if q.site == site => data[q.local] = 1,
                    QubitKind::Ancilla if q.local == i && q.site.abs_diff(site) == 1 => ancilla_sites.push(q.site),
                    _ => return fail(format!("{}: stabilizer row {r} (site {site}) has stray support", sub.label)),
                }
            }
            let expected_row: Vec<u8> = (0..code.n).map(|q| checks.get(i, q) as u8).collect();
            if data != expected_row {
                return fail(format!("{}: stabilizer row {r} (site {site}) data support differs from check row {i}", sub.label));
            }
            let expected_ancillas = [site.checked_sub(1).filter(|&s| s >= 1), Some(site + 1).filter(|&s| s <= sites)]
                .into_iter()
                .flatten()
                .count();
            if ancilla_sites.len() != expected_ancillas {
                return fail(format!("{}: stabilizer row {r} (site {site}) has {} ancilla bits", sub.label, ancilla_sites.len()));
            }
        }

        if sub.logicals.rows() != code.k {
            return fail(format!("{}: {} logical rows, expected {}", sub.label, sub.logicals.rows(), code.k));
        }
        for j in 0..code.k {
            let mut per_site = vec![vec![0u8; code.n]; sites + 1];
            for c in sub.logicals.row(j).iter_ones() {
                let q = sub.qubits[c];
                if q.kind != QubitKind::Data {
                    return fail(format!("{}: logical row {j} touches an ancilla at site {}", sub.label, q.site));
                }
                per_site[q.site][q.local] = 1;
            }
            let expected_row: Vec<u8> = (0..code.n).map(|q| logical_rows.get(j, q) as u8).collect();
            for site in (1..=sites).filter(|s| s % 2 == data_parity) {
                if per_site[site] != expected_row {
                    return fail(format!("{}: logical row {j} differs from the code logical at site {site}", sub.label));
                }
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return fail("some qubits belong to neither subgraph".into());
    }
    let channel_qubits = chain.primal.channel_count() + chain.dual.channel_count();
    if chain.dual.channel_count() != 0 || channel_qubits != chain.hops * code.n {
        return fail(format!("channel qubit count {channel_qubits} != N·n"));
    }
    Ok(ConsistencyReport {
        total_qubits: chain.total_qubits(),
        primal_qubits: chain.primal.len(),
        dual_qubits: chain.dual.len(),
        primal_stabilizers: chain.primal.stabilizers.rows(),
        dual_stabilizers: chain.dual.stabilizers.rows(),
        primal_logicals: chain.primal.logicals.rows(),
        dual_logicals: chain.dual.logicals.rows(),
        channel_qubits,
    })
}
