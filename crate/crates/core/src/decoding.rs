//! Erasure decoding on a syndrome subgraph.
//!
//! A logical row survives an erasure when some product of stabilizer rows
//! cancels it on every erased qubit. Only the erased columns take part in
//! that question, so both decoders work on rows restricted to the erased
//! set, packed into `ceil(|E| / 64)` words.

use crate::codes::CssCode;
use crate::error::{Error, Result};
use crate::foliation::{foliate, SubgraphLabel, SyndromeSubgraph};
use crate::gf2::{first_one, get_bit, words_for, xor_words, BitVec, RowSpanSolver};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    #[default]
    Exact,
    Greedy,
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Exact => "exact",
            DecoderKind::Greedy => "greedy",
        })
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(DecoderKind::Exact),
            "greedy" => Ok(DecoderKind::Greedy),
            other => Err(Error::Parse(format!("unknown decoder {other:?} (expected exact or greedy)"))),
        }
    }
}

/// Lost qubits of one subgraph, as a mask over its qubit positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasurePattern {
    pub label: SubgraphLabel,
    pub erased: BitVec,
}

impl ErasurePattern {
    pub fn new(sub: &SyndromeSubgraph, erased: BitVec) -> Result<Self> {
        if erased.len() != sub.len() {
            return Err(Error::PatternLength {
                expected: sub.len(),
                got: erased.len(),
            });
        }
        Ok(Self {
            label: sub.label,
            erased,
        })
    }

    pub fn empty(sub: &SyndromeSubgraph) -> Self {
        Self {
            label: sub.label,
            erased: BitVec::zeros(sub.len()),
        }
    }

    pub fn all(sub: &SyndromeSubgraph) -> Self {
        Self {
            label: sub.label,
            erased: BitVec::from_indices(sub.len(), 0..sub.len()),
        }
    }

    pub fn from_positions(sub: &SyndromeSubgraph, positions: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut erased = BitVec::zeros(sub.len());
        for p in positions {
            if p >= sub.len() {
                return Err(Error::InvalidParameter(format!(
                    "position {p} outside {} subgraph of {} qubits",
                    sub.label,
                    sub.len()
                )));
            }
            erased.set(p, true);
        }
        Ok(Self {
            label: sub.label,
            erased,
        })
    }

    pub fn positions(&self) -> Vec<usize> {
        self.erased.iter_ones().collect()
    }

    pub fn count(&self) -> usize {
        self.erased.count_ones()
    }

    fn check(&self, sub: &SyndromeSubgraph) -> Result<()> {
        if self.erased.len() != sub.len() {
            return Err(Error::PatternLength {
                expected: sub.len(),
                got: self.erased.len(),
            });
        }
        if self.label != sub.label {
            return Err(Error::InvalidParameter(format!(
                "{} pattern applied to {} subgraph",
                self.label, sub.label
            )));
        }
        Ok(())
    }
}

/// A stabilizer product that cleans one logical off the erased qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub logical: usize,
    /// Stabilizer rows in the product.
    pub rows: Vec<usize>,
    /// Subgraph positions where the product acts.
    pub support: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    pub recoverable: Vec<usize>,
    pub success: bool,
    pub witness: Option<Vec<Witness>>,
}

impl DecodeOutcome {
    fn from_mask(mask: Vec<bool>, witness: Option<Vec<Witness>>) -> Self {
        let recoverable: Vec<usize> = mask.iter().enumerate().filter(|(_, &ok)| ok).map(|(i, _)| i).collect();
        let success = recoverable.len() == mask.len();
        Self {
            recoverable,
            success,
            witness,
        }
    }
}

/// Rows of a subgraph restricted to the erased columns.
struct Restricted {
    stride: usize,
    stabilizers: Vec<Vec<u64>>,
    logicals: Vec<Vec<u64>>,
}

impl Restricted {
    fn new(sub: &SyndromeSubgraph, erased: &[usize], compact: &mut Vec<u32>) -> Self {
        compact.clear();
        compact.resize(sub.len(), u32::MAX);
        for (i, &p) in erased.iter().enumerate() {
            compact[p] = i as u32;
        }
        let stride = words_for(erased.len());
        let restrict = |support: &[u32]| -> Option<Vec<u64>> {
            let mut row: Option<Vec<u64>> = None;
            for &c in support {
                let j = compact[c as usize];
                if j != u32::MAX {
                    let r = row.get_or_insert_with(|| vec![0; stride]);
                    r[j as usize / 64] ^= 1 << (j % 64);
                }
            }
            row
        };
        let mut stabilizers = Vec::new();
        for support in &sub.stabilizer_support {
            if let Some(row) = restrict(support) {
                stabilizers.push(row);
            }
        }
        let logicals = sub
            .logical_support
            .iter()
            .map(|s| restrict(s).unwrap_or_else(|| vec![0; stride]))
            .collect();
        Self {
            stride,
            stabilizers,
            logicals,
        }
    }
}

/// Reusable buffers for repeated exact decoding.
#[derive(Debug, Default)]
pub struct ExactScratch {
    compact: Vec<u32>,
    erased: Vec<usize>,
    basis: Vec<u64>,
    pivot_slot: Vec<u32>,
}

/// Which logicals survive, by elimination on the restricted rows. This is
/// the hot path used by the Monte Carlo driver; [`decode_exact`] answers the
/// same question through [`RowSpanSolver`] and also returns witnesses.
pub fn exact_recoverable(sub: &SyndromeSubgraph, erased: &BitVec, scratch: &mut ExactScratch) -> Vec<bool> {
    let k = sub.logicals.rows();
    scratch.erased.clear();
    scratch.erased.extend(erased.iter_ones());
    if scratch.erased.is_empty() {
        return vec![true; k];
    }
    let width = scratch.erased.len();
    let stride = words_for(width);
    let ExactScratch {
        compact,
        erased: positions,
        basis,
        pivot_slot,
    } = scratch;
    compact.clear();
    compact.resize(sub.len(), u32::MAX);
    for (i, &p) in positions.iter().enumerate() {
        compact[p] = i as u32;
    }
    pivot_slot.clear();
    pivot_slot.resize(width, u32::MAX);
    basis.clear();

    let mut row = vec![0u64; stride];
    let load = |support: &[u32], row: &mut [u64]| -> bool {
        row.fill(0);
        let mut any = false;
        for &c in support {
            let j = compact[c as usize];
            if j != u32::MAX {
                row[j as usize / 64] ^= 1 << (j % 64);
                any = true;
            }
        }
        any
    };
    // Reduce `row` against the basis; returns the pivot it ends on, if any.
    fn reduce(row: &mut [u64], basis: &[u64], pivot_slot: &[u32], stride: usize) -> Option<usize> {
        while let Some(p) = first_one(row) {
            let slot = pivot_slot[p];
            if slot == u32::MAX {
                return Some(p);
            }
            let s = slot as usize * stride;
            xor_words(row, &basis[s..s + stride]);
        }
        None
    }

    for support in &sub.stabilizer_support {
        if !load(support, &mut row) {
            continue;
        }
        if let Some(p) = reduce(&mut row, basis, pivot_slot, stride) {
            pivot_slot[p] = (basis.len() / stride) as u32;
            basis.extend_from_slice(&row);
            if basis.len() / stride == width {
                // Full rank on the erased set: every logical is cleanable.
                return vec![true; k];
            }
        }
    }
    sub.logical_support
        .iter()
        .map(|support| {
            load(support, &mut row);
            reduce(&mut row, basis, pivot_slot, stride).is_none()
        })
        .collect()
}

/// Exact erasure decoding: logical `i` is recoverable iff its restriction to
/// the erased qubits lies in the row space of the restricted stabilizers.
pub fn decode_exact(sub: &SyndromeSubgraph, e: &ErasurePattern) -> Result<DecodeOutcome> {
    e.check(sub)?;
    let erased = e.positions();
    let k = sub.logicals.rows();
    if erased.is_empty() {
        return Ok(DecodeOutcome::from_mask(vec![true; k], Some(Vec::new())));
    }
    let restricted_stabs = sub.stabilizers.select_columns(&erased);
    let restricted_logs = sub.logicals.select_columns(&erased);
    let solver = RowSpanSolver::new(&restricted_stabs);
    let mut mask = Vec::with_capacity(k);
    let mut witnesses = Vec::new();
    for j in 0..k {
        match solver.solve(&restricted_logs.row(j)) {
            Some(coeffs) => {
                let rows: Vec<usize> = coeffs.iter_ones().collect();
                let mut product = BitVec::zeros(sub.len());
                for &r in &rows {
                    product.xor_assign(&sub.stabilizers.row(r));
                }
                if !rows.is_empty() {
                    witnesses.push(Witness {
                        logical: j,
                        rows,
                        support: product.iter_ones().collect(),
                    });
                }
                mask.push(true);
            }
            None => mask.push(false),
        }
    }
    Ok(DecodeOutcome::from_mask(mask, Some(witnesses)))
}

/// The greedy erasure decoder, run on rows restricted to the erased qubits.
///
/// Erased qubits are visited in ascending position. A logical acting on the
/// current qubit is multiplied by the lowest-index stabilizer acting there,
/// or dropped if there is none. The stabilizers acting on the qubit are then
/// removed when there is one, or replaced by the products of consecutive
/// pairs when there are several.
pub fn decode_greedy(sub: &SyndromeSubgraph, e: &ErasurePattern) -> Result<DecodeOutcome> {
    e.check(sub)?;
    let erased = e.positions();
    let mut compact = Vec::new();
    let r = Restricted::new(sub, &erased, &mut compact);
    Ok(DecodeOutcome::from_mask(greedy_mask(r, erased.len(), sub.logicals.rows()), None))
}

fn greedy_mask(r: Restricted, width: usize, k: usize) -> Vec<bool> {
    let Restricted {
        stride,
        mut stabilizers,
        logicals,
        ..
    } = r;
    debug_assert!(stabilizers.iter().all(|s| s.len() == stride));
    let mut live: Vec<(usize, Vec<u64>)> = logicals.into_iter().enumerate().collect();
    for q in 0..width {
        if live.is_empty() {
            return vec![false; k];
        }
        let acting: Vec<usize> = (0..stabilizers.len()).filter(|&i| get_bit(&stabilizers[i], q)).collect();
        let first = acting.first().copied();
        live.retain_mut(|(_, l)| {
            if !get_bit(l, q) {
                return true;
            }
            match first {
                Some(f) => {
                    xor_words(l, &stabilizers[f]);
                    true
                }
                None => false,
            }
        });
        match acting.len() {
            0 => {}
            1 => {
                stabilizers.remove(acting[0]);
            }
            _ => {
                for w in acting.windows(2) {
                    let next = stabilizers[w[1]].clone();
                    xor_words(&mut stabilizers[w[0]], &next);
                }
                stabilizers.remove(*acting.last().unwrap());
            }
        }
    }
    let mut mask = vec![false; k];
    for (j, _) in live {
        mask[j] = true;
    }
    mask
}

/// Greedy decoding without allocating a pattern, for the Monte Carlo loop.
pub fn greedy_recoverable(sub: &SyndromeSubgraph, erased: &BitVec, compact: &mut Vec<u32>) -> Vec<bool> {
    let positions: Vec<usize> = erased.iter_ones().collect();
    let r = Restricted::new(sub, &positions, compact);
    greedy_mask(r, positions.len(), sub.logicals.rows())
}

/// Exhaustive single-hop census: `counts[j]` is the number of erasure
/// patterns on the `n` transmitted data qubits leaving `j` survivors for
/// which every primal logical is exactly recoverable.
pub fn census(code: &CssCode) -> Result<Vec<u64>> {
    if code.n > 20 {
        return Err(Error::EnumerationInfeasible { n: code.n });
    }
    let chain = foliate(code, 1)?;
    let sub = &chain.primal;
    // Site-1 data occupy the first n positions of the primal subgraph.
    debug_assert!(sub.qubits[..code.n].iter().all(|q| q.site == 1));
    let mut counts = vec![0u64; code.n + 1];
    let mut scratch = ExactScratch::default();
    let mut erased = BitVec::zeros(sub.len());
    for mask in 0u32..(1 << code.n) {
        for q in 0..code.n {
            erased.set(q, mask >> q & 1 == 1);
        }
        if exact_recoverable(sub, &erased, &mut scratch).iter().all(|&ok| ok) {
            counts[code.n - mask.count_ones() as usize] += 1;
        }
    }
    Ok(counts)
}

/// Number of correctable single-hop patterns with `surviving` data qubits.
pub fn correctable_pattern_census(code: &CssCode, surviving: usize) -> Result<u64> {
    let counts = census(code)?;
    counts
        .get(surviving)
        .copied()
        .ok_or_else(|| Error::InvalidParameter(format!("surviving count {surviving} exceeds n = {}", code.n)))
}
