//! Monte Carlo estimation of the effective transmission rate.
//!
//! Every trial draws its randomness from a ChaCha stream selected by
//! `(seed, trial, subgraph)`, and the reduction is a sum of integer
//! counters, so results are bit-identical for any worker count.

use crate::codes::CssCode;
use crate::decoding::{census, exact_recoverable, greedy_recoverable, DecoderKind, ErasurePattern, ExactScratch};
use crate::error::{Error, Result};
use crate::foliation::{FoliatedChain, LossClass, SubgraphLabel, SyndromeSubgraph};
use crate::gf2::BitVec;
use rand::distributions::{Bernoulli, Distribution};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Fiber attenuation used throughout, in dB/km.
pub const DEFAULT_ALPHA0_DB_PER_KM: f64 = 0.2;

/// Fiber length over which transmission falls by `1/e` at `alpha0`.
pub fn attenuation_length_km(alpha0_db_per_km: f64) -> f64 {
    10.0 / (alpha0_db_per_km * std::f64::consts::LN_10)
}

/// Spacing whose fiber transmission `10^(-alpha0·L/10)` equals `eta`.
pub fn spacing_for_transmission(eta: f64, alpha0_db_per_km: f64) -> f64 {
    -10.0 * eta.log10() / alpha0_db_per_km
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    pub alpha0_db_per_km: f64,
    pub eta_r: f64,
    pub l0_km: f64,
}

impl LossModel {
    pub fn new(eta_r: f64, l0_km: f64) -> Result<Self> {
        Self::with_alpha0(DEFAULT_ALPHA0_DB_PER_KM, eta_r, l0_km)
    }

    pub fn with_alpha0(alpha0_db_per_km: f64, eta_r: f64, l0_km: f64) -> Result<Self> {
        if !(eta_r > 0.0 && eta_r <= 1.0) {
            return Err(Error::InvalidParameter(format!("eta_r must lie in (0, 1], got {eta_r}")));
        }
        if !(l0_km >= 0.0 && l0_km.is_finite()) {
            return Err(Error::InvalidParameter(format!("L0 must be a finite distance >= 0, got {l0_km}")));
        }
        if !(alpha0_db_per_km >= 0.0 && alpha0_db_per_km.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha0 must be >= 0, got {alpha0_db_per_km}")));
        }
        Ok(Self {
            alpha0_db_per_km,
            eta_r,
            l0_km,
        })
    }

    /// Transmission of a photon crossing one repeater spacing.
    pub fn channel_transmission(&self) -> f64 {
        channel_transmission(self.l0_km, self)
    }

    pub fn internal_transmission(&self) -> f64 {
        self.eta_r.sqrt()
    }

    pub fn loss_probability(&self, class: LossClass) -> f64 {
        match class {
            LossClass::Channel => 1.0 - self.channel_transmission(),
            LossClass::Internal => 1.0 - self.internal_transmission(),
        }
    }
}

/// `eta_r · 10^(-alpha0 · L / 10)`.
pub fn channel_transmission(l_km: f64, model: &LossModel) -> f64 {
    model.eta_r * 10f64.powf(-model.alpha0_db_per_km * l_km / 10.0)
}

/// Independent random stream for one trial of one subgraph.
pub fn trial_stream(seed: u64, trial: u64, label: SubgraphLabel) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lane = match label {
        SubgraphLabel::Primal => 0,
        SubgraphLabel::Dual => 1,
    };
    rng.set_stream(trial.wrapping_mul(2).wrapping_add(lane));
    rng
}

/// Per-qubit Bernoulli samplers for one subgraph, built once per run.
struct LossSampler {
    channel: Bernoulli,
    internal: Bernoulli,
    lossless: bool,
}

impl LossSampler {
    fn new(sub: &SyndromeSubgraph, model: &LossModel) -> Self {
        let channel_p = model.loss_probability(LossClass::Channel).clamp(0.0, 1.0);
        let internal_p = model.loss_probability(LossClass::Internal).clamp(0.0, 1.0);
        let has_channel = sub.loss_class.contains(&LossClass::Channel);
        let has_internal = sub.loss_class.contains(&LossClass::Internal);
        Self {
            channel: Bernoulli::new(channel_p).expect("probability in range"),
            internal: Bernoulli::new(internal_p).expect("probability in range"),
            lossless: (!has_channel || channel_p == 0.0) && (!has_internal || internal_p == 0.0),
        }
    }

    fn fill<R: RngCore>(&self, sub: &SyndromeSubgraph, rng: &mut R, erased: &mut BitVec) {
        for (i, class) in sub.loss_class.iter().enumerate() {
            let lost = match class {
                LossClass::Channel => self.channel.sample(rng),
                LossClass::Internal => self.internal.sample(rng),
            };
            erased.set(i, lost);
        }
    }
}

/// Draws one erasure pattern: channel qubits are lost with probability
/// `1 - eta(L0)`, internal qubits with `1 - sqrt(eta_r)`.
pub fn sample_erasure<R: RngCore>(sub: &SyndromeSubgraph, model: &LossModel, rng: &mut R) -> ErasurePattern {
    let mut erased = BitVec::zeros(sub.len());
    LossSampler::new(sub, model).fill(sub, rng, &mut erased);
    ErasurePattern::new(sub, erased).expect("pattern sized to subgraph")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub code: String,
    pub hops: usize,
    pub eta_r: f64,
    pub l0_km: f64,
    pub alpha0_db_per_km: f64,
    pub channel_transmission: f64,
    pub trials: u64,
    pub seed: u64,
    pub decoder: DecoderKind,
    pub p_primal: f64,
    pub p_dual: f64,
    pub eta_eff: f64,
    pub stderr_primal: f64,
    pub stderr_dual: f64,
    pub stderr_eta_eff: f64,
    /// Per-logical recovery rates on each subgraph.
    pub logical_primal: Vec<f64>,
    pub logical_dual: Vec<f64>,
    /// Fraction of trials where greedy and exact decoding agreed on both
    /// subgraphs; only measured when the greedy decoder is selected.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub greedy_agreement: Option<f64>,
}

pub fn binomial_stderr(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Debug, Clone, Default)]
struct Tally {
    success: [u64; 2],
    logical: [Vec<u64>; 2],
    agree: u64,
}

impl Tally {
    fn new(k: usize) -> Self {
        Self {
            success: [0; 2],
            logical: [vec![0; k], vec![0; k]],
            agree: 0,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for s in 0..2 {
            self.success[s] += other.success[s];
            for (a, b) in self.logical[s].iter_mut().zip(&other.logical[s]) {
                *a += b;
            }
        }
        self.agree += other.agree;
        self
    }
}

const CHUNK: u64 = 512;

/// Estimates `p_primal`, `p_dual` and their product over `trials` trials.
/// A subgraph succeeds when all of its `k` logicals are recoverable.
pub fn estimate_etr(
    chain: &FoliatedChain,
    model: &LossModel,
    trials: u64,
    seed: u64,
    decoder: DecoderKind,
) -> Result<SimResult> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let k = chain.code.k;
    let subs = [&chain.primal, &chain.dual];
    let samplers = [LossSampler::new(subs[0], model), LossSampler::new(subs[1], model)];
    let chunks = trials.div_ceil(CHUNK);

    let tally = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut tally = Tally::new(k);
            let mut scratch = ExactScratch::default();
            let mut compact = Vec::new();
            let mut erased = [BitVec::zeros(subs[0].len()), BitVec::zeros(subs[1].len())];
            let end = ((chunk + 1) * CHUNK).min(trials);
            for trial in chunk * CHUNK..end {
                let mut agree = true;
                for s in 0..2 {
                    let sub = subs[s];
                    let mask = if samplers[s].lossless {
                        vec![true; k]
                    } else {
                        let mut rng = trial_stream(seed, trial, sub.label);
                        samplers[s].fill(sub, &mut rng, &mut erased[s]);
                        match decoder {
                            DecoderKind::Exact => exact_recoverable(sub, &erased[s], &mut scratch),
                            DecoderKind::Greedy => {
                                let greedy = greedy_recoverable(sub, &erased[s], &mut compact);
                                agree &= greedy == exact_recoverable(sub, &erased[s], &mut scratch);
                                greedy
                            }
                        }
                    };
                    if mask.iter().all(|&ok| ok) {
                        tally.success[s] += 1;
                    }
                    for (c, ok) in tally.logical[s].iter_mut().zip(&mask) {
                        *c += *ok as u64;
                    }
                }
                tally.agree += agree as u64;
            }
            tally
        })
        .reduce(|| Tally::new(k), Tally::merge);

    let t = trials as f64;
    let p_primal = tally.success[0] as f64 / t;
    let p_dual = tally.success[1] as f64 / t;
    let eta_eff = p_primal * p_dual;
    let rates = |v: &[u64]| v.iter().map(|&c| c as f64 / t).collect::<Vec<_>>();
    Ok(SimResult {
        code: chain.code.name.clone(),
        hops: chain.hops,
        eta_r: model.eta_r,
        l0_km: model.l0_km,
        alpha0_db_per_km: model.alpha0_db_per_km,
        channel_transmission: model.channel_transmission(),
        trials,
        seed,
        decoder,
        p_primal,
        p_dual,
        eta_eff,
        stderr_primal: binomial_stderr(p_primal, trials),
        stderr_dual: binomial_stderr(p_dual, trials),
        stderr_eta_eff: binomial_stderr(eta_eff, trials),
        logical_primal: rates(&tally.logical[0]),
        logical_dual: rates(&tally.logical[1]),
        greedy_agreement: (decoder == DecoderKind::Greedy).then(|| tally.agree as f64 / t),
    })
}

/// Closed-form single-hop rate of the Steane code at fiber transmission
/// `eta` with lossless repeaters.
pub fn steane_single_hop_etr(eta: f64) -> f64 {
    const COEFFS: [(i32, f64); 5] = [(3, 7.0), (4, 28.0), (5, 21.0), (6, 7.0), (7, 1.0)];
    COEFFS
        .iter()
        .map(|&(j, a)| a * eta.powi(j) * (1.0 - eta).powi(7 - j))
        .sum()
}

/// Exact single-hop rate for lossless repeaters, from the exhaustive census.
pub fn brute_force_single_hop_etr(code: &CssCode, eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("eta must lie in [0, 1], got {eta}")));
    }
    let counts = census(code)?;
    let n = code.n as i32;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(j, &a)| a as f64 * eta.powi(j as i32) * (1.0 - eta).powi(n - j as i32))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{gb48, steane, toric};
    use crate::foliation::foliate;
    use rand::Rng;

    #[test]
    fn channel_transmission_examples() {
        let lossless = LossModel::new(1.0, 0.0).unwrap();
        assert_eq!(channel_transmission(0.0, &lossless), 1.0);
        assert!((channel_transmission(50.0, &lossless) - 0.1).abs() < 1e-15);
        let l_att = attenuation_length_km(0.2);
        assert!((l_att - 21.71472).abs() < 1e-4);
        assert!((channel_transmission(l_att, &lossless) - (-1f64).exp()).abs() < 1e-12);
        let m = LossModel::new(0.9, 10.0).unwrap();
        assert!((m.channel_transmission() - 0.9 * 10f64.powf(-0.2)).abs() < 1e-15);
        assert!((spacing_for_transmission(0.5, 0.2) - 15.0515).abs() < 1e-4);
    }

    #[test]
    fn invalid_models_are_rejected() {
        assert!(LossModel::new(0.0, 1.0).is_err());
        assert!(LossModel::new(1.1, 1.0).is_err());
        assert!(LossModel::new(0.9, -1.0).is_err());
        assert!(LossModel::new(0.9, f64::NAN).is_err());
    }

    #[test]
    fn steane_closed_form_values() {
        assert_eq!(steane_single_hop_etr(1.0), 1.0);
        assert_eq!(steane_single_hop_etr(0.0), 0.0);
        assert_eq!(steane_single_hop_etr(0.5), 0.5);
    }

    #[test]
    fn brute_force_matches_closed_form() {
        for i in 0..=20 {
            let eta = i as f64 / 20.0;
            let bf = brute_force_single_hop_etr(&steane(), eta).unwrap();
            assert!((bf - steane_single_hop_etr(eta)).abs() < 1e-14, "eta={eta}");
        }
        assert_eq!(brute_force_single_hop_etr(&toric(2).unwrap(), 1.0).unwrap(), 1.0);
        assert!(brute_force_single_hop_etr(&gb48(), 0.5).is_err());
    }

    #[test]
    fn sampling_edge_cases() {
        let chain = foliate(&steane(), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lossless = LossModel::new(1.0, 0.0).unwrap();
        for sub in [&chain.primal, &chain.dual] {
            for _ in 0..100 {
                assert_eq!(sample_erasure(sub, &lossless, &mut rng).count(), 0);
            }
        }
        let fiber_only = LossModel::new(1.0, 20.0).unwrap();
        for _ in 0..100 {
            assert_eq!(sample_erasure(&chain.dual, &fiber_only, &mut rng).count(), 0);
        }
        let a = sample_erasure(&chain.primal, &fiber_only, &mut trial_stream(9, 3, SubgraphLabel::Primal));
        let b = sample_erasure(&chain.primal, &fiber_only, &mut trial_stream(9, 3, SubgraphLabel::Primal));
        assert_eq!(a, b);
        // Only channel qubits can be lost here.
        for p in a.positions() {
            assert_eq!(chain.primal.loss_class[p], LossClass::Channel);
        }
    }

    #[test]
    fn sample_rates_follow_loss_classes() {
        let chain = foliate(&steane(), 3).unwrap();
        let model = LossModel::new(0.81, 5.0).unwrap();
        let mut rng = trial_stream(5, 0, SubgraphLabel::Primal);
        let (mut ch, mut ch_lost, mut int, mut int_lost) = (0u64, 0u64, 0u64, 0u64);
        for _ in 0..20_000 {
            let e = sample_erasure(&chain.primal, &model, &mut rng);
            for (i, class) in chain.primal.loss_class.iter().enumerate() {
                let lost = e.erased.get(i) as u64;
                match class {
                    LossClass::Channel => (ch += 1, ch_lost += lost),
                    LossClass::Internal => (int += 1, int_lost += lost),
                };
            }
        }
        let pc = model.loss_probability(LossClass::Channel);
        let pi = model.loss_probability(LossClass::Internal);
        assert!((pi - 0.1).abs() < 1e-12);
        let sc = (pc * (1.0 - pc) / ch as f64).sqrt();
        let si = (pi * (1.0 - pi) / int as f64).sqrt();
        assert!((ch_lost as f64 / ch as f64 - pc).abs() < 5.0 * sc);
        assert!((int_lost as f64 / int as f64 - pi).abs() < 5.0 * si);
    }

    #[test]
    fn perfect_links_give_unit_rate() {
        let chain = foliate(&gb48(), 2).unwrap();
        let r = estimate_etr(&chain, &LossModel::new(1.0, 0.0).unwrap(), 100, 1, DecoderKind::Exact).unwrap();
        assert_eq!(r.eta_eff, 1.0);
        assert_eq!(r.stderr_eta_eff, 0.0);
    }

    #[test]
    fn steane_break_even_and_factorization() {
        let l0 = spacing_for_transmission(0.5, 0.2);
        let model = LossModel::new(1.0, l0).unwrap();
        let r = estimate_etr(&foliate(&steane(), 1).unwrap(), &model, 40_000, 3, DecoderKind::Exact).unwrap();
        assert!((r.eta_eff - 0.5).abs() < 3.0 * r.stderr_eta_eff.max(1e-12), "{r:?}");
        assert_eq!(r.p_dual, 1.0);

        let model = LossModel::new(1.0, spacing_for_transmission(0.9, 0.2)).unwrap();
        let r = estimate_etr(&foliate(&steane(), 3).unwrap(), &model, 40_000, 4, DecoderKind::Exact).unwrap();
        let expected = steane_single_hop_etr(0.9).powi(3);
        assert!((r.eta_eff - expected).abs() < 3.0 * r.stderr_eta_eff, "{} vs {expected}", r.eta_eff);
    }

    #[test]
    fn result_is_independent_of_thread_count() {
        let chain = foliate(&toric(3).unwrap(), 2).unwrap();
        let model = LossModel::new(0.9, 4.0).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_etr(&chain, &model, 3000, 77, DecoderKind::Exact).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(3));
        let other_seed = estimate_etr(&chain, &model, 3000, 78, DecoderKind::Exact).unwrap();
        assert_ne!(one.p_primal, other_seed.p_primal);
    }

    #[test]
    fn greedy_run_reports_agreement() {
        let chain = foliate(&steane(), 2).unwrap();
        let model = LossModel::new(0.9, 6.0).unwrap();
        let g = estimate_etr(&chain, &model, 5000, 2, DecoderKind::Greedy).unwrap();
        let x = estimate_etr(&chain, &model, 5000, 2, DecoderKind::Exact).unwrap();
        assert_eq!(g.greedy_agreement, Some(1.0));
        assert_eq!(g.p_primal, x.p_primal);
        assert!(x.greedy_agreement.is_none());
        assert!(x.eta_eff <= x.p_primal.min(x.p_dual));
    }

    #[test]
    fn monotone_in_repeater_efficiency_and_spacing() {
        let chain = foliate(&steane(), 2).unwrap();
        let run = |eta_r: f64, l0: f64| {
            estimate_etr(&chain, &LossModel::new(eta_r, l0).unwrap(), 20_000, 8, DecoderKind::Exact).unwrap()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..3 {
            let l0 = rng.gen_range(1.0..8.0);
            let lo = run(0.85, l0);
            let hi = run(0.97, l0);
            let s = (lo.stderr_eta_eff.powi(2) + hi.stderr_eta_eff.powi(2)).sqrt();
            assert!(hi.eta_eff + 5.0 * s >= lo.eta_eff);
            let far = run(0.9, l0 + 4.0);
            let near = run(0.9, l0);
            let s = (far.stderr_eta_eff.powi(2) + near.stderr_eta_eff.powi(2)).sqrt();
            assert!(near.eta_eff + 5.0 * s >= far.eta_eff);
        }
    }
}
