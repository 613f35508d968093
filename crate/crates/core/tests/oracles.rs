//! Checks against oracles that enumerate stabilizer groups directly instead
//! of solving linear systems.

use foliated_link::codes::{steane, toric, CssCode};
use foliated_link::decoding::{decode_exact, decode_greedy, DecoderKind, ErasurePattern};
use foliated_link::foliation::{foliate, SyndromeSubgraph};
use foliated_link::gf2::BitVec;
use foliated_link::montecarlo::{
    brute_force_single_hop_etr, estimate_etr, spacing_for_transmission, steane_single_hop_etr, LossModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// All elements of the row space of `rows`, as bitmasks.
fn span(rows: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64];
    for &r in rows {
        let more: Vec<u64> = out.iter().map(|&v| v ^ r).collect();
        out.extend(more);
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn mask(bits: &[usize]) -> u64 {
    bits.iter().fold(0, |m, &b| m | 1 << b)
}

/// Single-hop rate with lossless repeaters: every X logical must have a
/// representative modulo the star/check group that avoids the erased data.
fn enumerated_single_hop(n: usize, checks: &[u64], logicals: &[u64], eta: f64) -> f64 {
    let group = span(checks);
    let mut total = 0.0;
    for erased in 0u64..1 << n {
        let ok = logicals.iter().all(|&l| group.iter().any(|&s| (l ^ s) & erased == 0));
        if ok {
            let lost = erased.count_ones() as i32;
            total += eta.powi(n as i32 - lost) * (1.0 - eta).powi(lost);
        }
    }
    total
}

fn rows_as_masks(code: &CssCode) -> Vec<u64> {
    code.h_x
        .row_iter()
        .map(|r| r.iter_ones().fold(0u64, |m, b| m | 1 << b))
        .collect()
}

#[test]
fn toric2_single_hop_regression() {
    let code = toric(2).unwrap();
    // Hand-picked X logicals: the vertical edges of row 0 and the
    // horizontal edges of column 0 (edge numbering: horizontal r*d+c,
    // vertical d*d+r*d+c).
    let logicals = [mask(&[4, 5]), mask(&[0, 2])];
    let plaquettes: Vec<u64> = code
        .h_z
        .row_iter()
        .map(|r| r.iter_ones().fold(0u64, |m, b| m | 1 << b))
        .collect();
    let stars = rows_as_masks(&code);
    let group = span(&stars);
    for &l in &logicals {
        assert!(plaquettes.iter().all(|p| (p & l).count_ones() % 2 == 0));
        assert!(!group.contains(&l));
    }
    assert!(!group.contains(&(logicals[0] ^ logicals[1])));

    let oracle = enumerated_single_hop(8, &stars, &logicals, 0.7);
    let lib = brute_force_single_hop_etr(&code, 0.7).unwrap();
    assert!((oracle - lib).abs() < 1e-12, "oracle {oracle} vs library {lib}");
    // Pinned regression constant for toric(2) at eta = 0.7.
    assert!((oracle - TORIC2_ETA07).abs() < 1e-12, "{oracle}");
    assert_eq!(brute_force_single_hop_etr(&code, 1.0).unwrap(), 1.0);

    let chain = foliate(&code, 1).unwrap();
    let l0 = spacing_for_transmission(0.7, 0.2);
    let r = estimate_etr(&chain, &LossModel::new(1.0, l0).unwrap(), 100_000, 11, DecoderKind::Exact).unwrap();
    assert!((r.eta_eff - oracle).abs() < 3.0 * r.stderr_eta_eff.max(1e-9), "{} vs {oracle}", r.eta_eff);
}

const TORIC2_ETA07: f64 = 0.66241189;

#[test]
fn steane_and_toric3_single_hop_match_enumeration() {
    let s = steane();
    let l = mask(&s.l_x.row(0).iter_ones().collect::<Vec<_>>());
    for eta in [0.0, 0.2, 0.5, 0.7, 0.9, 1.0] {
        let oracle = enumerated_single_hop(7, &rows_as_masks(&s), &[l], eta);
        assert!((oracle - steane_single_hop_etr(eta)).abs() < 1e-12);
        assert!((oracle - brute_force_single_hop_etr(&s, eta).unwrap()).abs() < 1e-12);
    }
    assert_eq!(steane_single_hop_etr(0.5), 0.5);

    let t = toric(3).unwrap();
    let logicals: Vec<u64> = t
        .l_x
        .row_iter()
        .map(|r| mask(&r.iter_ones().collect::<Vec<_>>()))
        .collect();
    let oracle = enumerated_single_hop(18, &rows_as_masks(&t), &logicals, 0.8);
    assert!((oracle - brute_force_single_hop_etr(&t, 0.8).unwrap()).abs() < 1e-12);
}

/// Decides recoverability of every logical by walking the whole stabilizer
/// group of a small subgraph.
fn group_oracle(sub: &SyndromeSubgraph, erased: &BitVec) -> Vec<bool> {
    let words = |v: &BitVec| -> u128 { v.iter_ones().fold(0u128, |m, b| m | 1 << b) };
    let stabs: Vec<u128> = sub.stabilizers.row_iter().map(|r| words(&r)).collect();
    let mut group = vec![0u128];
    for &s in &stabs {
        let more: Vec<u128> = group.iter().map(|&g| g ^ s).collect();
        group.extend(more);
    }
    let e = words(erased);
    sub.logicals
        .row_iter()
        .map(|l| {
            let l = words(&l);
            group.iter().any(|&g| (l ^ g) & e == 0)
        })
        .collect()
}

#[test]
fn exact_decoder_matches_group_enumeration() {
    // Steane N=1: 17 primal qubits, 6 stabilizers; N=2: 33 qubits, 9 stabilizers.
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for hops in [1, 2] {
        let chain = foliate(&steane(), hops).unwrap();
        for sub in [&chain.primal, &chain.dual] {
            assert!(sub.len() <= 128 && sub.stabilizers.rows() <= 16);
            for _ in 0..5000 {
                let p: f64 = rng.gen_range(0.0..0.6);
                let erased = BitVec::from_bools(&(0..sub.len()).map(|_| rng.gen_bool(p)).collect::<Vec<_>>());
                let pattern = ErasurePattern::new(sub, erased.clone()).unwrap();
                let expect = group_oracle(sub, &erased);
                let exact = decode_exact(sub, &pattern).unwrap();
                let got: Vec<bool> = (0..expect.len()).map(|i| exact.recoverable.contains(&i)).collect();
                assert_eq!(got, expect, "N={hops} {} erased={:?}", sub.label, pattern.positions());
                let greedy = decode_greedy(sub, &pattern).unwrap();
                assert!(greedy.recoverable.iter().all(|i| exact.recoverable.contains(i)));
            }
        }
    }
}
