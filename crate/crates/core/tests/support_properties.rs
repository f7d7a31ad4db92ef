use std::collections::HashMap;
use std::sync::Arc;

use ia_feasibility::channel::{build_blocks, sample_instance, ChannelFamily};
use ia_feasibility::solver::{solve, SolverConfig, Verdict};
use ia_feasibility::support::*;
use proptest::prelude::*;

/// Every nonempty subset of `0..t`, as sorted index lists.
fn subsets(t: usize) -> Vec<Vec<usize>> {
    (1u32..1 << t).map(|m| (0..t).filter(|&i| m >> i & 1 == 1).collect()).collect()
}

/// Nonzero equation count of the SISO partial system computed straight from
/// the definition: equation (k, j) keeps the monomial u_kt v_jt for every
/// slot t, and the monomial survives iff both entries are in the support.
fn siso_partial_count_oracle(p: &SupportPattern) -> usize {
    let k = p.r.len();
    let mut count = 0;
    for rx in 0..k {
        for tx in 0..k {
            if rx != tx && (0..p.t).any(|t| p.r[rx].contains(&t) && p.s[tx].contains(&t)) {
                count += 1;
            }
        }
    }
    count
}

#[test]
fn bridge_holds_for_every_small_siso_pattern() {
    for t in 1..=3 {
        let sets = subsets(t);
        let family = ChannelFamily::SisoGenericExt { t };
        for k in 1..=4 {
            let mut systems: HashMap<(Vec<usize>, Vec<usize>), ZfSystem> = HashMap::new();
            let total = sets.len().pow(2 * k as u32);
            for code in 0..total {
                let mut c = code;
                let mut pick = || {
                    let s = sets[c % sets.len()].clone();
                    c /= sets.len();
                    s
                };
                let r: Vec<Vec<usize>> = (0..k).map(|_| pick()).collect();
                let s: Vec<Vec<usize>> = (0..k).map(|_| pick()).collect();
                let p = SupportPattern::new(t, r, s).unwrap();
                let key = (p.receive_anchors(), p.transmit_anchors());
                let sys = systems.entry(key.clone()).or_insert_with(|| {
                    build_zf_system_with_anchors(&family, k, &key.0, &key.1).unwrap()
                });
                let structural = count_nonzero(&restrict(sys, p.variables()));
                let report = counting_verdict(&p);
                assert_eq!(structural, report.pj_size, "T={t} K={k} {p:?}");
                assert_eq!(report.pj_size, siso_partial_count_oracle(&p));
                assert_eq!(report.omega.len() + report.omega_c.len(), k * (k - 1));
                assert_eq!(report.ruled_out, report.pj_size > report.j_size);
            }
        }
    }
}

#[test]
fn exhaustive_siso_t2_enumeration() {
    let family = ChannelFamily::SisoGenericExt { t: 2 };
    let k4: Vec<_> = enumerate_block_patterns(&family, 4, DEFAULT_PATTERN_BUDGET).unwrap().collect();
    assert_eq!(k4.len(), 3usize.pow(8));
    assert!(k4.iter().all(|(_, r)| !survives(r)));
    let k3_survivors: Vec<_> = enumerate_block_patterns(&family, 3, DEFAULT_PATTERN_BUDGET)
        .unwrap()
        .filter(|(_, r)| survives(r))
        .collect();
    assert!(!k3_survivors.is_empty());
}

#[test]
fn constant_mimo_partial_systems_keep_every_equation() {
    let family = ChannelFamily::MimoConstant { mt: 2, mr: 2 };
    for k in 2..=4 {
        let sys = build_zf_system(&family, k).unwrap();
        for support in 0..1u128 << sys.n {
            assert_eq!(count_nonzero(&restrict(&sys, support)), k * (k - 1));
        }
    }
}

/// Feasible solver beams never have a support pattern the counting test
/// rules out.
#[test]
fn feasible_beams_are_never_ruled_out() {
    let cases = [
        (ChannelFamily::SisoGenericExt { t: 2 }, 2),
        (ChannelFamily::SisoGenericExt { t: 3 }, 3),
        (ChannelFamily::MimoConstant { mt: 2, mr: 2 }, 3),
        (ChannelFamily::MimoGenericExt { mt: 1, mr: 2, t: 2 }, 4),
        (ChannelFamily::SisoBlockFading { block_lengths: vec![1, 2] }, 3),
    ];
    let mut checked = 0;
    for seed in 0..100u64 {
        let (family, k) = &cases[seed as usize % cases.len()];
        let blocks = Arc::new(build_blocks(family).unwrap());
        let ch = sample_instance(&blocks, *k, seed).unwrap();
        let sol = solve(&ch, &SolverConfig { seed, ..Default::default() }).unwrap();
        if sol.report.verdict != Verdict::Feasible {
            continue;
        }
        let pattern = empirical_block_pattern(&sol.beams, family.slot_layout().unwrap(), SUPPORT_THRESHOLD).unwrap();
        assert!(!counting_verdict(&pattern).ruled_out, "seed {seed}: {pattern:?}");
        checked += 1;
    }
    assert_eq!(checked, 100);
}

fn siso_pattern() -> impl Strategy<Value = SupportPattern> {
    (1usize..=4, 1usize..=5).prop_flat_map(|(t, k)| {
        let set = proptest::collection::btree_set(0..t, 1..=t).prop_map(|s| s.into_iter().collect::<Vec<_>>());
        (
            Just(t),
            proptest::collection::vec(set.clone(), k),
            proptest::collection::vec(set, k),
        )
            .prop_map(|(t, r, s)| SupportPattern::new(t, r, s).unwrap())
    })
}

proptest! {
    #[test]
    fn partition_identity(p in siso_pattern()) {
        let (omega, omega_c) = omega_partition(&p);
        let k = p.r.len();
        prop_assert_eq!(omega.len() + omega_c.len(), k * (k - 1));
    }

    #[test]
    fn restriction_is_monotone(t in 1usize..=3, k in 2usize..=3, a in any::<u128>(), b in any::<u128>()) {
        let sys = build_zf_system(&ChannelFamily::SisoGenericExt { t }, k).unwrap();
        let all = if sys.n == 0 { 0 } else { (1u128 << sys.n) - 1 };
        let small = a & b & all;
        let large = (a | small) & all;
        prop_assert!(count_nonzero(&restrict(&sys, small)) <= count_nonzero(&restrict(&sys, large)));
    }

    #[test]
    fn block_counts_match_entry_counts_for_siso(p in siso_pattern()) {
        let layout = ia_feasibility::channel::SlotLayout { t: p.t, mt: 1, mr: 1 };
        let b = BlockSupportPattern::new(layout, p.r.clone(), p.s.clone()).unwrap();
        let (rb, re) = (counting_verdict(&b), counting_verdict(&p));
        prop_assert_eq!(rb.j_size, re.j_size);
        prop_assert!(!rb.j_is_upper_bound);
        prop_assert_eq!(rb.pj_size, re.pj_size);
    }
}
