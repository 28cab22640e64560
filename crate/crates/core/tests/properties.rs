use proptest::prelude::*;

use qed_core::expansion::{delay_coeffs, expansion_coeffs, idle_coeffs, mills_ratio, queue_coeffs};
use qed_core::markov::{
    performance_metrics, stationary_distribution, AdmissionPolicy, JoinSequence, RevenueStructure, ScaledProfile,
    SystemConfig,
};
use qed_core::RevenueProfile;

fn policy() -> impl Strategy<Value = AdmissionPolicy> {
    prop_oneof![
        (0.0..4.0f64).prop_map(|eta| AdmissionPolicy::threshold(eta).unwrap()),
        (0.0..0.999f64).prop_map(|p| AdmissionPolicy::Exact(JoinSequence::constant(p).unwrap())),
        (0.2..3.0f64).prop_map(|r| AdmissionPolicy::Profile(ScaledProfile::exponential(r).unwrap())),
    ]
}

fn config() -> impl Strategy<Value = SystemConfig> {
    (1u64..600, -2.0..3.0f64, policy()).prop_filter_map("stable config", |(s, g, p)| {
        let cfg = SystemConfig::new(s, g.min(0.9 * (s as f64).sqrt()), p).ok()?;
        stationary_distribution(&cfg).ok().map(|_| cfg)
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn normalisation_and_detailed_balance(cfg in config()) {
        let d = stationary_distribution(&cfg).unwrap();
        let total: f64 = d.probs.iter().sum::<f64>() + d.tail_mass_bound;
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(d.tail_mass_bound <= 1e-12);
        prop_assert!(d.probs.iter().all(|p| *p >= 0.0));
        let s = cfg.s as usize;
        for k in s..d.k_max() {
            if d.probs[k + 1] > 0.0 {
                prop_assert!(rel(cfg.lambda() * d.join_prob(k) * d.probs[k], s as f64 * d.probs[k + 1]) <= 1e-12);
            }
        }
    }

    #[test]
    fn little_and_flow_balance(cfg in config()) {
        let m = performance_metrics(&cfg, &RevenueStructure::exact(|_| 0.0)).unwrap();
        let lambda = cfg.lambda();
        prop_assert!((0.0..=1.0).contains(&m.delay_prob) && (0.0..=1.0).contains(&m.rejection_prob));
        prop_assert!(m.mean_queue >= 0.0 && m.mean_idle >= 0.0 && m.expected_wait >= 0.0);
        if m.mean_queue > 0.0 {
            prop_assert!(rel(lambda * m.expected_wait, m.mean_queue) <= 1e-10);
        }
        prop_assert!(rel(lambda * (1.0 - m.rejection_prob), cfg.s as f64 - m.mean_idle) <= 1e-10);
    }

    #[test]
    fn representation_equivalences(cfg in config()) {
        let s = cfg.s;
        let m = performance_metrics(&cfg, &RevenueStructure::exact(|_| 0.0)).unwrap();
        let via = |r: RevenueStructure| performance_metrics(&cfg, &r).unwrap().revenue_rate;
        let d = via(RevenueStructure::exact(move |k| if k >= s { 1.0 } else { 0.0 }));
        let q = via(RevenueStructure::exact(move |k| k.saturating_sub(s) as f64));
        let i = via(RevenueStructure::exact(move |k| s.saturating_sub(k) as f64));
        prop_assert!((d - m.delay_prob).abs() <= 1e-12 * m.delay_prob.max(1.0));
        prop_assert!((q - m.mean_queue).abs() <= 1e-12 * m.mean_queue.max(1.0));
        prop_assert!((i - m.mean_idle).abs() <= 1e-12 * m.mean_idle.max(1.0));
    }

    #[test]
    fn specialised_coefficients_share_the_general_path(gamma in -2.0..3.0f64, eta in 0.1..5.0f64) {
        let p = AdmissionPolicy::threshold(eta).unwrap();
        for (special, profile) in [
            (delay_coeffs(gamma, &p).unwrap(), RevenueProfile::delay()),
            (queue_coeffs(gamma, &p).unwrap(), RevenueProfile::queue()),
            (idle_coeffs(gamma, &p).unwrap(), RevenueProfile::idle()),
        ] {
            let c = expansion_coeffs(&profile, &p, gamma).unwrap();
            prop_assert!((special.0 - c.r0).abs() <= 1e-12 * c.r0.abs().max(1.0));
            prop_assert!((special.1 - c.r1).abs() <= 1e-12 * c.r1.abs().max(1.0));
        }
    }

    #[test]
    fn general_profile_matches_piecewise(gamma in -2.0..3.0f64, eta in 0.1..5.0f64, a in 0.0..2.0f64, b in 0.0..2.0f64) {
        let p = AdmissionPolicy::threshold(eta).unwrap();
        let piecewise = RevenueProfile::Piecewise { left: [0.3, a, 0.0, 0.0], right: [0.3, -b, 0.0, 0.0] };
        let general = RevenueProfile::general("linear", move |x| if x < 0.0 { 0.3 + a * x } else { 0.3 - b * x });
        let c = expansion_coeffs(&piecewise, &p, gamma).unwrap();
        let g = expansion_coeffs(&general, &p, gamma).unwrap();
        prop_assert!((c.r0 - g.r0).abs() <= 1e-9 * c.r0.abs().max(1.0));
        prop_assert!((c.r1 - g.r1).abs() <= 1e-9 * c.r1.abs().max(1.0));
    }
}

#[test]
fn mills_ratio_strictly_increasing() {
    let mut prev = 0.0;
    for i in 0..=4000 {
        let g = -20.0 + i as f64 * 0.01;
        let m = mills_ratio(g);
        assert!(m > prev, "not increasing at {g}");
        prev = m;
    }
}
