use ipred_core::cqi::{CqiConfig, Quantizer};
use ipred_core::harness::{ecdf, rae};
use ipred_core::link_adaptation::nr_table3_efficiencies;
use ipred_core::rng::SimRng;
use ipred_core::scenario::{init_deployment, step_mobility};
use ipred_core::{McsTable, ScenarioConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use std::sync::OnceLock;

fn table() -> &'static McsTable {
    static TABLE: OnceLock<McsTable> = OnceLock::new();
    TABLE.get_or_init(|| McsTable::analytic(160, &nr_table3_efficiencies()))
}

proptest! {
    #[test]
    fn quantizer_error_is_bounded(min in -30.0f64..30.0, u in 0.0f64..1.0, levels in 2usize..64, span in 0.5f64..60.0) {
        let cfg = CqiConfig { n_levels: levels, sinr_span_db: span, ..CqiConfig::default() };
        let q = Quantizer::new(&cfg, min);
        let x = min + u * span;
        let err = (q.dequantize(q.quantize(x)).unwrap() - x).abs();
        prop_assert!(err <= span / (2.0 * levels as f64) + 1e-12);
    }

    #[test]
    fn quantizer_is_monotone(a in -100.0f64..100.0, b in -100.0f64..100.0) {
        let q = Quantizer::new(&CqiConfig::default(), 3.0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(q.quantize(lo) <= q.quantize(hi));
        prop_assert!(q.quantize(hi) < 29);
    }

    #[test]
    fn selection_is_monotone(a in -25.0f64..45.0, b in -25.0f64..45.0, exp in 1i32..6) {
        let target = 10f64.powi(-exp);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (s_lo, s_hi) = (table().select(lo, target), table().select(hi, target));
        prop_assert!(s_lo.index <= s_hi.index);
        if !s_hi.infeasible {
            prop_assert!(table().achieved_bler(s_hi.index, hi) <= target);
        }
    }

    #[test]
    fn rae_is_symmetric_in_scale(i in 1e-12f64..1e-3, k in 0.0f64..4.0) {
        let e = rae(i, k * i).unwrap();
        prop_assert!((e - (k - 1.0).abs()).abs() < 1e-12);
    }

    #[test]
    fn ecdf_is_a_distribution(xs in prop::collection::vec(-1e3f64..1e3, 1..200)) {
        let c = ecdf(&xs).unwrap();
        prop_assert_eq!(c.len(), xs.len());
        prop_assert!(c.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 < w[1].1));
        prop_assert_eq!(c.last().unwrap().1, 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mobility_stays_inside_the_area(seed in any::<u64>(), speed in 0.0f64..2000.0) {
        let cfg = ScenarioConfig { speed, ..ScenarioConfig::default() };
        let mut rng = SimRng::seed_from_u64(seed);
        let mut state = init_deployment(&cfg, &mut rng).unwrap();
        let groups = state.subband_of.clone();
        for _ in 0..500 {
            state = step_mobility(&state, &cfg, &mut rng);
            for p in &state.poses {
                prop_assert!((0.0..=cfg.area_side).contains(&p.position[0]));
                prop_assert!((0.0..=cfg.area_side).contains(&p.position[1]));
            }
        }
        prop_assert_eq!(state.subband_of, groups);
    }

    #[test]
    fn deployment_is_deterministic(seed in any::<u64>()) {
        let cfg = ScenarioConfig::default();
        let a = init_deployment(&cfg, &mut SimRng::seed_from_u64(seed)).unwrap();
        let b = init_deployment(&cfg, &mut SimRng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(&a, &b);
        for i in 0..a.n_subnets() {
            for j in i + 1..a.n_subnets() {
                let d = (a.poses[i].position[0] - a.poses[j].position[0])
                    .hypot(a.poses[i].position[1] - a.poses[j].position[1]);
                prop_assert!(d >= cfg.min_separation);
            }
            let o = a.poses[i].ue_offset;
            prop_assert!(o[0].hypot(o[1]) <= cfg.cell_radius);
        }
    }
}

#[test]
fn deployment_is_uniform_without_separation() {
    let cfg = ScenarioConfig {
        n_subnets: 4,
        n_subbands: 1,
        min_separation: 2.5,
        cell_radius: 2.0,
        ..ScenarioConfig::default()
    };
    // Separation small relative to the area keeps the marginal close to uniform.
    let mut rng = SimRng::seed_from_u64(5);
    let mut sum = [0.0; 2];
    let mut n = 0.0;
    for _ in 0..10_000 {
        let s = init_deployment(&cfg, &mut rng).unwrap();
        for p in &s.poses {
            sum[0] += p.position[0];
            sum[1] += p.position[1];
            n += 1.0;
        }
    }
    for axis in sum {
        let mean = axis / n;
        assert!((mean / (cfg.area_side / 2.0) - 1.0).abs() < 0.02, "{mean}");
    }
}
