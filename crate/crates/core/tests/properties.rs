use std::path::Path;

use ddcv::eval::{d1, epe, optimal_auc, pep, sparsification};
use ddcv::imgio::{decode_pfm, decode_png16, encode_pfm, encode_png16};
use ddcv::losses::{dds_loss, ldr_loss, lrc_loss, select_references, smoothness_depth, LdrParams};
use ddcv::{confidence_map, global_scale, vote, DdcvParams, NeighborhoodSpec, Pixel, ScalarMap};
use proptest::prelude::*;

fn map_strategy(lo: f64, hi: f64) -> impl Strategy<Value = ScalarMap> {
    (3usize..14, 3usize..14).prop_flat_map(move |(w, h)| {
        prop::collection::vec(lo..hi, w * h).prop_map(move |v| ScalarMap::new(w, h, v).unwrap())
    })
}

/// (disparity, depth) pair of equal shape with some invalid pixels.
fn pair_strategy() -> impl Strategy<Value = (ScalarMap, ScalarMap)> {
    (4usize..16, 4usize..16).prop_flat_map(|(w, h)| {
        let n = w * h;
        (
            prop::collection::vec(0.5f64..60.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(prop::bool::weighted(0.9), n),
        )
            .prop_map(move |(d, t, m)| {
                (
                    ScalarMap::with_mask(w, h, d, m).unwrap(),
                    ScalarMap::new(w, h, t).unwrap(),
                )
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn confidence_is_a_fraction((d, t) in pair_strategy()) {
        let c = confidence_map(&d, &t, &DdcvParams::default()).unwrap();
        for (i, &v) in c.values().iter().enumerate() {
            prop_assert_eq!(c.mask()[i], d.mask()[i] && t.mask()[i]);
            if c.mask()[i] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn ranking_vote_is_symmetric((d, t) in pair_strategy(), a in 0usize..16, b in 0usize..16) {
        let (w, h) = (d.width(), d.height());
        let p = Pixel::new(a % w, b % h);
        let q = Pixel::new(b % w, a % h);
        prop_assume!(d.is_valid(p.x, p.y) && d.is_valid(q.x, q.y));
        let gamma = match global_scale(&d, &t, &NeighborhoodSpec::default()) {
            Ok(g) => g,
            Err(_) => return Ok(()),
        };
        let params = DdcvParams::default();
        prop_assert_eq!(
            vote(p, q, &d, &t, gamma, &params).unwrap(),
            vote(q, p, &d, &t, gamma, &params).unwrap()
        );
    }

    #[test]
    fn exact_affine_depth_gives_full_confidence(
        w in 5usize..20,
        h in 5usize..20,
        raw in prop::collection::vec(1u8..40, 400),
        log2_scale in -4i32..5,
        offset in -1000i32..1000,
    ) {
        // integer disparities and a power-of-two scale keep every difference exact
        let d = ScalarMap::from_fn(w, h, |x, y| f64::from(raw[y * 20 + x])).unwrap();
        prop_assume!(d.values().iter().any(|&v| v != d.values()[0]));
        let a = 2f64.powi(log2_scale);
        let t = d.map(|v| a * v + f64::from(offset)).unwrap();
        let c = confidence_map(&d, &t, &DdcvParams::default()).unwrap();
        prop_assert!(c.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn scale_tracks_depth_scaling((d, t) in pair_strategy(), s in 0.1f64..10.0) {
        let spec = NeighborhoodSpec::default();
        let Ok(g) = global_scale(&d, &t, &spec) else { return Ok(()) };
        let g2 = global_scale(&d, &t.scale(s).unwrap(), &spec).unwrap();
        prop_assert!((g2 - s * g).abs() <= 1e-9 * s * g.max(1e-300));
    }

    #[test]
    fn sparsification_bounded_by_oracle(
        (est, conf) in (10usize..30).prop_flat_map(|n| (
            prop::collection::vec(0.0f64..50.0, n),
            prop::collection::vec(0.0f64..1.0, n),
        )),
        steps in 2usize..10,
    ) {
        let n = est.len();
        prop_assume!(n >= steps);
        let est = ScalarMap::new(n, 1, est).unwrap();
        let gt = ScalarMap::filled(n, 1, 25.0).unwrap();
        let conf = ScalarMap::new(n, 1, conf).unwrap();
        let curve = sparsification(&est, &gt, &conf, steps).unwrap();
        let best = optimal_auc(&est, &gt, steps).unwrap();
        prop_assert!(curve.auc >= best - 1e-9 * best.max(1.0));
        let last = curve.samples.last().unwrap();
        prop_assert_eq!(last.0, 1.0);
        prop_assert!((last.1 - epe(&est, &gt).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn metrics_ignore_pixel_order(est in prop::collection::vec(0.0f64..80.0, 12), gt in prop::collection::vec(0.5f64..80.0, 12), rot in 0usize..12) {
        let a = ScalarMap::new(4, 3, est.clone()).unwrap();
        let b = ScalarMap::new(4, 3, gt.clone()).unwrap();
        let mut e2 = est;
        let mut g2 = gt;
        e2.rotate_left(rot);
        g2.rotate_left(rot);
        let a2 = ScalarMap::new(3, 4, e2).unwrap();
        let b2 = ScalarMap::new(3, 4, g2).unwrap();
        prop_assert!((epe(&a, &b).unwrap() - epe(&a2, &b2).unwrap()).abs() < 1e-9);
        prop_assert_eq!(pep(&a, &b, 2.0).unwrap(), pep(&a2, &b2, 2.0).unwrap());
        prop_assert_eq!(d1(&a, &b).unwrap(), d1(&a2, &b2).unwrap());
    }

    #[test]
    fn lrc_is_bounded(d in map_strategy(0.1, 1.9), off in 0.0f64..5.0) {
        let r = d.offset(off).unwrap();
        let v = lrc_loss(&d, &r).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn monotone_depth_has_no_ranking_penalty(d in map_strategy(0.5, 30.0), e in 0.3f64..3.0) {
        // any strictly increasing function of disparity preserves every ranking
        let t = d.map(|v| v.powf(e)).unwrap();
        let conf = ScalarMap::filled(d.width(), d.height(), 1.0).unwrap();
        let refs = select_references(&conf, &LdrParams::default()).unwrap();
        prop_assert_eq!(ldr_loss(&d, &t, &refs).unwrap().value, 0.0);
    }

    #[test]
    fn dds_dominates_depth_smoothness((d, t) in pair_strategy()) {
        let dds = dds_loss(&d, &t).unwrap().value;
        let ds = smoothness_depth(&d, &t).unwrap().value;
        prop_assert!(dds >= ds - 1e-12);
    }

    #[test]
    fn pfm_round_trip(d in map_strategy(-1e6, 1e6), holes in prop::collection::vec(any::<bool>(), 200)) {
        let values: Vec<f64> = d.values().iter().map(|&v| f64::from(v as f32)).collect();
        let mask: Vec<bool> = (0..d.len()).map(|i| !holes[i]).collect();
        let m = ScalarMap::with_mask(d.width(), d.height(), values, mask).unwrap();
        let back = decode_pfm(&encode_pfm(&m).unwrap(), Path::new("mem.pfm")).unwrap();
        prop_assert_eq!(back.mask(), m.mask());
        for i in 0..m.len() {
            if m.mask()[i] {
                prop_assert_eq!(back.values()[i].to_bits(), m.values()[i].to_bits());
            }
        }
    }

    #[test]
    fn png16_round_trip(d in map_strategy(0.0, 255.0)) {
        let back = decode_png16(&encode_png16(&d).unwrap(), Path::new("mem.png")).unwrap();
        prop_assert_eq!(back.mask(), d.mask());
        for (a, b) in back.values().iter().zip(d.values()) {
            prop_assert!((a - b).abs() <= 1.0 / 256.0);
        }
    }
}
