//! Property tests for the transform, the codec, and the metrics.

use proptest::prelude::*;

use eegc_core::codec::{
    dequantize, encode, quantize, threshold_to_ratio, EncodedBlock, QuantizerSpec,
};
use eegc_core::metrics::prd;
use eegc_core::rng::SplitMix64;
use eegc_core::signal_io::Signal;
use eegc_core::wavelet::{dwt, idwt, WaveletSpec, SUPPORTED_FILTER_LENGTHS};

fn random_samples(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    (0..n).map(|_| rng.next_f64() * 200.0 - 100.0).collect()
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dwt_round_trip_and_parseval(
        k in 5usize..=10,
        levels in 1usize..=5,
        f_idx in 0usize..10,
        seed in any::<u64>(),
    ) {
        let n = 1usize << k;
        let spec = WaveletSpec::new(SUPPORTED_FILTER_LENGTHS[f_idx], levels).unwrap();
        let x = random_samples(seed, n);
        let coeffs = dwt(&x, &spec).unwrap();
        let back = idwt(&coeffs, &spec).unwrap();
        let diff: Vec<f64> = x.iter().zip(&back).map(|(a, b)| a - b).collect();
        prop_assert!(l2(&diff) <= 1e-9 * l2(&x));
        let ex = l2(&x);
        let ec = l2(coeffs.values());
        prop_assert!((ec - ex).abs() <= 1e-9 * ex);
    }

    #[test]
    fn dwt_is_linear(
        k in 5usize..=8,
        f_idx in 0usize..10,
        seed in any::<u64>(),
        a in -10.0f64..10.0,
        b in -10.0f64..10.0,
    ) {
        let n = 1usize << k;
        let spec = WaveletSpec::new(SUPPORTED_FILTER_LENGTHS[f_idx], 3).unwrap();
        let x = random_samples(seed, n);
        let y = random_samples(seed.wrapping_add(1), n);
        let combo: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let cx = dwt(&x, &spec).unwrap();
        let cy = dwt(&y, &spec).unwrap();
        let cc = dwt(&combo, &spec).unwrap();
        let scale = l2(cc.values()).max(1.0);
        for ((&u, &v), &w) in cx.values().iter().zip(cy.values()).zip(cc.values()) {
            prop_assert!((a * u + b * v - w).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn zeroed_energy_is_monotone_in_ratio(
        k in 4usize..=8,
        f_idx in 0usize..10,
        seed in any::<u64>(),
        cr_lo in 0.0f64..50.0,
        delta in 1.0f64..49.0,
    ) {
        let n = 1usize << k;
        let spec = WaveletSpec::new(SUPPORTED_FILTER_LENGTHS[f_idx], 2).unwrap();
        let coeffs = dwt(&random_samples(seed, n), &spec).unwrap();
        let zeroed = |cr: f64| -> f64 {
            let kept = threshold_to_ratio(&coeffs, cr).unwrap();
            kept.values()
                .iter()
                .zip(kept.keep_mask())
                .filter_map(|(&v, &keep)| (!keep).then_some(v * v))
                .sum()
        };
        // by Parseval the reconstruction error is the zeroed energy, which
        // can only grow as more coefficients are dropped
        prop_assert!(zeroed(cr_lo) <= zeroed(cr_lo + delta) + 1e-12);
    }

    #[test]
    fn block_serialization_round_trips(
        k in 4usize..=9,
        f_idx in 0usize..10,
        levels in 1usize..=4,
        seed in any::<u64>(),
        cr in 0.0f64..99.0,
        qbits in 1u8..=16,
    ) {
        let n = 1usize << k;
        let samples = random_samples(seed, n);
        let signal = Signal::new(samples, 173.61).unwrap();
        let spec = WaveletSpec::new(SUPPORTED_FILTER_LENGTHS[f_idx], levels).unwrap();
        let block = encode(&signal, &spec, cr, qbits).unwrap();
        let bytes = block.serialize();
        let back = EncodedBlock::deserialize(&bytes).unwrap();
        prop_assert_eq!(&block, &back);
        prop_assert_eq!(bytes, back.serialize());
    }

    #[test]
    fn prd_is_scale_invariant(
        seed in any::<u64>(),
        scale in prop::sample::select(vec![1e-6f64, 0.037, 0.5, 3.0, 1e4]),
    ) {
        let x = random_samples(seed, 64);
        let xr = random_samples(seed.wrapping_add(7), 64);
        let base = prd(&x, &xr).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v * scale).collect();
        let xrs: Vec<f64> = xr.iter().map(|v| v * scale).collect();
        let scaled = prd(&xs, &xrs).unwrap();
        prop_assert!((scaled - base).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn prd_matches_zeroed_coefficient_energy(
        k in 5usize..=9,
        f_idx in 0usize..10,
        seed in any::<u64>(),
        cr in 10.0f64..95.0,
    ) {
        let n = 1usize << k;
        let x = random_samples(seed, n);
        let spec = WaveletSpec::new(SUPPORTED_FILTER_LENGTHS[f_idx], 3).unwrap();
        let coeffs = dwt(&x, &spec).unwrap();
        let kept = threshold_to_ratio(&coeffs, cr).unwrap();
        let xr = idwt(&kept, &spec).unwrap();
        let signal_domain = prd(&x, &xr).unwrap();
        let zeroed: f64 = kept
            .values()
            .iter()
            .zip(kept.keep_mask())
            .filter_map(|(&v, &keep)| (!keep).then_some(v * v))
            .sum();
        let total: f64 = kept.values().iter().map(|v| v * v).sum();
        let coeff_domain = (zeroed / total).sqrt() * 100.0;
        prop_assert!(
            (signal_domain - coeff_domain).abs() <= 1e-9 * coeff_domain.max(1e-9),
            "signal {} vs coefficient {}",
            signal_domain,
            coeff_domain
        );
    }

    #[test]
    fn quantizer_error_within_one_step(
        bits in 1u8..=16,
        lo in -100.0f64..0.0,
        width in 0.1f64..1000.0,
        frac in 0.0f64..1.0,
    ) {
        let spec = QuantizerSpec::new(bits, lo, lo + width).unwrap();
        let v = lo + frac * width;
        let back = dequantize(&quantize(&[v], &spec), &spec)[0];
        prop_assert!((v - back).abs() <= width / (1u64 << bits) as f64 + 1e-12);
    }
}
