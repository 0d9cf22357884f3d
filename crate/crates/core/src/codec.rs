//! Threshold-based compression to a target ratio, uniform quantization, and
//! the bit-exact block format.
//!
//! Compression is driven by the target ratio: the encoder keeps the M
//! largest-magnitude coefficients with `M = round((1 - cr/100) * Ns)`, so the
//! ratio is the controlled quantity rather than a fixed threshold value. The
//! significance map is stored raw (no entropy coding) and the quantizer range
//! is the min/max of the retained coefficients, stored in the header.

use crate::error::{Error, Result};
use crate::signal_io::{Signal, DEFAULT_SAMPLING_RATE_HZ};
use crate::wavelet::{dwt, idwt, CoefficientSet, WaveletSpec};

/// Leading bytes of every encoded block.
pub const MAGIC: [u8; 4] = *b"EEGC";

/// Version of the serialized block layout.
pub const BITSTREAM_VERSION: u8 = 1;

/// Fixed header size in bytes.
pub const HEADER_LEN: usize = 38;

/// Uniform mid-rise quantizer over `[lo, hi]` with `2^bits` levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerSpec {
    pub bits: u8,
    pub lo: f64,
    pub hi: f64,
}

impl QuantizerSpec {
    pub fn new(bits: u8, lo: f64, hi: f64) -> Result<Self> {
        if bits < 1 || bits > 16 {
            return Err(Error::Invalid(format!(
                "quantizer bits must be in 1..=16, got {}",
                bits
            )));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Invalid(format!(
                "quantizer range must satisfy lo < hi, got [{}, {}]",
                lo, hi
            )));
        }
        Ok(QuantizerSpec { bits, lo, hi })
    }

    pub fn levels(&self) -> u32 {
        1u32 << self.bits
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.levels() as f64
    }
}

/// Quantize values to integer codes. Out-of-range values clamp to the
/// extremal cells.
pub fn quantize(values: &[f64], spec: &QuantizerSpec) -> Vec<u32> {
    let step = spec.step();
    let max_code = spec.levels() - 1;
    values
        .iter()
        .map(|&v| {
            let cell = ((v - spec.lo) / step).floor();
            if cell < 0.0 {
                0
            } else if cell > max_code as f64 {
                max_code
            } else {
                cell as u32
            }
        })
        .collect()
}

/// Map codes back to the midpoints of their quantizer cells.
pub fn dequantize(codes: &[u32], spec: &QuantizerSpec) -> Vec<f64> {
    let step = spec.step();
    let mask = spec.levels() - 1;
    codes
        .iter()
        .map(|&c| spec.lo + ((c & mask) as f64 + 0.5) * step)
        .collect()
}

/// Number of coefficients kept for a target ratio: `round((1 - cr/100) * ns)`
/// with at least one coefficient always retained.
pub fn target_kept_count(cr: f64, ns: usize) -> Result<usize> {
    if !(0.0..100.0).contains(&cr) {
        return Err(Error::Invalid(format!(
            "compression ratio must be in [0, 100), got {}",
            cr
        )));
    }
    let m = ((1.0 - cr / 100.0) * ns as f64).round() as usize;
    Ok(m.clamp(1, ns))
}

/// Retain the M largest-magnitude coefficients for the target ratio. Ties
/// are broken in favor of the smaller flat index.
pub fn threshold_to_ratio(coeffs: &CoefficientSet, cr: f64) -> Result<CoefficientSet> {
    let ns = coeffs.ns();
    let m = target_kept_count(cr, ns)?;
    let values = coeffs.values();
    let mut order: Vec<usize> = (0..ns).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .abs()
            .partial_cmp(&values[a].abs())
            .expect("coefficients are finite")
            .then(a.cmp(&b))
    });
    let mut mask = vec![false; ns];
    for &i in order.iter().take(m) {
        mask[i] = true;
    }
    Ok(coeffs.with_mask(mask))
}

/// A compressed block: header, raw significance map, fixed-width payload.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedBlock {
    pub version: u8,
    pub flags: u8,
    pub ns: u32,
    pub levels: u8,
    pub filter_length: u8,
    pub qbits: u8,
    pub target_cr: f64,
    pub lo: f64,
    pub hi: f64,
    /// `ceil(ns/8)` bytes; bit `i` lives in byte `i/8`, LSB-first.
    pub significance: Vec<u8>,
    /// `M` codes of `qbits` bits each, packed LSB-first and zero-padded to a
    /// byte boundary.
    pub payload: Vec<u8>,
}

impl EncodedBlock {
    /// Retained-coefficient count implied by the header. This is the payload
    /// code count even when the significance map has been corrupted.
    pub fn expected_m(&self) -> usize {
        target_kept_count(self.target_cr, self.ns as usize).expect("header cr validated")
    }

    /// Payload length in bits, `M * qbits`.
    pub fn payload_bit_len(&self) -> usize {
        self.expected_m() * self.qbits as usize
    }

    pub fn significance_popcount(&self) -> usize {
        self.significance
            .iter()
            .map(|b| b.count_ones() as usize)
            .sum()
    }

    /// Compression ratio achieved by the significance map, `(1 - M/Ns) * 100`.
    pub fn achieved_cr(&self) -> f64 {
        (1.0 - self.significance_popcount() as f64 / self.ns as f64) * 100.0
    }

    /// Total serialized size in bytes.
    pub fn serialized_len(&self) -> usize {
        HEADER_LEN + self.significance.len() + self.payload.len()
    }

    pub fn serialize(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.serialized_len());
        buf.extend_from_slice(&MAGIC);
        buf.push(self.version);
        buf.push(self.flags);
        buf.extend_from_slice(&self.ns.to_le_bytes());
        buf.push(self.levels);
        buf.push(self.filter_length);
        buf.push(self.qbits);
        buf.push(0); // reserved
        buf.extend_from_slice(&self.target_cr.to_le_bytes());
        buf.extend_from_slice(&self.lo.to_le_bytes());
        buf.extend_from_slice(&self.hi.to_le_bytes());
        buf.extend_from_slice(&self.significance);
        buf.extend_from_slice(&self.payload);
        buf
    }

    pub fn deserialize(bytes: &[u8]) -> Result<EncodedBlock> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Corrupt(format!(
                "block is {} bytes, header alone needs {}",
                bytes.len(),
                HEADER_LEN
            )));
        }
        if bytes[0..4] != MAGIC {
            return Err(Error::Corrupt("bad magic".into()));
        }
        let version = bytes[4];
        if version != BITSTREAM_VERSION {
            return Err(Error::Corrupt(format!(
                "unsupported bitstream version {}",
                version
            )));
        }
        let flags = bytes[5];
        let ns = u32::from_le_bytes(bytes[6..10].try_into().unwrap());
        let levels = bytes[10];
        let filter_length = bytes[11];
        let qbits = bytes[12];
        let target_cr = f64::from_le_bytes(bytes[14..22].try_into().unwrap());
        let lo = f64::from_le_bytes(bytes[22..30].try_into().unwrap());
        let hi = f64::from_le_bytes(bytes[30..38].try_into().unwrap());

        WaveletSpec::new(filter_length as usize, levels as usize)
            .map_err(|e| Error::Corrupt(format!("header: {}", e)))?;
        if ns < 2 || levels >= 32 || ns as usize % (1usize << levels) != 0 {
            return Err(Error::Corrupt(format!(
                "signal length {} incompatible with {} levels",
                ns, levels
            )));
        }
        if qbits < 1 || qbits > 16 {
            return Err(Error::Corrupt(format!("qbits {} out of range", qbits)));
        }
        if !target_cr.is_finite() || !(0.0..100.0).contains(&target_cr) {
            return Err(Error::Corrupt(format!("target cr {} out of range", target_cr)));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Corrupt(format!(
                "quantizer range [{}, {}] invalid",
                lo, hi
            )));
        }

        let sig_len = (ns as usize + 7) / 8;
        let m = target_kept_count(target_cr, ns as usize)?;
        let payload_len = (m * qbits as usize + 7) / 8;
        let expected = HEADER_LEN + sig_len + payload_len;
        if bytes.len() != expected {
            return Err(Error::Corrupt(format!(
                "block is {} bytes, layout requires {}",
                bytes.len(),
                expected
            )));
        }
        let significance = bytes[HEADER_LEN..HEADER_LEN + sig_len].to_vec();
        let payload = bytes[HEADER_LEN + sig_len..].to_vec();
        Ok(EncodedBlock {
            version,
            flags,
            ns,
            levels,
            filter_length,
            qbits,
            target_cr,
            lo,
            hi,
            significance,
            payload,
        })
    }
}

fn pack_codes(codes: &[u32], qbits: u8) -> Vec<u8> {
    let total_bits = codes.len() * qbits as usize;
    let mut bytes = vec![0u8; (total_bits + 7) / 8];
    let mut pos = 0usize;
    for &code in codes {
        for bit in 0..qbits as usize {
            if (code >> bit) & 1 == 1 {
                bytes[pos / 8] |= 1 << (pos % 8);
            }
            pos += 1;
        }
    }
    bytes
}

fn unpack_codes(bytes: &[u8], qbits: u8, count: usize) -> Result<Vec<u32>> {
    if bytes.len() * 8 < count * qbits as usize {
        return Err(Error::Corrupt(format!(
            "payload holds {} bits, {} codes of {} bits need {}",
            bytes.len() * 8,
            count,
            qbits,
            count * qbits as usize
        )));
    }
    let mut codes = Vec::with_capacity(count);
    let mut pos = 0usize;
    for _ in 0..count {
        let mut code = 0u32;
        for bit in 0..qbits as usize {
            if (bytes[pos / 8] >> (pos % 8)) & 1 == 1 {
                code |= 1 << bit;
            }
            pos += 1;
        }
        codes.push(code);
    }
    Ok(codes)
}

/// Run the full encoder chain: DWT, threshold to the target ratio, quantize
/// the retained coefficients over their min/max range, serialize into a
/// block. Deterministic for identical inputs.
pub fn encode(signal: &Signal, spec: &WaveletSpec, cr: f64, qbits: u8) -> Result<EncodedBlock> {
    if qbits < 1 || qbits > 16 {
        return Err(Error::Invalid(format!(
            "qbits must be in 1..=16, got {}",
            qbits
        )));
    }
    let coeffs = dwt(&signal.samples, spec)?;
    let kept = threshold_to_ratio(&coeffs, cr)?;

    let retained: Vec<f64> = kept
        .values()
        .iter()
        .zip(kept.keep_mask())
        .filter_map(|(&v, &keep)| keep.then_some(v))
        .collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in &retained {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    // A degenerate range (all retained values equal) still needs lo < hi.
    if !(lo < hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    let qspec = QuantizerSpec::new(qbits, lo, hi)?;
    let codes = quantize(&retained, &qspec);

    let ns = kept.ns();
    let mut significance = vec![0u8; (ns + 7) / 8];
    for (i, &keep) in kept.keep_mask().iter().enumerate() {
        if keep {
            significance[i / 8] |= 1 << (i % 8);
        }
    }

    Ok(EncodedBlock {
        version: BITSTREAM_VERSION,
        flags: 0,
        ns: ns as u32,
        levels: kept.levels() as u8,
        filter_length: spec.filter_length as u8,
        qbits,
        target_cr: cr,
        lo,
        hi,
        significance,
        payload: pack_codes(&codes, qbits),
    })
}

fn decode_inner(block: &EncodedBlock, strict: bool) -> Result<Signal> {
    let spec = WaveletSpec::new(block.filter_length as usize, block.levels as usize)?;
    let ns = block.ns as usize;
    spec.validate_length(ns)?;
    if block.significance.len() != (ns + 7) / 8 {
        return Err(Error::Corrupt(format!(
            "significance map is {} bytes, expected {}",
            block.significance.len(),
            (ns + 7) / 8
        )));
    }

    let m = block.expected_m();
    let positions: Vec<usize> = (0..ns)
        .filter(|&i| (block.significance[i / 8] >> (i % 8)) & 1 == 1)
        .collect();
    if strict && positions.len() != m {
        return Err(Error::Corrupt(format!(
            "significance popcount {} does not match payload count {}",
            positions.len(),
            m
        )));
    }

    let codes = match unpack_codes(&block.payload, block.qbits, m) {
        Ok(c) => c,
        Err(e) => {
            if strict {
                return Err(e);
            }
            // Lenient mode: decode the codes that are present, zero-fill the rest.
            let avail = block.payload.len() * 8 / block.qbits as usize;
            let mut c = unpack_codes(&block.payload, block.qbits, avail.min(m))?;
            c.resize(m, 0);
            c
        }
    };
    let qspec = QuantizerSpec::new(block.qbits, block.lo, block.hi)?;
    let values = dequantize(&codes, &qspec);

    // Payload values are assigned to significant positions in order; surplus
    // positions stay zero and surplus values are dropped.
    let mut flat = vec![0.0; ns];
    for (&pos, &v) in positions.iter().zip(values.iter()) {
        flat[pos] = v;
    }
    let coeffs = CoefficientSet::from_parts(flat, vec![true; ns], block.levels as usize)?;
    let samples = idwt(&coeffs, &spec)?;
    Signal::new(samples, DEFAULT_SAMPLING_RATE_HZ)
}

/// Decode a block, rejecting any structural inconsistency.
pub fn decode(block: &EncodedBlock) -> Result<Signal> {
    decode_inner(block, true)
}

/// Decode a possibly corrupted block, reconstructing best-effort: payload
/// values are scattered to whatever positions the (possibly damaged)
/// significance map marks.
pub fn decode_lenient(block: &EncodedBlock) -> Result<Signal> {
    decode_inner(block, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{compression_ratio, prd};
    use crate::signal_io::synth_eeg;

    fn test_signal(n: usize) -> Signal {
        synth_eeg(99, n, DEFAULT_SAMPLING_RATE_HZ).unwrap()
    }

    #[test]
    fn cr_zero_keeps_everything() {
        let spec = WaveletSpec::new(4, 2).unwrap();
        let sig = test_signal(64);
        let coeffs = dwt(&sig.samples, &spec).unwrap();
        let kept = threshold_to_ratio(&coeffs, 0.0).unwrap();
        assert_eq!(kept.kept_count(), 64);
    }

    #[test]
    fn cr_fifty_on_eight_keeps_four_largest() {
        let spec = WaveletSpec::new(2, 1).unwrap();
        let sig = Signal::new(vec![10.0, 10.0, 1.0, 1.0, -20.0, 20.0, 0.5, 0.5], 100.0).unwrap();
        let coeffs = dwt(&sig.samples, &spec).unwrap();
        let kept = threshold_to_ratio(&coeffs, 50.0).unwrap();
        assert_eq!(kept.kept_count(), 4);
        // The four largest magnitudes must all be retained.
        let values = kept.values();
        let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let cutoff = mags[3];
        for (i, &keep) in kept.keep_mask().iter().enumerate() {
            if values[i].abs() > cutoff {
                assert!(keep, "coefficient {} should be kept", i);
            }
        }
    }

    #[test]
    fn ties_break_toward_smaller_flat_index() {
        let coeffs = CoefficientSet::from_parts(
            vec![1.0, -1.0, 1.0, 1.0],
            vec![true; 4],
            1,
        )
        .unwrap();
        let kept = threshold_to_ratio(&coeffs, 50.0).unwrap();
        assert_eq!(kept.keep_mask(), &[true, true, false, false]);
    }

    #[test]
    fn kept_set_is_l2_optimal_over_all_masks() {
        // Brute-force oracle: by Parseval, reconstruction error of a mask is
        // the energy of the zeroed coefficients, so the keep-M-largest mask
        // must beat every other C(8, M) mask.
        let spec = WaveletSpec::new(2, 3).unwrap();
        let sig = test_signal(8);
        let coeffs = dwt(&sig.samples, &spec).unwrap();
        let values = coeffs.values();
        for m in 1..=8usize {
            let cr = (1.0 - m as f64 / 8.0) * 100.0;
            let kept = threshold_to_ratio(&coeffs, cr).unwrap();
            assert_eq!(kept.kept_count(), m);
            let chosen_err: f64 = values
                .iter()
                .zip(kept.keep_mask())
                .filter_map(|(&v, &keep)| (!keep).then_some(v * v))
                .sum();
            let mut best = f64::INFINITY;
            for mask_bits in 0u32..256 {
                if mask_bits.count_ones() as usize != m {
                    continue;
                }
                let err: f64 = (0..8)
                    .filter(|&i| (mask_bits >> i) & 1 == 0)
                    .map(|i| values[i] * values[i])
                    .sum();
                best = best.min(err);
            }
            assert!(
                chosen_err <= best + 1e-12,
                "M={}: chosen {} vs best {}",
                m,
                chosen_err,
                best
            );
        }
    }

    #[test]
    fn threshold_rejects_bad_ratio() {
        let spec = WaveletSpec::new(2, 1).unwrap();
        let coeffs = dwt(&[1.0, 2.0], &spec).unwrap();
        assert!(threshold_to_ratio(&coeffs, 100.0).is_err());
        assert!(threshold_to_ratio(&coeffs, -0.1).is_err());
    }

    #[test]
    fn near_total_compression_still_keeps_one() {
        let spec = WaveletSpec::new(2, 1).unwrap();
        let coeffs = dwt(&[1.0; 8], &spec).unwrap();
        let kept = threshold_to_ratio(&coeffs, 99.9).unwrap();
        assert_eq!(kept.kept_count(), 1);
    }

    #[test]
    fn two_level_quantizer_example() {
        // bits=1 over [0,1]: value 0.1 lands in cell 0, midpoint 0.25.
        let spec = QuantizerSpec::new(1, 0.0, 1.0).unwrap();
        let codes = quantize(&[0.1], &spec);
        assert_eq!(codes, vec![0]);
        let back = dequantize(&codes, &spec);
        assert!((back[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn quantizer_error_is_bounded() {
        let spec = QuantizerSpec::new(16, -3.0, 5.0).unwrap();
        let bound = (spec.hi - spec.lo) / 65536.0;
        let mut rng = crate::rng::SplitMix64::new(4);
        for _ in 0..10_000 {
            let v = spec.lo + rng.next_f64() * (spec.hi - spec.lo);
            let back = dequantize(&quantize(&[v], &spec), &spec)[0];
            assert!((v - back).abs() <= bound);
        }
        // range endpoints
        for v in [spec.lo, spec.hi] {
            let back = dequantize(&quantize(&[v], &spec), &spec)[0];
            assert!((v - back).abs() <= spec.step() / 2.0 + 1e-15);
        }
    }

    #[test]
    fn quantizer_accepts_empty_input() {
        let spec = QuantizerSpec::new(8, 0.0, 1.0).unwrap();
        assert!(quantize(&[], &spec).is_empty());
        assert!(dequantize(&[], &spec).is_empty());
    }

    #[test]
    fn quantizer_spec_validation() {
        assert!(QuantizerSpec::new(0, 0.0, 1.0).is_err());
        assert!(QuantizerSpec::new(17, 0.0, 1.0).is_err());
        assert!(QuantizerSpec::new(8, 1.0, 1.0).is_err());
        assert!(QuantizerSpec::new(8, 2.0, 1.0).is_err());
    }

    #[test]
    fn lossless_settings_give_tiny_prd() {
        let sig = test_signal(1024);
        let spec = WaveletSpec::new(8, 5).unwrap();
        let block = encode(&sig, &spec, 0.0, 16).unwrap();
        let decoded = decode(&block).unwrap();
        let d = prd(&sig.samples, &decoded.samples).unwrap();
        assert!(d < 0.1, "PRD {} should be below 0.1%", d);
    }

    #[test]
    fn payload_length_is_m_times_qbits() {
        let sig = test_signal(256);
        let spec = WaveletSpec::new(4, 3).unwrap();
        for (cr, qbits) in [(50.0, 12u8), (75.0, 7), (30.0, 16), (90.0, 1)] {
            let block = encode(&sig, &spec, cr, qbits).unwrap();
            let m = block.significance_popcount();
            assert_eq!(m, block.expected_m());
            assert_eq!(block.payload_bit_len(), m * qbits as usize);
            assert_eq!(block.payload.len(), (m * qbits as usize + 7) / 8);
        }
    }

    #[test]
    fn encoding_is_deterministic() {
        let sig = test_signal(512);
        let spec = WaveletSpec::new(6, 4).unwrap();
        let a = encode(&sig, &spec, 60.0, 12).unwrap();
        let b = encode(&sig, &spec, 60.0, 12).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.serialize(), b.serialize());
    }

    #[test]
    fn achieved_cr_matches_ratio_formula_exactly() {
        let sig = test_signal(256);
        let spec = WaveletSpec::new(4, 3).unwrap();
        for cr in [0.0, 12.5, 50.0, 87.5] {
            let block = encode(&sig, &spec, cr, 12).unwrap();
            let m = block.significance_popcount();
            assert_eq!(
                block.achieved_cr(),
                compression_ratio(m, 256).unwrap()
            );
        }
    }

    #[test]
    fn serialization_round_trips_bit_exactly() {
        let sig = test_signal(512);
        let spec = WaveletSpec::new(10, 4).unwrap();
        let block = encode(&sig, &spec, 42.0, 11).unwrap();
        let bytes = block.serialize();
        let back = EncodedBlock::deserialize(&bytes).unwrap();
        assert_eq!(block, back);
        assert_eq!(bytes, back.serialize());
    }

    #[test]
    fn deserialize_rejects_corrupted_framing() {
        let sig = test_signal(64);
        let spec = WaveletSpec::new(2, 2).unwrap();
        let block = encode(&sig, &spec, 50.0, 8).unwrap();
        let good = block.serialize();

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(EncodedBlock::deserialize(&bad_magic).is_err());

        let mut bad_version = good.clone();
        bad_version[4] = 9;
        assert!(EncodedBlock::deserialize(&bad_version).is_err());

        let truncated = &good[..good.len() - 1];
        assert!(EncodedBlock::deserialize(truncated).is_err());
    }

    #[test]
    fn all_zero_significance_decodes_to_zero_signal() {
        let sig = test_signal(64);
        let spec = WaveletSpec::new(2, 2).unwrap();
        let mut block = encode(&sig, &spec, 50.0, 8).unwrap();
        block.significance.fill(0);
        let decoded = decode_lenient(&block).unwrap();
        assert!(decoded.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn truncated_payload_fails_strict_decode() {
        let sig = test_signal(64);
        let spec = WaveletSpec::new(2, 2).unwrap();
        let mut block = encode(&sig, &spec, 50.0, 12).unwrap();
        block.payload.truncate(block.payload.len() - 2);
        match decode(&block) {
            Err(Error::Corrupt(_)) => {}
            other => panic!("expected corruption error, got {:?}", other),
        }
        // lenient mode still produces a signal
        assert!(decode_lenient(&block).is_ok());
    }

    #[test]
    fn popcount_mismatch_fails_strict_decode_only() {
        let sig = test_signal(64);
        let spec = WaveletSpec::new(2, 2).unwrap();
        let mut block = encode(&sig, &spec, 50.0, 12).unwrap();
        block.significance[0] ^= 0x0F;
        assert!(decode(&block).is_err());
        assert!(decode_lenient(&block).is_ok());
    }

    #[test]
    fn prd_is_monotone_in_compression_ratio() {
        let sig = test_signal(1024);
        let spec = WaveletSpec::new(8, 5).unwrap();
        let mut last = -1.0f64;
        for cr in [30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0] {
            let block = encode(&sig, &spec, cr, 16).unwrap();
            let decoded = decode(&block).unwrap();
            let d = prd(&sig.samples, &decoded.samples).unwrap();
            assert!(
                d >= last - 1e-6 * last.abs(),
                "PRD fell from {} to {} at cr {}",
                last,
                d,
                cr
            );
            last = d;
        }
    }
}
