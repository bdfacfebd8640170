//! Signed Q15.16 fixed-point arithmetic and the fixed-point attitude solve.
//!
//! Arithmetic contract (shared bit-for-bit with [`crate::hwsim`]):
//!
//! * quantization and multiplies round to nearest, ties away from zero;
//! * divides truncate toward zero;
//! * a multiply-accumulate chain sums exact 64-bit raw products in a
//!   saturating `i64` and rounds once at the output;
//! * the `2n` per-correspondence blocks are summed as rounded Q15.16 terms in
//!   an `i64` and narrowed (saturating) once after the last term.
//!
//! Every saturation increments [`FxStatus::saturation_count`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimator::{normal_equations, recover_translation, DeltaSet, EstimateResult, MethodTag};
use crate::math::{cayley, Crp, Vec3};

pub const FRAC_BITS: u32 = 16;
const ONE_RAW: i64 = 1 << FRAC_BITS;
const HALF_RAW: i128 = 1 << (FRAC_BITS - 1);

/// Budget for `α²·Σw′‖s‖²` and `β²·Σw′‖y‖²` under auto scaling.
pub const AUTO_SCALE_BUDGET: f64 = 32.0;

/// Q15.16 scalar: `value = raw / 2¹⁶`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fixed32(i32);

impl Fixed32 {
    pub const ZERO: Fixed32 = Fixed32(0);
    pub const ONE: Fixed32 = Fixed32(1 << FRAC_BITS);
    pub const MAX: Fixed32 = Fixed32(i32::MAX);
    pub const MIN: Fixed32 = Fixed32(i32::MIN);
    /// One quantization step, `2⁻¹⁶`.
    pub const EPSILON: f64 = 1.0 / ONE_RAW as f64;

    pub const fn from_raw(raw: i32) -> Self {
        Fixed32(raw)
    }

    pub const fn raw(self) -> i32 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        from_fixed(self)
    }
}

impl fmt::Display for Fixed32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

pub type FxVec3 = [Fixed32; 3];
pub type FxMat3 = [[Fixed32; 3]; 3];

/// Overflow diagnostics for one fixed-point evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FxStatus {
    pub saturation_count: u64,
    pub max_abs_intermediate: f64,
}

impl FxStatus {
    pub fn trusted(&self) -> bool {
        self.saturation_count == 0
    }

    pub fn merge(&mut self, other: &FxStatus) {
        self.saturation_count += other.saturation_count;
        self.max_abs_intermediate = self.max_abs_intermediate.max(other.max_abs_intermediate);
    }

    fn observe(&mut self, v: Fixed32) {
        self.max_abs_intermediate = self.max_abs_intermediate.max(v.to_f64().abs());
    }

    fn saturated(&mut self) {
        self.saturation_count += 1;
    }
}

/// Rounds a value carrying 16 extra fractional bits back to Q15.16 scale,
/// ties away from zero.
pub fn round_shift(acc: i64) -> i64 {
    let wide = acc as i128;
    let shifted = if wide >= 0 {
        (wide + HALF_RAW) >> FRAC_BITS
    } else {
        -((-wide + HALF_RAW) >> FRAC_BITS)
    };
    shifted as i64
}

/// Saturating narrow of a Q15.16-scaled wide value.
pub fn narrow(v: i64, status: &mut FxStatus) -> Fixed32 {
    let out = if v > i32::MAX as i64 {
        status.saturated();
        Fixed32::MAX
    } else if v < i32::MIN as i64 {
        status.saturated();
        Fixed32::MIN
    } else {
        Fixed32(v as i32)
    };
    status.observe(out);
    out
}

pub fn to_fixed(x: f64, status: &mut FxStatus) -> Fixed32 {
    if x.is_nan() {
        status.saturated();
        return Fixed32::ZERO;
    }
    let scaled = (x * ONE_RAW as f64).round();
    let out = if scaled > i32::MAX as f64 {
        status.saturated();
        Fixed32::MAX
    } else if scaled < i32::MIN as f64 {
        status.saturated();
        Fixed32::MIN
    } else {
        Fixed32(scaled as i32)
    };
    status.observe(out);
    out
}

/// Exact: every `Fixed32` is representable in `f64`.
pub fn from_fixed(x: Fixed32) -> f64 {
    x.0 as f64 / ONE_RAW as f64
}

pub fn fx_add(a: Fixed32, b: Fixed32, status: &mut FxStatus) -> Fixed32 {
    narrow(a.0 as i64 + b.0 as i64, status)
}

pub fn fx_sub(a: Fixed32, b: Fixed32, status: &mut FxStatus) -> Fixed32 {
    narrow(a.0 as i64 - b.0 as i64, status)
}

pub fn fx_mul(a: Fixed32, b: Fixed32, status: &mut FxStatus) -> Fixed32 {
    narrow(round_shift(a.0 as i64 * b.0 as i64), status)
}

/// `(num · 2¹⁶) / den`, truncated toward zero.
pub fn fx_div(num: Fixed32, den: Fixed32, status: &mut FxStatus) -> Result<Fixed32> {
    if den.0 == 0 {
        return Err(Error::DivideByZero);
    }
    Ok(narrow(((num.0 as i64) << FRAC_BITS) / den.0 as i64, status))
}

/// Multiply-accumulate chain over exact 64-bit raw products.
#[derive(Debug, Clone, Copy, Default)]
pub struct MacChain {
    acc: i64,
    overflowed: bool,
}

impl MacChain {
    pub fn new() -> Self {
        Self::default()
    }

    fn add_raw(&mut self, p: i64) {
        match self.acc.checked_add(p) {
            Some(v) => self.acc = v,
            None => {
                self.overflowed = true;
                self.acc = if p > 0 { i64::MAX } else { i64::MIN };
            }
        }
    }

    /// `acc += a·b`
    pub fn mac(&mut self, a: Fixed32, b: Fixed32) {
        self.add_raw(a.0 as i64 * b.0 as i64);
    }

    /// `acc −= a·b`
    pub fn msc(&mut self, a: Fixed32, b: Fixed32) {
        self.add_raw(-(a.0 as i64 * b.0 as i64));
    }

    pub fn finish(self, status: &mut FxStatus) -> Fixed32 {
        if self.overflowed {
            status.saturated();
        }
        narrow(round_shift(self.acc), status)
    }
}

/// Wide accumulator for sums of already-rounded Q15.16 terms.
#[derive(Debug, Clone, Copy, Default)]
struct TermSum(i64);

impl TermSum {
    fn add(&mut self, v: Fixed32) {
        self.0 += v.0 as i64;
    }

    fn finish(self, status: &mut FxStatus) -> Fixed32 {
        narrow(self.0, status)
    }
}

pub fn quantize_vec(v: &Vec3, status: &mut FxStatus) -> FxVec3 {
    [to_fixed(v.x, status), to_fixed(v.y, status), to_fixed(v.z, status)]
}

pub fn quantize_mat(m: &crate::math::Mat3, status: &mut FxStatus) -> FxMat3 {
    m.0.map(|row| row.map(|v| to_fixed(v, status)))
}

pub fn dequantize_vec(v: &FxVec3) -> Vec3 {
    Vec3::new(v[0].to_f64(), v[1].to_f64(), v[2].to_f64())
}

pub fn fx_identity() -> FxMat3 {
    let mut m = [[Fixed32::ZERO; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Fixed32::ONE;
    }
    m
}

/// Reference 3×3 product: one MAC chain per entry, ascending `k`.
pub fn fx_matmul3(a: &FxMat3, b: &FxMat3, status: &mut FxStatus) -> FxMat3 {
    let mut out = [[Fixed32::ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut chain = MacChain::new();
            for k in 0..3 {
                chain.mac(a[i][k], b[k][j]);
            }
            out[i][j] = chain.finish(status);
        }
    }
    out
}

/// Cofactor inverse: one rounding per cofactor, one for the determinant,
/// and a truncating divide per entry.
pub fn fx_inverse3(a: &FxMat3, status: &mut FxStatus) -> Result<FxMat3> {
    let idx = |i: usize| match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut cof = [[Fixed32::ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = idx(i);
            let (c0, c1) = idx(j);
            let mut chain = MacChain::new();
            if (i + j) % 2 == 0 {
                chain.mac(a[r0][c0], a[r1][c1]);
                chain.msc(a[r0][c1], a[r1][c0]);
            } else {
                chain.msc(a[r0][c0], a[r1][c1]);
                chain.mac(a[r0][c1], a[r1][c0]);
            }
            cof[i][j] = chain.finish(status);
        }
    }
    let mut det = MacChain::new();
    for k in 0..3 {
        det.mac(a[0][k], cof[0][k]);
    }
    let det = det.finish(status);
    let mut inv = [[Fixed32::ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inv[i][j] = fx_div(cof[j][i], det, status)?;
        }
    }
    Ok(inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScaleKind {
    Manual,
    AutoPow2,
}

impl fmt::Display for ScaleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScaleKind::Manual => "manual",
            ScaleKind::AutoPow2 => "auto_pow2",
        })
    }
}

impl FromStr for ScaleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "manual" => Ok(ScaleKind::Manual),
            "auto_pow2" | "auto" => Ok(ScaleKind::AutoPow2),
            other => Err(Error::InvalidConfig(format!("unknown scale mode `{other}`"))),
        }
    }
}

/// How scale factors are chosen for a fixed-point run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ScaleMode {
    #[default]
    AutoPow2,
    Manual { alpha: f64, beta: f64 },
}

/// Resolved scale factors: `s′ = α·s`, `y′ = β·y`, `q̂ = (α/β)·q̂′`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleConfig {
    pub alpha: f64,
    pub beta: f64,
    pub mode: ScaleKind,
}

impl ScaleConfig {
    pub fn manual(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "scale factors must be positive and finite (alpha={alpha}, beta={beta})"
            )));
        }
        Ok(ScaleConfig {
            alpha,
            beta,
            mode: ScaleKind::Manual,
        })
    }

    pub fn resolve(mode: &ScaleMode, deltas: &DeltaSet) -> Result<Self> {
        match *mode {
            ScaleMode::AutoPow2 => auto_scale(deltas),
            ScaleMode::Manual { alpha, beta } => ScaleConfig::manual(alpha, beta),
        }
    }
}

/// Per-correspondence weights normalized so the largest is exactly one.
pub fn normalized_weights(deltas: &DeltaSet) -> Vec<f64> {
    let w_max = deltas.pairs.iter().map(|p| p.weight).fold(0.0_f64, f64::max);
    deltas.pairs.iter().map(|p| p.weight / w_max).collect()
}

fn pow2_within(sum_sq: f64) -> f64 {
    // largest 2^e with (2^e)² · sum_sq ≤ budget
    let mut e = (0.5 * (AUTO_SCALE_BUDGET / sum_sq).log2()).floor().clamp(-60.0, 60.0) as i32;
    while e > -60 && 2f64.powi(2 * e) * sum_sq > AUTO_SCALE_BUDGET {
        e -= 1;
    }
    while e < 60 && 2f64.powi(2 * (e + 1)) * sum_sq <= AUTO_SCALE_BUDGET {
        e += 1;
    }
    2f64.powi(e)
}

/// Power-of-two scales with `α²·Σⱼ w′ⱼ‖sⱼ‖² ≤ 32` and likewise for `β`
/// over `yⱼ`. This bounds the scaled normal matrix entries by 32, its
/// cofactors by 2¹⁰ and its determinant by 2¹⁴.
pub fn auto_scale(deltas: &DeltaSet) -> Result<ScaleConfig> {
    if deltas.is_empty() {
        return Err(Error::DegenerateInput("no correspondences".into()));
    }
    let w = normalized_weights(deltas);
    let (mut s_sum, mut y_sum) = (0.0, 0.0);
    for (p, w) in deltas.pairs.iter().zip(&w) {
        s_sum += w * p.s.norm_squared();
        y_sum += w * p.y.norm_squared();
    }
    if !(s_sum > 0.0) || !s_sum.is_finite() {
        return Err(Error::DegenerateInput(
            "all centered measurement vectors are zero".into(),
        ));
    }
    let alpha = pow2_within(s_sum);
    let beta = if y_sum > 0.0 && y_sum.is_finite() {
        pow2_within(y_sum)
    } else {
        1.0
    };
    Ok(ScaleConfig {
        alpha,
        beta,
        mode: ScaleKind::AutoPow2,
    })
}

/// One quantized correspondence as streamed to the datapath.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FxTerm {
    pub s: FxVec3,
    pub y: FxVec3,
    pub w: Fixed32,
}

/// Applies `α`, `β` and the normalized weights, then quantizes.
pub fn quantize_terms(deltas: &DeltaSet, scales: &ScaleConfig, status: &mut FxStatus) -> Vec<FxTerm> {
    let w = normalized_weights(deltas);
    deltas
        .pairs
        .iter()
        .zip(w)
        .map(|(p, w)| FxTerm {
            s: quantize_vec(&(p.s * scales.alpha), status),
            y: quantize_vec(&(p.y * scales.beta), status),
            w: to_fixed(w, status),
        })
        .collect()
}

/// Scaled normal matrix `N′` and right-hand side `r′` in Q15.16.
pub fn fx_normal_equations(terms: &[FxTerm], status: &mut FxStatus) -> (FxMat3, FxVec3) {
    let mut n_acc = [[TermSum::default(); 3]; 3];
    let mut r_acc = [TermSum::default(); 3];
    for t in terms {
        let s = &t.s;
        let y = &t.y;
        let mut inner = MacChain::new();
        for k in 0..3 {
            inner.mac(s[k], s[k]);
        }
        let inner = inner.finish(status);
        for i in 0..3 {
            for j in 0..3 {
                let outer = fx_mul(s[i], s[j], status);
                let entry = if i == j {
                    fx_sub(inner, outer, status)
                } else {
                    fx_sub(Fixed32::ZERO, outer, status)
                };
                n_acc[i][j].add(fx_mul(t.w, entry, status));
            }
        }
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let mut c = MacChain::new();
            c.mac(s[j], y[k]);
            c.msc(s[k], y[j]);
            let c = c.finish(status);
            r_acc[i].add(fx_mul(t.w, c, status));
        }
    }
    let n = n_acc.map(|row| row.map(|acc| acc.finish(status)));
    let r = r_acc.map(|acc| acc.finish(status));
    (n, r)
}

/// `q̂′ = N′⁻¹ (−r′)` entirely in Q15.16 (pre-rescale result). `r′` is
/// negated (saturating) before the matrix-vector MAC.
pub fn fx_attitude_prime(terms: &[FxTerm], status: &mut FxStatus) -> Result<FxVec3> {
    let (n, r) = fx_normal_equations(terms, status);
    let inv = fx_inverse3(&n, status)?;
    let neg_r = r.map(|v| fx_sub(Fixed32::ZERO, v, status));
    let mut q = [Fixed32::ZERO; 3];
    for i in 0..3 {
        let mut chain = MacChain::new();
        for k in 0..3 {
            chain.mac(inv[i][k], neg_r[k]);
        }
        q[i] = chain.finish(status);
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FxAttitude {
    pub q_hat: Crp,
    pub q_prime: FxVec3,
    pub scales: ScaleConfig,
    pub status: FxStatus,
}

/// Quantize, solve in Q15.16, then rescale `q̂ = (α/β)·q̂′` in `f64`.
pub fn fx_estimate_attitude(deltas: &DeltaSet, scales: &ScaleConfig) -> Result<FxAttitude> {
    if deltas.len() < 3 {
        return Err(Error::TooFewCorrespondences(deltas.len()));
    }
    let mut status = FxStatus::default();
    let terms = quantize_terms(deltas, scales, &mut status);
    let q_prime = fx_attitude_prime(&terms, &mut status)?;
    let q_hat = Crp(dequantize_vec(&q_prime) * (scales.alpha / scales.beta));
    Ok(FxAttitude {
        q_hat,
        q_prime,
        scales: *scales,
        status,
    })
}

/// Fixed-point attitude with double-precision translation recovery.
pub fn fx_estimate_pose(deltas: &DeltaSet, mode: &ScaleMode) -> Result<EstimateResult> {
    let scales = ScaleConfig::resolve(mode, deltas)?;
    let att = fx_estimate_attitude(deltas, &scales)?;
    let (info, _) = normal_equations(deltas);
    Ok(EstimateResult {
        q_hat: att.q_hat,
        t_hat: recover_translation(&att.q_hat, deltas),
        r_hat: cayley(&att.q_hat),
        info_matrix: info,
        condition_number: info.spd_condition_number(),
        method_tag: MethodTag::FixedPoint,
        saturation_events: att.status.saturation_count,
        a_bar: deltas.a_bar,
        n: deltas.len(),
        sigma_rms: deltas.sigma_rms(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::DeltaPair;

    fn fx(x: f64) -> Fixed32 {
        to_fixed(x, &mut FxStatus::default())
    }

    #[test]
    fn to_fixed_examples() {
        assert_eq!(fx(0.0).raw(), 0);
        assert_eq!(fx(1.5).raw(), 98304);
        let mut st = FxStatus::default();
        assert_eq!(to_fixed(40000.0, &mut st).raw(), i32::MAX);
        assert_eq!(st.saturation_count, 1);
        assert_eq!(to_fixed(-40000.0, &mut st).raw(), i32::MIN);
        assert_eq!(st.saturation_count, 2);
        assert!(!st.trusted());
    }

    #[test]
    fn to_fixed_rounds_ties_away() {
        let half_lsb = Fixed32::EPSILON / 2.0;
        assert_eq!(fx(half_lsb).raw(), 1);
        assert_eq!(fx(-half_lsb).raw(), -1);
        assert_eq!(fx(half_lsb * 0.999).raw(), 0);
    }

    #[test]
    fn mul_examples() {
        let mut st = FxStatus::default();
        assert_eq!(fx_mul(fx(2.0), fx(3.0), &mut st), fx(6.0));
        assert_eq!(fx_mul(fx(0.5), fx(0.5), &mut st), fx(0.25));
        let third = fx_mul(fx(1.0 / 3.0), fx(3.0), &mut st);
        assert!((third.to_f64() - 1.0).abs() <= Fixed32::EPSILON);
        assert!(st.trusted());
        fx_mul(fx(200.0), fx(200.0), &mut st);
        assert_eq!(st.saturation_count, 1);
    }

    #[test]
    fn div_examples() {
        let mut st = FxStatus::default();
        assert_eq!(fx_div(fx(6.0), fx(2.0), &mut st).unwrap(), fx(3.0));
        assert!(matches!(fx_div(fx(1.0), fx(0.0), &mut st), Err(Error::DivideByZero)));
        // integer oracle: floor(65536·65536 / 196608)
        let oracle = (65536_i64 * 65536) / 196608;
        let q = fx_div(fx(1.0), fx(3.0), &mut st).unwrap();
        assert_eq!(q.raw() as i64, oracle);
        assert_eq!(q.raw(), 21845);
        // truncation toward zero for negative quotients
        assert_eq!(fx_div(fx(-1.0), fx(3.0), &mut st).unwrap().raw(), -21845);
    }

    #[test]
    fn round_shift_ties() {
        assert_eq!(round_shift(1 << 15), 1);
        assert_eq!(round_shift(-(1 << 15)), -1);
        assert_eq!(round_shift((1 << 15) - 1), 0);
        assert_eq!(round_shift(i64::MAX), 1 << 47);
        assert_eq!(round_shift(i64::MIN), -(1 << 47));
    }

    #[test]
    fn mac_chain_rounds_once() {
        // three products of 2⁻¹⁷ each: single rounding gives 2⁻¹⁶·1.5 → 2 LSB,
        // per-product rounding would give 3 LSB.
        let a = Fixed32::from_raw(1);
        let b = Fixed32::from_raw(1 << 15);
        let mut st = FxStatus::default();
        let mut c = MacChain::new();
        for _ in 0..3 {
            c.mac(a, b);
        }
        assert_eq!(c.finish(&mut st).raw(), 2);
        let per_product: i32 = (0..3).map(|_| fx_mul(a, b, &mut st).raw()).sum();
        assert_eq!(per_product, 3);
    }

    #[test]
    fn mac_chain_overflow_saturates() {
        let mut st = FxStatus::default();
        let mut c = MacChain::new();
        for _ in 0..3 {
            c.mac(Fixed32::MAX, Fixed32::MAX);
        }
        assert_eq!(c.finish(&mut st), Fixed32::MAX);
        assert!(st.saturation_count >= 1);
    }

    #[test]
    fn inverse_of_identity_and_diag() {
        let mut st = FxStatus::default();
        assert_eq!(fx_inverse3(&fx_identity(), &mut st).unwrap(), fx_identity());
        let d = quantize_mat(&crate::math::Mat3::diag([2.0, 4.0, 8.0]), &mut st);
        let inv = fx_inverse3(&d, &mut st).unwrap();
        for (i, want) in [0.5, 0.25, 0.125].into_iter().enumerate() {
            assert!((inv[i][i].to_f64() - want).abs() <= Fixed32::EPSILON);
        }
        let zero = [[Fixed32::ZERO; 3]; 3];
        assert!(matches!(fx_inverse3(&zero, &mut st), Err(Error::DivideByZero)));
    }

    fn deltas(pairs: &[(Vec3, Vec3)]) -> DeltaSet {
        DeltaSet {
            pairs: pairs
                .iter()
                .map(|&(s, y)| DeltaPair { s, y, weight: 1.0 })
                .collect(),
            a_bar: Vec3::ZERO,
            b_bar: Vec3::ZERO,
        }
    }

    #[test]
    fn auto_scale_budget() {
        // Σ‖s‖² = 1 → α² ≤ 32 → α = 4 (16 ≤ 32 < 64)
        let d = deltas(&[(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.5))]);
        let sc = auto_scale(&d).unwrap();
        assert_eq!(sc.alpha, 4.0);
        // Σ‖y‖² = 0.25 → β² ≤ 128 → β = 8
        assert_eq!(sc.beta, 8.0);
        assert_eq!(sc.mode, ScaleKind::AutoPow2);
        // Σ‖s‖² = 512² → α² ≤ 32/262144 = 2⁻¹³ → α = 2⁻⁷
        let d = deltas(&[(Vec3::new(512.0, 0.0, 0.0), Vec3::ZERO)]);
        let sc = auto_scale(&d).unwrap();
        assert_eq!(sc.alpha, 2f64.powi(-7));
        assert_eq!(sc.beta, 1.0);
    }

    #[test]
    fn auto_scale_exact_boundary() {
        // Σ‖s‖² = 2 → α² = 16 gives exactly 32, which is allowed
        let d = deltas(&[(Vec3::new(1.0, 1.0, 0.0), Vec3::ZERO)]);
        assert_eq!(auto_scale(&d).unwrap().alpha, 4.0);
    }

    #[test]
    fn auto_scale_rejects_degenerate() {
        let d = deltas(&[(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0)); 3]);
        assert!(matches!(auto_scale(&d), Err(Error::DegenerateInput(_))));
        assert!(auto_scale(&deltas(&[])).is_err());
    }

    #[test]
    fn manual_scales_validated() {
        assert!(ScaleConfig::manual(0.0, 1.0).is_err());
        assert!(ScaleConfig::manual(1.0, f64::INFINITY).is_err());
        assert_eq!(ScaleConfig::manual(2.0, 3.0).unwrap().mode, ScaleKind::Manual);
        assert_eq!("auto_pow2".parse::<ScaleKind>().unwrap(), ScaleKind::AutoPow2);
        assert!("bogus".parse::<ScaleKind>().is_err());
    }

    #[test]
    fn identity_transform_gives_exact_zero() {
        let pts = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]];
        let c: Vec<_> = pts
            .iter()
            .map(|p| {
                let a = Vec3::from_array(*p);
                crate::estimator::Correspondence::new(a, a, 0.5).unwrap()
            })
            .collect();
        let d = crate::estimator::build_deltas(&c).unwrap();
        for sc in [auto_scale(&d).unwrap(), ScaleConfig::manual(0.5, 7.0).unwrap()] {
            let att = fx_estimate_attitude(&d, &sc).unwrap();
            assert_eq!(att.q_prime, [Fixed32::ZERO; 3]);
            assert_eq!(att.q_hat.0.norm_inf(), 0.0);
            assert!(att.status.trusted());
        }
    }
}
