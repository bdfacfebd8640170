//! Datapath units of the attitude core: a 3×3 output-stationary systolic
//! array, a 2×2 determinant (cofactor) unit, and the Cramer's-rule inverter.
//!
//! These share the arithmetic contract of [`crate::fixedpoint`] but are
//! written against their own processing-element model.

use crate::error::{Error, Result};
use crate::fixedpoint::{Fixed32, FxMat3, FxStatus};

/// Operation counters for the cycle model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounts {
    pub mac_ops: u64,
    pub divides: u64,
}

/// Multiply-accumulate processing element with a 64-bit accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Pe {
    acc: i64,
    overflow: bool,
}

impl Pe {
    pub(crate) fn mac(&mut self, a: i32, b: i32, ops: &mut OpCounts) {
        ops.mac_ops += 1;
        self.accumulate(a as i64 * b as i64);
    }

    pub(crate) fn msc(&mut self, a: i32, b: i32, ops: &mut OpCounts) {
        ops.mac_ops += 1;
        self.accumulate(-(a as i64 * b as i64));
    }

    fn accumulate(&mut self, p: i64) {
        let (sum, wrapped) = self.acc.overflowing_add(p);
        if wrapped {
            self.overflow = true;
            self.acc = if p < 0 { i64::MIN } else { i64::MAX };
        } else {
            self.acc = sum;
        }
    }

    /// Round half away from zero, drop 16 fractional bits, clamp to 32 bits.
    pub(crate) fn drain(self, status: &mut FxStatus) -> Fixed32 {
        let mag = (self.acc as i128).unsigned_abs();
        let rounded = ((mag + (1 << 15)) >> 16) as i128;
        let v = if self.acc < 0 { -rounded } else { rounded };
        let sat = self.overflow || v > i32::MAX as i128 || v < i32::MIN as i128;
        let out = v.clamp(i32::MIN as i128, i32::MAX as i128) as i32;
        if sat {
            status.saturation_count += self.overflow as u64
                + (v > i32::MAX as i128 || v < i32::MIN as i128) as u64;
        }
        let out = Fixed32::from_raw(out);
        status.max_abs_intermediate = status.max_abs_intermediate.max(out.to_f64().abs());
        out
    }
}

/// Saturating word-level add/sub as done by the accumulation adders.
pub(crate) fn sat_word(v: i64, status: &mut FxStatus) -> Fixed32 {
    let out = if v > i32::MAX as i64 {
        status.saturation_count += 1;
        i32::MAX
    } else if v < i32::MIN as i64 {
        status.saturation_count += 1;
        i32::MIN
    } else {
        v as i32
    };
    let out = Fixed32::from_raw(out);
    status.max_abs_intermediate = status.max_abs_intermediate.max(out.to_f64().abs());
    out
}

/// `A·B` on a skewed 3×3 grid: row `i` of `A` enters from the left delayed
/// by `i` cycles, column `j` of `B` from the top delayed by `j`; PE(i, j)
/// therefore sees `k = t − i − j` at cycle `t`.
pub fn systolic_matmul3(a: &FxMat3, b: &FxMat3, status: &mut FxStatus) -> FxMat3 {
    let mut ops = OpCounts::default();
    systolic_matmul3_counted(a, b, status, &mut ops)
}

pub(crate) fn systolic_matmul3_counted(
    a: &FxMat3,
    b: &FxMat3,
    status: &mut FxStatus,
    ops: &mut OpCounts,
) -> FxMat3 {
    let mut grid = [[Pe::default(); 3]; 3];
    // operand registers travelling right (a) and down (b)
    let mut a_reg: [[Option<i32>; 3]; 3] = [[None; 3]; 3];
    let mut b_reg: [[Option<i32>; 3]; 3] = [[None; 3]; 3];
    for t in 0..7usize {
        let mut a_next = [[None; 3]; 3];
        let mut b_next = [[None; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                a_next[i][j] = if j == 0 {
                    t.checked_sub(i).filter(|&k| k < 3).map(|k| a[i][k].raw())
                } else {
                    a_reg[i][j - 1]
                };
                b_next[i][j] = if i == 0 {
                    t.checked_sub(j).filter(|&k| k < 3).map(|k| b[k][j].raw())
                } else {
                    b_reg[i - 1][j]
                };
            }
        }
        a_reg = a_next;
        b_reg = b_next;
        for i in 0..3 {
            for j in 0..3 {
                if let (Some(x), Some(y)) = (a_reg[i][j], b_reg[i][j]) {
                    grid[i][j].mac(x, y, ops);
                }
            }
        }
    }
    grid.map(|row| row.map(|pe| pe.drain(status)))
}

/// Signed 2×2 minor `±(a·d − b·c)` as one MAC chain.
fn cofactor_unit(a: i32, b: i32, c: i32, d: i32, negate: bool, status: &mut FxStatus, ops: &mut OpCounts) -> Fixed32 {
    let mut pe = Pe::default();
    if negate {
        pe.msc(a, d, ops);
        pe.mac(b, c, ops);
    } else {
        pe.mac(a, d, ops);
        pe.msc(b, c, ops);
    }
    pe.drain(status)
}

/// Integer divider: `(num << 16) / den`, quotient truncated toward zero.
fn divider(num: Fixed32, den: Fixed32, status: &mut FxStatus, ops: &mut OpCounts) -> Result<Fixed32> {
    ops.divides += 1;
    if den.raw() == 0 {
        return Err(Error::DivideByZero);
    }
    let q = ((num.raw() as i64) * 65536) / den.raw() as i64;
    Ok(sat_word(q, status))
}

/// Below this `|det| / max|a|³` the inverse is flagged ill-conditioned.
pub const ILL_CONDITIONED_RATIO: f64 = 1.0 / 256.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CramerInverse {
    pub inverse: FxMat3,
    pub determinant: Fixed32,
    /// `|det|` below `2⁻⁸ · max|a_ij|³`.
    pub ill_conditioned: bool,
}

/// Cofactors (one rounding each), determinant by first-row expansion (one
/// rounding), then nine divides of the adjugate by the determinant.
pub fn cramer_inverse3(a: &FxMat3, status: &mut FxStatus) -> Result<CramerInverse> {
    let mut ops = OpCounts::default();
    cramer_inverse3_counted(a, status, &mut ops)
}

pub(crate) fn cramer_inverse3_counted(
    a: &FxMat3,
    status: &mut FxStatus,
    ops: &mut OpCounts,
) -> Result<CramerInverse> {
    const REST: [[usize; 2]; 3] = [[1, 2], [0, 2], [0, 1]];
    let raw = a.map(|row| row.map(Fixed32::raw));
    let mut cof = [[Fixed32::ZERO; 3]; 3];
    for (i, [r0, r1]) in REST.iter().copied().enumerate() {
        for (j, [c0, c1]) in REST.iter().copied().enumerate() {
            cof[i][j] = cofactor_unit(
                raw[r0][c0],
                raw[r0][c1],
                raw[r1][c0],
                raw[r1][c1],
                (i + j) % 2 == 1,
                status,
                ops,
            );
        }
    }
    let mut det_pe = Pe::default();
    for k in 0..3 {
        det_pe.mac(raw[0][k], cof[0][k].raw(), ops);
    }
    let det = det_pe.drain(status);

    let mut inverse = [[Fixed32::ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inverse[i][j] = divider(cof[j][i], det, status, ops)?;
        }
    }
    let scale = raw
        .iter()
        .flatten()
        .map(|v| (*v as f64 / 65536.0).abs())
        .fold(0.0, f64::max)
        .powi(3);
    Ok(CramerInverse {
        inverse,
        determinant: det,
        ill_conditioned: det.to_f64().abs() < ILL_CONDITIONED_RATIO * scale,
    })
}
