//! Software-visible register map of the attitude core.
//!
//! All registers are 32-bit words addressed by word offset:
//!
//! | offset | name      | access | contents                                        |
//! |--------|-----------|--------|-------------------------------------------------|
//! | 0x00   | `CTRL`    | W      | bit0 `start`, bit1 `reset`                      |
//! | 0x01   | `STATUS`  | R      | bit0 `done`, bit1 `divide_error`, bit2 `saturation` |
//! | 0x02   | `COUNT`   | W      | number of correspondences `n` (IDLE only)       |
//! | 0x03   | `DATA_IN` | W      | input stream port (IDLE only), see below        |
//! | 0x04   | `Q_OUT0`  | R      | `q̂′₁` raw Q15.16 (DONE only)                    |
//! | 0x05   | `Q_OUT1`  | R      | `q̂′₂` raw Q15.16 (DONE only)                    |
//! | 0x06   | `Q_OUT2`  | R      | `q̂′₃` raw Q15.16 (DONE only)                    |
//! | 0x07   | `SAT_CNT` | R      | saturation events in the last run (DONE only)   |
//!
//! Each write to `DATA_IN` appends one raw Q15.16 word. Per correspondence
//! the host streams seven words in order `s′x s′y s′z y′x y′y y′z w′`.

use std::fmt;

use crate::fixedpoint::{Fixed32, FxTerm};

pub const CTRL: u32 = 0x00;
pub const STATUS: u32 = 0x01;
pub const COUNT: u32 = 0x02;
pub const DATA_IN: u32 = 0x03;
pub const Q_OUT0: u32 = 0x04;
pub const Q_OUT1: u32 = 0x05;
pub const Q_OUT2: u32 = 0x06;
pub const SAT_CNT: u32 = 0x07;

pub const CTRL_START: u32 = 1 << 0;
pub const CTRL_RESET: u32 = 1 << 1;

pub const STATUS_DONE: u32 = 1 << 0;
pub const STATUS_DIVIDE_ERROR: u32 = 1 << 1;
pub const STATUS_SATURATION: u32 = 1 << 2;

pub const WORDS_PER_TERM: usize = 7;

pub fn register_name(addr: u32) -> &'static str {
    match addr {
        CTRL => "CTRL",
        STATUS => "STATUS",
        COUNT => "COUNT",
        DATA_IN => "DATA_IN",
        Q_OUT0 => "Q_OUT0",
        Q_OUT1 => "Q_OUT1",
        Q_OUT2 => "Q_OUT2",
        SAT_CNT => "SAT_CNT",
        _ => "UNMAPPED",
    }
}

/// Register contents plus the input stream buffer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegisterFile {
    pub count: u32,
    pub stream: Vec<u32>,
    pub status: u32,
    pub q_out: [u32; 3],
    pub sat_count: u32,
}

impl RegisterFile {
    /// Stages a host-side load: `COUNT` followed by the seven-word stream
    /// per correspondence.
    pub fn load(terms: &[FxTerm]) -> Self {
        let mut stream = Vec::with_capacity(terms.len() * WORDS_PER_TERM);
        for t in terms {
            stream.extend(t.s.iter().map(|v| v.raw() as u32));
            stream.extend(t.y.iter().map(|v| v.raw() as u32));
            stream.push(t.w.raw() as u32);
        }
        RegisterFile {
            count: terms.len() as u32,
            stream,
            ..RegisterFile::default()
        }
    }

    /// Decodes the input stream back into terms; `None` if the stream length
    /// disagrees with `COUNT`.
    pub fn terms(&self) -> Option<Vec<FxTerm>> {
        if self.stream.len() != self.count as usize * WORDS_PER_TERM {
            return None;
        }
        let w = |v: u32| Fixed32::from_raw(v as i32);
        Some(
            self.stream
                .chunks_exact(WORDS_PER_TERM)
                .map(|c| FxTerm {
                    s: [w(c[0]), w(c[1]), w(c[2])],
                    y: [w(c[3]), w(c[4]), w(c[5])],
                    w: w(c[6]),
                })
                .collect(),
        )
    }

    pub fn clear_outputs(&mut self) {
        self.status = 0;
        self.q_out = [0; 3];
        self.sat_count = 0;
    }
}

/// One bus transaction or state change, rendered as a single trace line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEntry {
    Write { addr: u32, value: u32 },
    Read { addr: u32, value: u32 },
    Transition { from: super::State, to: super::State },
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEntry::Write { addr, value } => {
                write!(f, "W 0x{addr:02x} {:<8} 0x{value:08x}", register_name(*addr))
            }
            TraceEntry::Read { addr, value } => {
                write!(f, "R 0x{addr:02x} {:<8} 0x{value:08x}", register_name(*addr))
            }
            TraceEntry::Transition { from, to } => write!(f, "S {from} -> {to}"),
        }
    }
}
