use crate::error::{Error, Result};
use crate::fixedpoint::{Fixed32, FxMat3, FxStatus, FxTerm, FxVec3};

use super::registers::*;
use super::state::{step_state, CoreState, Signals, State};
use super::systolic::{cramer_inverse3_counted, sat_word, systolic_matmul3_counted, OpCounts, Pe};

/// Cost constants for the cycle-accounting model. Relative throughput
/// only; no absolute latency is implied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleModel {
    pub c_mac: u64,
    pub c_div: u64,
    pub overhead: u64,
}

impl Default for CycleModel {
    fn default() -> Self {
        CycleModel {
            c_mac: 1,
            c_div: 20,
            overhead: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CycleReport {
    pub mac_ops: u64,
    pub divides: u64,
    pub modeled_cycles: u64,
}

impl CycleReport {
    fn from_ops(ops: OpCounts, model: &CycleModel) -> Self {
        CycleReport {
            mac_ops: ops.mac_ops,
            divides: ops.divides,
            modeled_cycles: ops.mac_ops * model.c_mac + ops.divides * model.c_div + model.overhead,
        }
    }
}

/// Transaction-level model of the attitude core behind its register map.
#[derive(Debug, Clone)]
pub struct OltaeCore {
    state: CoreState,
    regs: RegisterFile,
    model: CycleModel,
    report: Option<CycleReport>,
    trace: Vec<TraceEntry>,
}

impl Default for OltaeCore {
    fn default() -> Self {
        OltaeCore::new(CycleModel::default())
    }
}

impl OltaeCore {
    pub fn new(model: CycleModel) -> Self {
        OltaeCore {
            state: CoreState::idle(),
            regs: RegisterFile::default(),
            model,
            report: None,
            trace: Vec::new(),
        }
    }

    pub fn state(&self) -> State {
        self.state.state
    }

    pub fn core_state(&self) -> CoreState {
        self.state
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn cycle_report(&self) -> Option<CycleReport> {
        self.report
    }

    fn transition(&mut self, signals: Signals) {
        let from = self.state.state;
        self.state = step_state(self.state, signals);
        if self.state.state != from {
            self.trace.push(TraceEntry::Transition {
                from,
                to: self.state.state,
            });
        }
    }

    fn violation(&self, what: impl Into<String>) -> Error {
        Error::ProtocolViolation(format!("{} (state {})", what.into(), self.state.state))
    }

    pub fn write(&mut self, addr: u32, value: u32) -> Result<()> {
        match addr {
            CTRL => {
                self.trace.push(TraceEntry::Write { addr, value });
                let start = value & CTRL_START != 0;
                let reset = value & CTRL_RESET != 0;
                if start {
                    if self.state.state != State::Idle {
                        return Err(self.violation("start asserted outside IDLE"));
                    }
                    if self.regs.count < 3 {
                        return Err(self.violation(format!("COUNT = {} (need >= 3)", self.regs.count)));
                    }
                    if self.regs.terms().is_none() {
                        return Err(self.violation(format!(
                            "stream holds {} words, COUNT = {} needs {}",
                            self.regs.stream.len(),
                            self.regs.count,
                            self.regs.count as usize * WORDS_PER_TERM
                        )));
                    }
                }
                let was_done = self.state.state == State::Done;
                self.transition(Signals {
                    start,
                    reset,
                    complete: false,
                });
                if was_done && self.state.state == State::Idle {
                    self.regs = RegisterFile::default();
                    self.report = None;
                }
                Ok(())
            }
            COUNT | DATA_IN => {
                if self.state.state != State::Idle {
                    return Err(self.violation(format!("write to {} outside IDLE", register_name(addr))));
                }
                self.trace.push(TraceEntry::Write { addr, value });
                if addr == COUNT {
                    self.regs.count = value;
                } else {
                    self.regs.stream.push(value);
                }
                Ok(())
            }
            _ => Err(self.violation(format!(
                "write to read-only or unmapped register 0x{addr:02x} ({})",
                register_name(addr)
            ))),
        }
    }

    pub fn read(&mut self, addr: u32) -> Result<u32> {
        let value = match addr {
            STATUS => self.regs.status | if self.state.done { STATUS_DONE } else { 0 },
            Q_OUT0 | Q_OUT1 | Q_OUT2 | SAT_CNT => {
                if self.state.state != State::Done {
                    return Err(self.violation(format!("read of {} before DONE", register_name(addr))));
                }
                match addr {
                    SAT_CNT => self.regs.sat_count,
                    _ => self.regs.q_out[(addr - Q_OUT0) as usize],
                }
            }
            _ => {
                return Err(self.violation(format!(
                    "read of write-only or unmapped register 0x{addr:02x} ({})",
                    register_name(addr)
                )))
            }
        };
        self.trace.push(TraceEntry::Read { addr, value });
        Ok(value)
    }

    /// Advances the core. In COMPUTE the whole datapath runs and the core
    /// moves to DONE; in other states this holds.
    pub fn clock(&mut self) {
        if self.state.state != State::Compute {
            return;
        }
        let terms = self.regs.terms().expect("stream validated at start");
        let mut status = FxStatus::default();
        let mut ops = OpCounts::default();
        match datapath(&terms, &mut status, &mut ops) {
            Ok(q) => {
                self.regs.q_out = q.map(|v| v.raw() as u32);
                self.regs.sat_count = status.saturation_count.min(u32::MAX as u64) as u32;
                self.regs.status = if status.saturation_count > 0 {
                    STATUS_SATURATION
                } else {
                    0
                };
            }
            Err(_) => {
                self.regs.q_out = [0; 3];
                self.regs.sat_count = status.saturation_count.min(u32::MAX as u64) as u32;
                self.regs.status = STATUS_DIVIDE_ERROR
                    | if status.saturation_count > 0 {
                        STATUS_SATURATION
                    } else {
                        0
                    };
            }
        }
        self.report = Some(CycleReport::from_ops(ops, &self.model));
        self.transition(Signals::COMPLETE);
    }
}

/// Accumulates the `2n` partial 3×3 blocks, inverts by Cramer's rule and
/// applies the inverse through the systolic array.
fn datapath(terms: &[FxTerm], status: &mut FxStatus, ops: &mut OpCounts) -> Result<FxVec3> {
    let zero = [[Fixed32::ZERO; 3]; 3];
    let mut n_acc = [[0i64; 3]; 3];
    let mut r_acc = [0i64; 3];
    for t in terms {
        let s = t.s.map(Fixed32::raw);
        let y = t.y.map(Fixed32::raw);
        let w = t.w.raw();

        let mut inner = Pe::default();
        for k in 0..3 {
            inner.mac(s[k], s[k], ops);
        }
        let inner = inner.drain(status).raw() as i64;

        // outer product s·sᵀ: s as the first column of A, sᵀ as the first row of B
        let mut col: FxMat3 = zero;
        let mut row: FxMat3 = zero;
        for k in 0..3 {
            col[k][0] = t.s[k];
            row[0][k] = t.s[k];
        }
        let outer = systolic_matmul3_counted(&col, &row, status, ops);

        for i in 0..3 {
            for j in 0..3 {
                let o = outer[i][j].raw() as i64;
                let entry = sat_word(if i == j { inner - o } else { -o }, status);
                let mut pe = Pe::default();
                pe.mac(w, entry.raw(), ops);
                n_acc[i][j] += pe.drain(status).raw() as i64;
            }
        }

        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let mut cross = Pe::default();
            cross.mac(s[j], y[k], ops);
            cross.msc(s[k], y[j], ops);
            let c = cross.drain(status);
            let mut pe = Pe::default();
            pe.mac(w, c.raw(), ops);
            r_acc[i] += pe.drain(status).raw() as i64;
        }
    }
    let normal = n_acc.map(|row| row.map(|v| sat_word(v, status)));
    let r = r_acc.map(|v| sat_word(v, status));

    let inv = cramer_inverse3_counted(&normal, status, ops)?;

    let mut rhs = zero;
    for k in 0..3 {
        rhs[k][0] = sat_word(-(r[k].raw() as i64), status);
    }
    let prod = systolic_matmul3_counted(&inv.inverse, &rhs, status, ops);
    Ok([prod[0][0], prod[1][0], prod[2][0]])
}

/// Result of a full host-driven run.
#[derive(Debug, Clone)]
pub struct CoreRun {
    pub q_prime: FxVec3,
    pub report: CycleReport,
    pub status_word: u32,
    pub saturation_count: u32,
    pub trace: Vec<TraceEntry>,
}

/// Drives a fresh core through one estimate: load, start, clock, poll,
/// read the outputs, reset.
pub fn core_run_traced(registers: &RegisterFile, model: CycleModel) -> Result<CoreRun> {
    let mut core = OltaeCore::new(model);
    core.write(COUNT, registers.count)?;
    for &w in &registers.stream {
        core.write(DATA_IN, w)?;
    }
    core.write(CTRL, CTRL_START)?;
    core.clock();
    let status_word = core.read(STATUS)?;
    if status_word & STATUS_DIVIDE_ERROR != 0 {
        return Err(Error::DivideByZero);
    }
    let mut q = [Fixed32::ZERO; 3];
    for (i, addr) in [Q_OUT0, Q_OUT1, Q_OUT2].into_iter().enumerate() {
        q[i] = Fixed32::from_raw(core.read(addr)? as i32);
    }
    let saturation_count = core.read(SAT_CNT)?;
    let report = core.cycle_report().unwrap_or_default();
    core.write(CTRL, CTRL_RESET)?;
    Ok(CoreRun {
        q_prime: q,
        report,
        status_word,
        saturation_count,
        trace: core.trace,
    })
}

pub fn core_run(registers: &RegisterFile) -> Result<(FxVec3, CycleReport)> {
    let run = core_run_traced(registers, CycleModel::default())?;
    Ok((run.q_prime, run.report))
}
