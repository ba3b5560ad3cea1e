//! A small circuit representation for block encodings and QSVT sequences.
//!
//! Wire 0 is the QSVT ancilla, wires `1..=K` are the encoding ancillas and
//! the remaining `n` wires hold the system. Wire 0 is the most significant
//! bit of a basis index, so the all-zero-ancilla block is the top-left
//! `2^n x 2^n` corner of the full matrix.

use std::fmt::Write as _;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::gates::{apply_mat2, rz_matrix, Gate};
use crate::pauli::PauliString;
use crate::state::Statevector;

/// Widest circuit whose dense matrix may be formed.
pub const DENSE_IR_MAX_WIRES: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    H(usize),
    X(usize),
    Rz(usize, f64),
    /// Applies `pauli` to `targets` when `control` is 1 (or 0 if `open`).
    ControlledPauli { control: usize, open: bool, pauli: PauliString, targets: Vec<usize> },
    /// Flips `target` when every control is 1 (or all are 0 if `open`).
    MultiControlledX { controls: Vec<usize>, open: bool, target: usize },
}

impl Op {
    fn wires(&self) -> Vec<usize> {
        match self {
            Op::H(w) | Op::X(w) | Op::Rz(w, _) => vec![*w],
            Op::ControlledPauli { control, targets, .. } => std::iter::once(*control).chain(targets.iter().copied()).collect(),
            Op::MultiControlledX { controls, target, .. } => controls.iter().copied().chain(std::iter::once(*target)).collect(),
        }
    }

    fn adjoint(&self) -> Op {
        match self {
            Op::Rz(w, t) => Op::Rz(*w, -t),
            Op::ControlledPauli { control, open, pauli, targets } => {
                Op::ControlledPauli { control: *control, open: *open, pauli: pauli.adjoint(), targets: targets.clone() }
            }
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitIR {
    k: usize,
    n: usize,
    ops: Vec<Op>,
}

impl CircuitIR {
    pub fn new(k: usize, n: usize) -> Self {
        Self { k, n, ops: Vec::new() }
    }

    pub fn wires(&self) -> usize {
        1 + self.k + self.n
    }

    pub fn encoding_wires(&self) -> std::ops::Range<usize> {
        1..1 + self.k
    }

    pub fn system_wires(&self) -> std::ops::Range<usize> {
        1 + self.k..self.wires()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn push(&mut self, op: Op) -> Result<()> {
        let w = self.wires();
        let wires = op.wires();
        if let Some(&bad) = wires.iter().find(|&&x| x >= w) {
            return Err(Error::QubitOutOfRange { index: bad, n: w });
        }
        let mut sorted = wires.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != wires.len() {
            return Err(invalid(format!("{op:?} uses a wire twice")));
        }
        if let Op::ControlledPauli { pauli, targets, .. } = &op {
            if pauli.len() != targets.len() {
                return Err(Error::WidthMismatch { expected: targets.len(), got: pauli.len() });
            }
        }
        self.ops.push(op);
        Ok(())
    }

    pub fn extend(&mut self, other: &CircuitIR) -> Result<()> {
        if (other.k, other.n) != (self.k, self.n) {
            return Err(Error::WidthMismatch { expected: self.wires(), got: other.wires() });
        }
        self.ops.extend(other.ops.iter().cloned());
        Ok(())
    }

    pub fn adjoint(&self) -> CircuitIR {
        CircuitIR { k: self.k, n: self.n, ops: self.ops.iter().rev().map(Op::adjoint).collect() }
    }

    fn bit(&self, w: usize) -> usize {
        1usize << (self.wires() - 1 - w)
    }

    fn apply_op(&self, op: &Op, amps: &mut [Complex64], scratch: &mut Vec<Complex64>) -> Result<()> {
        let w = self.wires();
        match op {
            Op::H(q) => Gate::H(*q).apply_amps(w, amps)?,
            Op::X(q) => Gate::X(*q).apply_amps(w, amps)?,
            Op::Rz(q, t) => apply_mat2(amps, self.bit(*q), &rz_matrix(*t)),
            Op::ControlledPauli { control, open, pauli, targets } => {
                let cb = self.bit(*control);
                let want = if *open { 0 } else { cb };
                let (mut flip, mut sign) = (0usize, 0usize);
                let (pf, ps) = pauli.masks();
                let len = targets.len();
                for (j, &t) in targets.iter().enumerate() {
                    let src = 1u64 << (len - 1 - j);
                    if pf & src != 0 {
                        flip |= self.bit(t);
                    }
                    if ps & src != 0 {
                        sign |= self.bit(t);
                    }
                }
                let c = pauli.coefficient();
                scratch.clear();
                scratch.extend_from_slice(amps);
                for (x, v) in scratch.iter().enumerate() {
                    if x & cb == want {
                        let t = if (x & sign).count_ones() % 2 == 1 { -c * v } else { c * v };
                        amps[x ^ flip] = t;
                    }
                }
            }
            Op::MultiControlledX { controls, open, target } => {
                let mask = controls.iter().fold(0usize, |m, &c| m | self.bit(c));
                let want = if *open { 0 } else { mask };
                let tb = self.bit(*target);
                for x in 0..amps.len() {
                    if x & mask == want && x & tb == 0 {
                        amps.swap(x, x | tb);
                    }
                }
            }
        }
        Ok(())
    }

    /// Runs the circuit on a full-width state.
    pub fn apply(&self, state: &mut Statevector) -> Result<()> {
        crate::pauli::check_width(self.wires(), state.n())?;
        let mut scratch = Vec::new();
        for op in &self.ops {
            self.apply_op(op, state.amplitudes_mut(), &mut scratch)?;
        }
        Ok(())
    }

    fn check_dense(&self) -> Result<()> {
        if self.wires() > DENSE_IR_MAX_WIRES {
            return Err(Error::SizeCap { what: "dense circuit matrix", n: self.wires(), cap: DENSE_IR_MAX_WIRES });
        }
        Ok(())
    }

    fn columns(&self, count: usize, rows: usize) -> Result<Mat<Complex64>> {
        let w = self.wires();
        let mut m = Mat::<Complex64>::zeros(rows, count);
        for j in 0..count {
            let mut s = Statevector::basis(w, j)?;
            self.apply(&mut s)?;
            for (i, v) in s.amplitudes()[..rows].iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    /// Full `2^W x 2^W` matrix.
    pub fn to_dense(&self) -> Result<Mat<Complex64>> {
        self.check_dense()?;
        let dim = 1usize << self.wires();
        self.columns(dim, dim)
    }

    /// The system block with every ancilla projected onto `|0>`.
    pub fn system_block(&self) -> Result<Mat<Complex64>> {
        self.check_dense()?;
        let dim = 1usize << self.n;
        self.columns(dim, dim)
    }

    /// One header line, then one gate per line: name, wires, parameters.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "qubits {} layout qsvt=0 encoding=1..{} system={}..{}\n",
            self.wires(),
            self.k,
            self.k + 1,
            self.wires() - 1
        );
        let list = |ws: &[usize]| ws.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",");
        for op in &self.ops {
            let _ = match op {
                Op::H(w) => writeln!(out, "h {w}"),
                Op::X(w) => writeln!(out, "x {w}"),
                Op::Rz(w, t) => writeln!(out, "rz {w} {t:e}"),
                Op::ControlledPauli { control, open, pauli, targets } => {
                    writeln!(out, "{} {control} {} {pauli}", if *open { "ocpauli" } else { "cpauli" }, list(targets))
                }
                Op::MultiControlledX { controls, open, target } => {
                    writeln!(out, "{} {} {target}", if *open { "ocx" } else { "cx" }, list(controls))
                }
            };
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: &str| Error::Parse(format!("bad circuit line '{line}'"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty circuit text".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 || fields[0] != "qubits" || fields[2] != "layout" || fields[3] != "qsvt=0" {
            return Err(bad(header));
        }
        let wires: usize = fields[1].parse().map_err(|_| bad(header))?;
        let k: usize = fields[4]
            .strip_prefix("encoding=1..")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(header))?;
        if wires < k + 1 || fields[5] != format!("system={}..{}", k + 1, wires - 1) {
            return Err(bad(header));
        }
        let mut c = CircuitIR::new(k, wires - 1 - k);
        let num = |s: &str, line: &str| s.parse::<usize>().map_err(|_| bad(line));
        let nums = |s: &str, line: &str| s.split(',').map(|v| num(v, line)).collect::<Result<Vec<_>>>();
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let op = match f.as_slice() {
                ["h", w] => Op::H(num(w, line)?),
                ["x", w] => Op::X(num(w, line)?),
                ["rz", w, t] => Op::Rz(num(w, line)?, t.parse().map_err(|_| bad(line))?),
                [kind @ ("ocpauli" | "cpauli"), ctl, ts, p] => Op::ControlledPauli {
                    control: num(ctl, line)?,
                    open: *kind == "ocpauli",
                    pauli: p.parse()?,
                    targets: nums(ts, line)?,
                },
                [kind @ ("ocx" | "cx"), cs, t] => {
                    Op::MultiControlledX { controls: nums(cs, line)?, open: *kind == "ocx", target: num(t, line)? }
                }
                _ => return Err(bad(line)),
            };
            c.push(op)?;
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_control_fires_on_zero() {
        let mut c = CircuitIR::new(1, 1);
        c.push(Op::ControlledPauli { control: 1, open: true, pauli: "X".parse().unwrap(), targets: vec![2] }).unwrap();
        let mut s = Statevector::zero(3);
        c.apply(&mut s).unwrap();
        assert_eq!(s.amplitudes()[1], Complex64::new(1.0, 0.0));
        let mut s = Statevector::basis(3, 0b010).unwrap();
        c.apply(&mut s).unwrap();
        assert_eq!(s.amplitudes()[0b010], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_bad_wires() {
        let mut c = CircuitIR::new(1, 1);
        assert!(c.push(Op::H(3)).is_err());
        assert!(c.push(Op::MultiControlledX { controls: vec![1], open: true, target: 1 }).is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut c = CircuitIR::new(2, 2);
        c.push(Op::H(1)).unwrap();
        c.push(Op::ControlledPauli { control: 2, open: true, pauli: "-XY".parse().unwrap(), targets: vec![3, 4] }).unwrap();
        c.push(Op::MultiControlledX { controls: vec![1, 2], open: true, target: 0 }).unwrap();
        c.push(Op::Rz(0, 0.123456789012345678)).unwrap();
        c.push(Op::X(4)).unwrap();
        let text = c.to_text();
        assert!(text.starts_with("qubits 5 layout qsvt=0 encoding=1..2 system=3..4\n"));
        assert_eq!(CircuitIR::from_text(&text).unwrap(), c);
        assert!(CircuitIR::from_text("qubits 2\nh 0").is_err());
    }
}
