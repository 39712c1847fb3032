//! Line-based circuit text format.
//!
//! ```text
//! # comment
//! QUBITS 3
//! RESET_Z 0 1
//! PREP_ARB 2 0.5 0.25
//! TICK
//! CX 0 1
//! NOISE_2Q(0.001) 0 1
//! FLIP_ERROR(0.01) 1
//! MEASURE_Z 1
//! DETECTOR(0) rec[-1]
//! OBSERVABLE(0) rec[-1]
//! ```
//!
//! Record targets are relative to the measurements made so far, as in
//! `rec[-1]` for the latest one. `FLIP_ERROR` is a bit flip and `FLIP_ERROR_Z`
//! a phase flip.

use std::fmt::Write;

use super::{Basis, Circuit, FlipAxis, Instruction};
use crate::error::{Error, Result};

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn pairs(p: &[(u32, u32)]) -> String {
    join(p.iter().flat_map(|&(a, b)| [a, b]))
}

fn recs(records: &[usize], measured: usize) -> String {
    join(records.iter().map(|&r| format!("rec[-{}]", measured - r)))
}

pub(super) fn serialize(c: &Circuit) -> String {
    let mut out = String::new();
    writeln!(out, "QUBITS {}", c.num_qubits()).unwrap();
    let mut measured = 0usize;
    for inst in c.instructions() {
        let line = match inst {
            Instruction::ResetZ(t) => format!("RESET_Z {}", join(t)),
            Instruction::ResetX(t) => format!("RESET_X {}", join(t)),
            Instruction::H(t) => format!("H {}", join(t)),
            Instruction::Cx(p) => format!("CX {}", pairs(p)),
            Instruction::Measure { basis, targets } => {
                measured += targets.len();
                format!("MEASURE_{} {}", basis.symbol(), join(targets))
            }
            Instruction::PrepArb { qubit, theta, phi } => format!("PREP_ARB {qubit} {theta} {phi}"),
            Instruction::Tick => "TICK".to_string(),
            Instruction::Noise1 { p, targets } => format!("NOISE_1Q({p}) {}", join(targets)),
            Instruction::Noise2 { p, pairs: pr } => format!("NOISE_2Q({p}) {}", pairs(pr)),
            Instruction::Flip { axis, p, targets } => {
                let name = match axis {
                    FlipAxis::X => "FLIP_ERROR",
                    FlipAxis::Z => "FLIP_ERROR_Z",
                };
                format!("{name}({p}) {}", join(targets))
            }
            Instruction::Detector { expected, records } => {
                format!("DETECTOR({}) {}", u8::from(*expected), recs(records, measured))
            }
            Instruction::Observable { id, records } => {
                format!("OBSERVABLE({id}) {}", recs(records, measured))
            }
        };
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

struct LineCtx<'a> {
    line: usize,
    raw: &'a str,
}

impl LineCtx<'_> {
    fn err(&self, token: &str, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            token: token.to_string(),
            message: message.into(),
        }
    }

    fn qubits(&self, args: &[&str]) -> Result<Vec<u32>> {
        if args.is_empty() {
            return Err(self.err(self.raw.trim(), "expected qubit targets"));
        }
        args.iter()
            .map(|t| t.parse::<u32>().map_err(|_| self.err(t, "expected a qubit index")))
            .collect()
    }

    fn pairs(&self, args: &[&str]) -> Result<Vec<(u32, u32)>> {
        let q = self.qubits(args)?;
        if q.len() % 2 != 0 {
            return Err(self.err(args[args.len() - 1], "two-qubit targets must come in pairs"));
        }
        Ok(q.chunks(2).map(|c| (c[0], c[1])).collect())
    }

    fn float(&self, t: &str) -> Result<f64> {
        t.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(t, "expected a finite number"))
    }

    fn prob(&self, arg: Option<&str>, name: &str) -> Result<f64> {
        let a = arg.ok_or_else(|| self.err(name, "missing probability argument"))?;
        let p = self.float(a)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(self.err(a, "probability outside [0, 1]"));
        }
        Ok(p)
    }

    fn records(&self, args: &[&str], measured: usize) -> Result<Vec<usize>> {
        args.iter()
            .map(|t| {
                let k = t
                    .strip_prefix("rec[-")
                    .and_then(|s| s.strip_suffix(']'))
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| self.err(t, "expected a record target like rec[-1]"))?;
                if k == 0 || k > measured {
                    return Err(self.err(t, "record offset out of range"));
                }
                Ok(measured - k)
            })
            .collect()
    }
}

pub(super) fn parse(src: &str) -> Result<Circuit> {
    let mut declared: Option<usize> = None;
    let mut instructions = Vec::new();
    let mut measured = 0usize;
    for (i, raw) in src.lines().enumerate() {
        let ctx = LineCtx { line: i + 1, raw };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let head = tokens.next().unwrap();
        let args: Vec<&str> = tokens.collect();
        let (name, arg) = match head.find('(') {
            Some(open) => {
                let close = head
                    .strip_suffix(')')
                    .ok_or_else(|| ctx.err(head, "unclosed parenthesis"))?;
                (&head[..open], Some(&close[open + 1..]))
            }
            None => (head, None),
        };
        let no_arg = |inst: Instruction| match arg {
            Some(_) => Err(ctx.err(head, "instruction takes no parenthesized argument")),
            None => Ok(inst),
        };
        let inst = match name {
            "QUBITS" => {
                let n = args
                    .first()
                    .and_then(|t| t.parse::<usize>().ok())
                    .filter(|_| args.len() == 1)
                    .ok_or_else(|| ctx.err(content, "expected `QUBITS <count>`"))?;
                declared = Some(n);
                continue;
            }
            "RESET_Z" | "R" => no_arg(Instruction::ResetZ(ctx.qubits(&args)?))?,
            "RESET_X" | "RX" => no_arg(Instruction::ResetX(ctx.qubits(&args)?))?,
            "H" => no_arg(Instruction::H(ctx.qubits(&args)?))?,
            "CX" | "CNOT" => no_arg(Instruction::Cx(ctx.pairs(&args)?))?,
            "MEASURE_Z" | "MEASURE_X" | "MEASURE_Y" => {
                let basis = Basis::parse(&name[8..])?;
                let targets = ctx.qubits(&args)?;
                measured += targets.len();
                no_arg(Instruction::Measure { basis, targets })?
            }
            "PREP_ARB" => {
                if args.len() != 3 {
                    return Err(ctx.err(content, "expected `PREP_ARB <qubit> <theta> <phi>`"));
                }
                let qubit = ctx.qubits(&args[..1])?[0];
                no_arg(Instruction::PrepArb {
                    qubit,
                    theta: ctx.float(args[1])?,
                    phi: ctx.float(args[2])?,
                })?
            }
            "TICK" => {
                if !args.is_empty() {
                    return Err(ctx.err(args[0], "TICK takes no targets"));
                }
                no_arg(Instruction::Tick)?
            }
            "NOISE_1Q" => Instruction::Noise1 {
                p: ctx.prob(arg, head)?,
                targets: ctx.qubits(&args)?,
            },
            "NOISE_2Q" => Instruction::Noise2 {
                p: ctx.prob(arg, head)?,
                pairs: ctx.pairs(&args)?,
            },
            "FLIP_ERROR" | "FLIP_ERROR_Z" => Instruction::Flip {
                axis: if name == "FLIP_ERROR" { FlipAxis::X } else { FlipAxis::Z },
                p: ctx.prob(arg, head)?,
                targets: ctx.qubits(&args)?,
            },
            "DETECTOR" => {
                let expected = match arg {
                    None | Some("0") => false,
                    Some("1") => true,
                    Some(other) => return Err(ctx.err(other, "expected parity must be 0 or 1")),
                };
                Instruction::Detector {
                    expected,
                    records: ctx.records(&args, measured)?,
                }
            }
            "OBSERVABLE" => {
                let id = match arg {
                    None => 0,
                    Some(a) => a
                        .parse::<usize>()
                        .map_err(|_| ctx.err(a, "expected an observable index"))?,
                };
                Instruction::Observable {
                    id,
                    records: ctx.records(&args, measured)?,
                }
            }
            _ => return Err(ctx.err(name, "unknown instruction")),
        };
        instructions.push(inst);
    }
    let max_used = instructions
        .iter()
        .flat_map(|i: &Instruction| i.all_qubits())
        .map(|q| q as usize + 1)
        .max()
        .unwrap_or(0);
    let num_qubits = match declared {
        Some(n) if n < max_used => {
            return Err(Error::Validation(format!(
                "QUBITS {n} but qubit {} is used",
                max_used - 1
            )))
        }
        Some(n) => n,
        None => max_used,
    };
    Circuit::from_instructions(num_qubits, instructions)
}
