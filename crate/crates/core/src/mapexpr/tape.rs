//! Flattened post-order program for repeated evaluation.
//!
//! Register `k` holds the value (or Taylor jet) of instruction `k`; operands
//! always refer to lower registers.

use std::cell::RefCell;

use num_complex::Complex64 as C;

use super::{Func, Node};
use crate::error::{Error, Result};
use crate::series::kernels;

const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
enum Op {
    Var,
    Const(C),
    Neg(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    PowInt(usize, i32),
    PowReal(usize, f64),
    Call(Func, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Tape {
    ops: Vec<Op>,
}

thread_local! {
    static SCRATCH: RefCell<(Vec<C>, Vec<C>, Vec<C>)> = const { RefCell::new((Vec::new(), Vec::new(), Vec::new())) };
}

fn singular(func: &'static str, at: C) -> Error {
    Error::Singular { func, at }
}

impl Tape {
    /// Compiles `root` with every parameter replaced by its bound value.
    pub(super) fn compile(root: &Node, lookup: &dyn Fn(&str) -> C) -> Self {
        let mut ops = Vec::new();
        emit(root, lookup, &mut ops);
        Self { ops }
    }

    pub(super) fn eval(&self, z: C) -> Result<C> {
        SCRATCH.with(|cell| {
            let regs = &mut cell.borrow_mut().0;
            regs.clear();
            for op in &self.ops {
                let v = match *op {
                    Op::Var => z,
                    Op::Const(c) => c,
                    Op::Neg(a) => -regs[a],
                    Op::Add(a, b) => regs[a] + regs[b],
                    Op::Sub(a, b) => regs[a] - regs[b],
                    Op::Mul(a, b) => regs[a] * regs[b],
                    Op::Div(a, b) => {
                        if regs[b] == ZERO {
                            return Err(singular("division", z));
                        }
                        regs[a] / regs[b]
                    }
                    Op::PowInt(a, n) => {
                        if n < 0 && regs[a] == ZERO {
                            return Err(singular("pow", z));
                        }
                        regs[a].powi(n)
                    }
                    Op::PowReal(a, alpha) => {
                        if regs[a] == ZERO {
                            if alpha > 0.0 {
                                ZERO
                            } else {
                                return Err(singular("pow", z));
                            }
                        } else {
                            regs[a].powf(alpha)
                        }
                    }
                    Op::Call(f, a) => apply(f, regs[a], z)?,
                };
                regs.push(v);
            }
            let out = *regs.last().expect("tape is never empty");
            if !out.re.is_finite() || !out.im.is_finite() {
                return Err(singular("evaluation", z));
            }
            Ok(out)
        })
    }

    /// Writes the Taylor coefficients about `z` of orders `0..out.len()`.
    pub(super) fn jet(&self, z: C, out: &mut [C]) -> Result<()> {
        let n = out.len();
        assert!(n > 0, "jet needs at least one coefficient");
        SCRATCH.with(|cell| {
            let (regs, s1, s2) = &mut *cell.borrow_mut();
            regs.clear();
            regs.resize(self.ops.len() * n, ZERO);
            s1.clear();
            s1.resize(n, ZERO);
            s2.clear();
            s2.resize(n, ZERO);
            for (k, op) in self.ops.iter().enumerate() {
                let (inputs, rest) = regs.split_at_mut(k * n);
                let dst = &mut rest[..n];
                let reg = |i: usize| &inputs[i * n..(i + 1) * n];
                match *op {
                    Op::Var => {
                        dst[0] = z;
                        if n > 1 {
                            dst[1] = C::new(1.0, 0.0);
                        }
                    }
                    Op::Const(c) => dst[0] = c,
                    Op::Neg(a) => {
                        for (d, s) in dst.iter_mut().zip(reg(a)) {
                            *d = -s;
                        }
                    }
                    Op::Add(a, b) => kernels::add(reg(a), reg(b), dst),
                    Op::Sub(a, b) => kernels::sub(reg(a), reg(b), dst),
                    Op::Mul(a, b) => kernels::mul(reg(a), reg(b), dst),
                    Op::Div(a, b) => {
                        kernels::div(reg(a), reg(b), dst).map_err(|_| singular("division", z))?
                    }
                    Op::PowInt(a, e) => {
                        kernels::powi(reg(a), e, dst).map_err(|_| singular("pow", z))?
                    }
                    Op::PowReal(a, alpha) => kernels::powf(reg(a), C::new(alpha, 0.0), dst)
                        .map_err(|_| singular("pow", z))?,
                    Op::Call(f, a) => {
                        let x = reg(a);
                        match f {
                            Func::Exp => kernels::exp(x, dst),
                            Func::Log => kernels::ln(x, dst).map_err(|_| singular("log", z))?,
                            Func::Sqrt => kernels::sqrt(x, dst).map_err(|_| singular("sqrt", z))?,
                            Func::Sin => kernels::sin_cos(x, dst, s1),
                            Func::Cos => kernels::sin_cos(x, s1, dst),
                            Func::Tan => {
                                kernels::tan(x, dst, s1).map_err(|_| singular("tan", z))?
                            }
                        }
                    }
                }
            }
            let last = &regs[(self.ops.len() - 1) * n..];
            if last.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(singular("evaluation", z));
            }
            out.copy_from_slice(last);
            Ok(())
        })
    }
}

fn apply(f: Func, w: C, z: C) -> Result<C> {
    Ok(match f {
        Func::Tan => {
            if kernels::is_tan_pole(w) {
                return Err(singular("tan", z));
            }
            w.tan()
        }
        Func::Sin => w.sin(),
        Func::Cos => w.cos(),
        Func::Exp => w.exp(),
        Func::Log => {
            if w == ZERO {
                return Err(singular("log", z));
            }
            w.ln()
        }
        Func::Sqrt => w.sqrt(),
    })
}

fn emit(node: &Node, lookup: &dyn Fn(&str) -> C, ops: &mut Vec<Op>) -> usize {
    let op = match node {
        Node::Var => Op::Var,
        Node::Const(c) => Op::Const(*c),
        Node::Param(name) => Op::Const(lookup(name)),
        Node::Neg(a) => Op::Neg(emit(a, lookup, ops)),
        Node::Add(a, b) => {
            let (a, b) = (emit(a, lookup, ops), emit(b, lookup, ops));
            Op::Add(a, b)
        }
        Node::Sub(a, b) => {
            let (a, b) = (emit(a, lookup, ops), emit(b, lookup, ops));
            Op::Sub(a, b)
        }
        Node::Mul(a, b) => {
            let (a, b) = (emit(a, lookup, ops), emit(b, lookup, ops));
            Op::Mul(a, b)
        }
        Node::Div(a, b) => {
            let (a, b) = (emit(a, lookup, ops), emit(b, lookup, ops));
            Op::Div(a, b)
        }
        Node::PowInt(a, e) => Op::PowInt(emit(a, lookup, ops), *e),
        Node::PowReal(a, e) => Op::PowReal(emit(a, lookup, ops), *e),
        Node::Call(f, a) => Op::Call(*f, emit(a, lookup, ops)),
    };
    ops.push(op);
    ops.len() - 1
}
