//! Reverse-mode tape whose backward pass can itself be recorded.
//!
//! [`Tape::gradient`] runs an ordinary adjoint sweep over `f64`s.
//! [`Tape::gradient_graph`] runs the same sweep but emits every adjoint
//! computation as new nodes on the tape, so the returned gradients are
//! [`Var`]s that can be differentiated again. Differentiating an unrolled
//! gradient-descent loop needs exactly this: the loop's updates
//! `u - a * dC/du` are recorded, and a later sweep reaches the cost
//! parameters through them.
//!
//! Both sweeps use identical arithmetic in identical order, so a graph
//! gradient's value is bit-for-bit the plain gradient.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::{sigmoid, Scalar};

#[derive(Clone, Copy, Debug)]
enum Op {
    Leaf,
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Neg(u32),
    Scale(u32, f64),
    DivConst(u32, f64),
    Shift(u32),
    Exp(u32),
    Sigmoid(u32),
    Sin(u32),
    Cos(u32),
}

#[derive(Clone, Copy, Debug)]
struct Node {
    op: Op,
    value: f64,
    /// Whether any variable leaf reaches this node. Inactive nodes never
    /// receive adjoints.
    active: bool,
}

/// Single-threaded recording of a computation.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

impl fmt::Debug for Tape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tape").field("len", &self.len()).finish()
    }
}

/// A value recorded on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    idx: u32,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Var#{}({})", self.idx, self.value())
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Tape {
            nodes: RefCell::new(Vec::with_capacity(n)),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// An independent variable: gradients flow into it.
    pub fn var(&self, value: f64) -> Var<'_> {
        self.push(Op::Leaf, value, true)
    }

    pub fn vars(&self, values: &[f64]) -> Vec<Var<'_>> {
        values.iter().map(|&v| self.var(v)).collect()
    }

    /// A constant: recorded, but never receives a gradient.
    pub fn constant(&self, value: f64) -> Var<'_> {
        self.push(Op::Leaf, value, false)
    }

    pub fn constants(&self, values: &[f64]) -> Vec<Var<'_>> {
        values.iter().map(|&v| self.constant(v)).collect()
    }

    fn push(&self, op: Op, value: f64, active: bool) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        let idx = u32::try_from(nodes.len()).expect("tape exceeds u32 node indices");
        nodes.push(Node { op, value, active });
        Var { tape: self, idx }
    }

    fn is_active(&self, idx: u32) -> bool {
        self.nodes.borrow()[idx as usize].active
    }

    fn unary(&self, op: Op, a: u32, value: f64) -> Var<'_> {
        self.push(op, value, self.is_active(a))
    }

    fn binary(&self, op: Op, a: u32, b: u32, value: f64) -> Var<'_> {
        let active = {
            let nodes = self.nodes.borrow();
            nodes[a as usize].active || nodes[b as usize].active
        };
        self.push(op, value, active)
    }

    fn value_of(&self, idx: u32) -> f64 {
        self.nodes.borrow()[idx as usize].value
    }

    /// d(output)/d(wrt) by a plain adjoint sweep.
    pub fn gradient(&self, output: Var<'_>, wrt: &[Var<'_>]) -> Vec<f64> {
        self.check_owner(output);
        let nodes = self.nodes.borrow();
        let out = output.idx as usize;
        let lo = lowest_index(wrt, out);
        let mut adj = vec![0.0_f64; out + 1];
        adj[out] = 1.0;
        for i in (lo..=out).rev() {
            let g = adj[i];
            if g == 0.0 || !nodes[i].active {
                continue;
            }
            let val = |j: u32| nodes[j as usize].value;
            let mut acc = |j: u32, c: f64| {
                if nodes[j as usize].active {
                    adj[j as usize] += c;
                }
            };
            match nodes[i].op {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    acc(a, g);
                    acc(b, g);
                }
                Op::Sub(a, b) => {
                    acc(a, g);
                    acc(b, -g);
                }
                Op::Mul(a, b) => {
                    acc(a, g * val(b));
                    acc(b, g * val(a));
                }
                Op::Div(a, b) => {
                    acc(a, g / val(b));
                    acc(b, -(g * nodes[i].value) / val(b));
                }
                Op::Neg(a) => acc(a, -g),
                Op::Scale(a, c) => acc(a, g * c),
                Op::DivConst(a, c) => acc(a, g / c),
                Op::Shift(a) => acc(a, g),
                Op::Exp(a) => acc(a, g * nodes[i].value),
                Op::Sigmoid(a) => {
                    let s = nodes[i].value;
                    acc(a, g * (s * (-s + 1.0)));
                }
                Op::Sin(a) => acc(a, g * val(a).cos()),
                Op::Cos(a) => acc(a, -(g * val(a).sin())),
            }
        }
        wrt.iter()
            .map(|v| {
                self.check_owner(*v);
                adj.get(v.idx as usize).copied().unwrap_or(0.0)
            })
            .collect()
    }

    /// d(output)/d(wrt) as recorded variables, differentiable again.
    pub fn gradient_graph<'t>(&'t self, output: Var<'t>, wrt: &[Var<'t>]) -> Vec<Var<'t>> {
        self.check_owner(output);
        let out = output.idx as usize;
        let lo = lowest_index(wrt, out);
        // Snapshot: the sweep appends nodes past `out` while it runs.
        let snapshot: Vec<(Op, bool)> = self.nodes.borrow()[lo..=out]
            .iter()
            .map(|n| (n.op, n.active))
            .collect();
        let mut adj: Vec<Option<Var<'t>>> = vec![None; out + 1 - lo];
        adj[out - lo] = Some(self.constant(1.0));
        let var = |j: u32| Var { tape: self, idx: j };
        for i in (lo..=out).rev() {
            let (op, active) = snapshot[i - lo];
            let Some(g) = adj[i - lo] else { continue };
            if !active {
                continue;
            }
            let me = var(i as u32);
            let mut acc = |j: u32, c: Var<'t>| {
                let j = j as usize;
                if j >= lo && snapshot[j - lo].1 {
                    let slot = &mut adj[j - lo];
                    *slot = Some(match *slot {
                        Some(prev) => prev + c,
                        None => c,
                    });
                }
            };
            match op {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    acc(a, g);
                    acc(b, g);
                }
                Op::Sub(a, b) => {
                    acc(a, g);
                    acc(b, -g);
                }
                Op::Mul(a, b) => {
                    acc(a, g * var(b));
                    acc(b, g * var(a));
                }
                Op::Div(a, b) => {
                    acc(a, g / var(b));
                    acc(b, -(g * me) / var(b));
                }
                Op::Neg(a) => acc(a, -g),
                Op::Scale(a, c) => acc(a, g * c),
                Op::DivConst(a, c) => acc(a, g / c),
                Op::Shift(a) => acc(a, g),
                Op::Exp(a) => acc(a, g * me),
                Op::Sigmoid(a) => acc(a, g * (me * (-me + 1.0))),
                Op::Sin(a) => acc(a, g * var(a).cos()),
                Op::Cos(a) => acc(a, -(g * var(a).sin())),
            }
        }
        wrt.iter()
            .map(|v| {
                self.check_owner(*v);
                (v.idx as usize)
                    .checked_sub(lo)
                    .and_then(|j| adj.get(j).copied().flatten())
                    .unwrap_or_else(|| self.constant(0.0))
            })
            .collect()
    }

    fn check_owner(&self, v: Var<'_>) {
        assert!(
            std::ptr::eq(self, v.tape),
            "variable belongs to a different tape"
        );
    }
}

/// Nodes below every `wrt` index cannot feed into any of them, so sweeps
/// stop there.
fn lowest_index(wrt: &[Var<'_>], out: usize) -> usize {
    wrt.iter().map(|v| v.idx as usize).min().unwrap_or(out).min(out)
}

impl<'t> Var<'t> {
    pub fn value(self) -> f64 {
        self.tape.value_of(self.idx)
    }

    pub fn tape(self) -> &'t Tape {
        self.tape
    }

    fn same_tape(self, other: Var<'t>) {
        debug_assert!(
            std::ptr::eq(self.tape, other.tape),
            "mixing variables from different tapes"
        );
    }
}

impl<'t> Scalar for Var<'t> {
    fn value(self) -> f64 {
        Var::value(self)
    }

    fn lift(self, c: f64) -> Self {
        self.tape.constant(c)
    }

    fn exp(self) -> Self {
        let v = self.value().exp();
        self.tape.unary(Op::Exp(self.idx), self.idx, v)
    }

    fn sigmoid(self) -> Self {
        let v = sigmoid(self.value());
        self.tape.unary(Op::Sigmoid(self.idx), self.idx, v)
    }

    fn sin(self) -> Self {
        let v = self.value().sin();
        self.tape.unary(Op::Sin(self.idx), self.idx, v)
    }

    fn cos(self) -> Self {
        let v = self.value().cos();
        self.tape.unary(Op::Cos(self.idx), self.idx, v)
    }
}

macro_rules! var_binop {
    ($tr:ident, $method:ident, $op:ident, $f:expr) => {
        impl<'t> $tr for Var<'t> {
            type Output = Var<'t>;
            fn $method(self, rhs: Var<'t>) -> Var<'t> {
                self.same_tape(rhs);
                let v = $f(self.value(), rhs.value());
                self.tape.binary(Op::$op(self.idx, rhs.idx), self.idx, rhs.idx, v)
            }
        }
    };
}

var_binop!(Add, add, Add, |a: f64, b: f64| a + b);
var_binop!(Sub, sub, Sub, |a: f64, b: f64| a - b);
var_binop!(Mul, mul, Mul, |a: f64, b: f64| a * b);
var_binop!(Div, div, Div, |a: f64, b: f64| a / b);

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        let v = -self.value();
        self.tape.unary(Op::Neg(self.idx), self.idx, v)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Var<'t>;
    fn add(self, c: f64) -> Var<'t> {
        let v = self.value() + c;
        self.tape.unary(Op::Shift(self.idx), self.idx, v)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, c: f64) -> Var<'t> {
        // a + (-c) is bitwise a - c under IEEE rounding.
        self + (-c)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, c: f64) -> Var<'t> {
        let v = self.value() * c;
        self.tape.unary(Op::Scale(self.idx, c), self.idx, v)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Var<'t>;
    fn div(self, c: f64) -> Var<'t> {
        let v = self.value() / c;
        self.tape.unary(Op::DivConst(self.idx, c), self.idx, v)
    }
}

impl<'t> Add<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn add(self, v: Var<'t>) -> Var<'t> {
        v + self
    }
}

impl<'t> Sub<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn sub(self, v: Var<'t>) -> Var<'t> {
        -v + self
    }
}

impl<'t> Mul<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn mul(self, v: Var<'t>) -> Var<'t> {
        v * self
    }
}

impl<'t> Div<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn div(self, v: Var<'t>) -> Var<'t> {
        v.tape.constant(self) / v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let tape = Tape::new();
        let x = tape.var(3.0);
        let y = tape.var(-2.0);
        let f = x * x * y + x / y;
        let g = tape.gradient(f, &[x, y]);
        // df/dx = 2xy + 1/y, df/dy = x^2 - x/y^2
        assert_eq!(g[0], 2.0 * 3.0 * -2.0 + 1.0 / -2.0);
        assert!((g[1] - (9.0 - 3.0 / 4.0)).abs() < 1e-15);
    }

    #[test]
    fn constants_receive_no_gradient() {
        let tape = Tape::new();
        let x = tape.var(2.0);
        let c = tape.constant(5.0);
        let f = x * c;
        assert_eq!(tape.gradient(f, &[x, c]), vec![5.0, 0.0]);
    }

    #[test]
    fn unrelated_variable_has_zero_gradient() {
        let tape = Tape::new();
        let x = tape.var(2.0);
        let f = x.exp();
        let late = tape.var(1.0);
        assert_eq!(tape.gradient(f, &[late]), vec![0.0]);
    }

    #[test]
    fn second_derivative_through_graph() {
        // f = sin(x) * x ; f' = cos(x) x + sin(x) ; f'' = -sin(x) x + 2 cos(x)
        let tape = Tape::new();
        let x = tape.var(0.7);
        let f = x.sin() * x;
        let d1 = tape.gradient_graph(f, &[x])[0];
        let d2 = tape.gradient(d1, &[x])[0];
        assert!((d1.value() - (0.7f64.cos() * 0.7 + 0.7f64.sin())).abs() < 1e-15);
        assert!((d2 - (-(0.7f64.sin()) * 0.7 + 2.0 * 0.7f64.cos())).abs() < 1e-14);
    }

    #[test]
    fn sigmoid_second_derivative() {
        let tape = Tape::new();
        let x = tape.var(0.3);
        let s = Scalar::sigmoid(x);
        let d1 = tape.gradient_graph(s, &[x])[0];
        let d2 = tape.gradient(d1, &[x])[0];
        let sv = sigmoid(0.3);
        assert!((d1.value() - sv * (1.0 - sv)).abs() < 1e-15);
        assert!((d2 - sv * (1.0 - sv) * (1.0 - 2.0 * sv)).abs() < 1e-15);
    }

    #[test]
    fn graph_and_plain_sweeps_agree_bitwise() {
        let tape = Tape::new();
        let xs = tape.vars(&[0.3, -1.2, 2.5]);
        let f = (xs[0] * xs[1]).exp() / (xs[2] + 1.0) - Scalar::sigmoid(xs[1] * 3.0) + xs[2].cos();
        let plain = tape.gradient(f, &xs);
        let graph: Vec<f64> = tape.gradient_graph(f, &xs).iter().map(|v| v.value()).collect();
        assert_eq!(plain, graph);
    }

    #[test]
    fn tape_values_match_f64() {
        let a = 0.1_f64;
        let b = 0.7_f64;
        let plain = (a - 3.0) * b / 7.0 + (2.0 - b);
        let tape = Tape::new();
        let (va, vb) = (tape.var(a), tape.var(b));
        let taped = (va - 3.0) * vb / 7.0 + (2.0 - vb);
        assert_eq!(plain.to_bits(), taped.value().to_bits());
    }
}
