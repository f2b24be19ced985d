//! Differentiation engine.
//!
//! First-order gradients of scalar objectives w.r.t. their input, and
//! outer gradients through an unrolled gradient-descent inner loop.

mod check;
mod scalar;
mod tape;

pub use check::{
    central_difference, check_gradient, max_relative_error, relative_error, GradientReport, REL_ERROR_FLOOR,
};
pub use scalar::{sum, Scalar};
pub use tape::{Tape, Var};

use crate::error::{Error, Result};

/// A deterministic scalar function of a parameter vector and an input vector.
///
/// Implementations are written once, generically, and evaluated either on
/// `f64` or on tape variables.
pub trait ScalarFunction {
    fn eval<T: Scalar>(&self, params: &[T], input: &[T]) -> T;
}

impl<F: ScalarFunction> ScalarFunction for &F {
    fn eval<T: Scalar>(&self, params: &[T], input: &[T]) -> T {
        (**self).eval(params, input)
    }
}

/// Swaps the roles of parameters and input, so checks can run over parameters.
pub struct WrtParams<F>(pub F);

impl<F: ScalarFunction> ScalarFunction for WrtParams<F> {
    fn eval<T: Scalar>(&self, params: &[T], input: &[T]) -> T {
        self.0.eval(input, params)
    }
}

/// `a f + b g`.
pub struct LinearCombination<F, G> {
    pub a: f64,
    pub f: F,
    pub b: f64,
    pub g: G,
}

impl<F: ScalarFunction, G: ScalarFunction> ScalarFunction for LinearCombination<F, G> {
    fn eval<T: Scalar>(&self, params: &[T], input: &[T]) -> T {
        self.f.eval(params, input) * self.a + self.g.eval(params, input) * self.b
    }
}

/// Value and input-gradient, without finiteness checks.
pub(crate) fn grad_wrt_input<F: ScalarFunction>(f: &F, params: &[f64], input: &[f64]) -> (f64, Vec<f64>) {
    let tape = Tape::with_capacity(64 * (params.len() + input.len()));
    let p = tape.constants(params);
    let x = tape.vars(input);
    let y = f.eval(&p, &x);
    (y.value(), tape.gradient(y, &x))
}

/// Gradient of `cost(params, actions)` w.r.t. the actions.
pub fn grad_wrt_actions<F: ScalarFunction>(cost: &F, params: &[f64], actions: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = actions.iter().position(|a| !a.is_finite()) {
        return Err(Error::non_finite("action", Some(i)));
    }
    let (value, grad) = grad_wrt_input(cost, params, actions);
    if !value.is_finite() {
        let idx = grad.iter().position(|g| !g.is_finite());
        return Err(Error::non_finite("cost value", idx));
    }
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::non_finite("cost gradient", Some(i)));
    }
    Ok(grad)
}

/// Plain gradient descent on the input: `steps` updates of size `step_size`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerLoop {
    pub steps: usize,
    pub step_size: f64,
}

impl InnerLoop {
    /// Runs the loop in plain `f64`: the inner problem by itself.
    pub fn run<C: ScalarFunction>(&self, cost: &C, params: &[f64], init: &[f64]) -> Result<Vec<f64>> {
        let mut u = init.to_vec();
        for _ in 0..self.steps {
            let g = grad_wrt_actions(cost, params, &u)?;
            for (ui, gi) in u.iter_mut().zip(&g) {
                *ui -= self.step_size * gi;
            }
        }
        Ok(u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnrolledGradient {
    /// Outer loss at the inner loop's result.
    pub loss: f64,
    /// d(loss)/d(params) through every inner step.
    pub grad: Vec<f64>,
    /// Inner loop's result.
    pub input: Vec<f64>,
}

/// Gradient of `outer_loss(params, u_N)` w.r.t. `params`, where `u_N` comes
/// from `inner.steps` descent steps on `cost(params, .)` starting at `init`.
///
/// Every inner step is recorded, including its cost gradient, so the result
/// carries the full second-order dependency of `u_N` on the parameters.
pub fn grad_through_inner_loop<C, L>(
    params: &[f64],
    init: &[f64],
    inner: InnerLoop,
    cost: &C,
    outer_loss: &L,
) -> Result<UnrolledGradient>
where
    C: ScalarFunction,
    L: ScalarFunction,
{
    if inner.steps == 0 {
        return Err(Error::InvalidArgument("inner loop needs at least one step".into()));
    }
    if !inner.step_size.is_finite() {
        return Err(Error::InvalidArgument("inner step size must be finite".into()));
    }
    let tape = Tape::with_capacity(1 << 16);
    let phi = tape.vars(params);
    let mut u = tape.vars(init);
    for _ in 0..inner.steps {
        let c = cost.eval(&phi, &u);
        if !c.value().is_finite() {
            return Err(Error::non_finite("inner cost", None));
        }
        let g = tape.gradient_graph(c, &u);
        u = u.iter().zip(&g).map(|(&ui, &gi)| ui - gi * inner.step_size).collect();
        if let Some(i) = u.iter().position(|v| !v.value().is_finite()) {
            return Err(Error::non_finite("inner-loop action", Some(i)));
        }
    }
    let loss = outer_loss.eval(&phi, &u);
    if !loss.value().is_finite() {
        return Err(Error::non_finite("outer loss", None));
    }
    let grad = tape.gradient(loss, &phi);
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::non_finite("outer gradient", Some(i)));
    }
    Ok(UnrolledGradient {
        loss: loss.value(),
        grad,
        input: u.iter().map(|v| v.value()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct SumSquares;
    impl ScalarFunction for SumSquares {
        fn eval<T: Scalar>(&self, _: &[T], x: &[T]) -> T {
            let sq: Vec<T> = x.iter().map(|v| v.square()).collect();
            sum(&sq, x[0].lift(0.0))
        }
    }

    struct Constant(f64);
    impl ScalarFunction for Constant {
        fn eval<T: Scalar>(&self, _: &[T], x: &[T]) -> T {
            x[0].lift(self.0)
        }
    }

    /// c(phi, u) = sum_i phi_i (u_i - 1)^2
    struct WeightedPull;
    impl ScalarFunction for WeightedPull {
        fn eval<T: Scalar>(&self, p: &[T], x: &[T]) -> T {
            let terms: Vec<T> = p.iter().zip(x).map(|(&w, &u)| w * (u - 1.0).square()).collect();
            sum(&terms, x[0].lift(0.0))
        }
    }

    /// l(u) = sum_i (u_i - target_i)^2
    struct Target(Vec<f64>);
    impl ScalarFunction for Target {
        fn eval<T: Scalar>(&self, _: &[T], x: &[T]) -> T {
            let terms: Vec<T> = x.iter().zip(&self.0).map(|(&u, &t)| (u - t).square()).collect();
            sum(&terms, x[0].lift(0.0))
        }
    }

    #[test]
    fn quadratic_gradient() {
        let g = grad_wrt_actions(&SumSquares, &[], &[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(g, vec![2.0, -4.0, 6.0]);
    }

    #[test]
    fn constant_cost_has_zero_gradient() {
        let g = grad_wrt_actions(&Constant(3.5), &[], &[0.4, 9.0]).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn non_finite_action_is_reported_with_index() {
        let err = grad_wrt_actions(&SumSquares, &[], &[1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::NumericDomain { index: Some(1), .. }));
    }

    #[test]
    fn zero_step_size_reduces_to_plain_outer_gradient() {
        let target = Target(vec![2.0, -1.0]);
        let init = [0.5, 0.25];
        let r = grad_through_inner_loop(
            &[0.3, 0.7],
            &init,
            InnerLoop { steps: 1, step_size: 0.0 },
            &WeightedPull,
            &target,
        )
        .unwrap();
        // loss does not depend on phi when the inner loop cannot move
        assert_eq!(r.grad, vec![0.0, 0.0]);
        assert_eq!(r.input, init.to_vec());
        assert_eq!(r.loss, (0.5f64 - 2.0).powi(2) + (0.25f64 + 1.0).powi(2));
    }

    #[test]
    fn cost_constant_in_input_gives_zero_outer_gradient() {
        let r = grad_through_inner_loop(
            &[1.0, 2.0],
            &[0.0, 0.0],
            InnerLoop { steps: 3, step_size: 0.1 },
            &Constant(4.0),
            &Target(vec![1.0, 1.0]),
        )
        .unwrap();
        assert_eq!(r.grad, vec![0.0, 0.0]);
    }

    #[test]
    fn one_step_matches_closed_form() {
        // u1 = u0 - a * 2 phi (u0 - 1); with u0 = 0: u1 = 2 a phi.
        // l = (u1 - t)^2, dl/dphi = 2 (u1 - t) * 2a.
        let a = 0.1;
        let phi = 1.5;
        let t = 2.0;
        let r = grad_through_inner_loop(
            &[phi],
            &[0.0],
            InnerLoop { steps: 1, step_size: a },
            &WeightedPull,
            &Target(vec![t]),
        )
        .unwrap();
        let u1 = 2.0 * a * phi;
        assert!((r.input[0] - u1).abs() < 1e-15);
        assert!((r.grad[0] - 2.0 * (u1 - t) * 2.0 * a).abs() < 1e-14);
    }

    #[test]
    fn zero_steps_rejected() {
        let err = grad_through_inner_loop(
            &[1.0],
            &[0.0],
            InnerLoop { steps: 0, step_size: 0.1 },
            &WeightedPull,
            &Target(vec![0.0]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn divergent_inner_loop_is_reported() {
        let err = grad_through_inner_loop(
            &[1e300],
            &[0.0],
            InnerLoop { steps: 5, step_size: 1e10 },
            &WeightedPull,
            &Target(vec![0.0]),
        )
        .unwrap_err();
        assert!(err.is_numeric());
    }
}
