//! Accelerated projected gradient on edge flows for objectives of the form
//! `Σ_v ψ(base(v) − div H(v))`, `H ∈ S`.

use std::collections::VecDeque;

use crate::graph::OrientedGraph;
use crate::scalar::Scalar;

use super::FlowSet;

/// Differentiable separable objective on vertex values.
pub(crate) trait VertexObjective<T> {
    fn value(&self, u: &[T]) -> T;
    fn gradient(&self, u: &[T], out: &mut [T]);
}

/// `½ Σ u(v)²`, the least-squares objective of a projection.
pub(crate) struct HalfSquaredNorm;

impl<T: Scalar> VertexObjective<T> for HalfSquaredNorm {
    fn value(&self, u: &[T]) -> T {
        u.iter().map(|&x| x * x).sum::<T>() * T::of(0.5)
    }

    fn gradient(&self, u: &[T], out: &mut [T]) {
        out.copy_from_slice(u);
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AcceleratedConfig<T> {
    /// Lipschitz constant of the flow gradient.
    pub lipschitz: T,
    /// Absolute target on the projected-gradient norm.
    pub tol: T,
    pub max_iterations: usize,
    /// Stop when the objective improves by less than `rel · (1 + |f|)` over
    /// `window` iterations.
    pub stall: Option<(usize, T)>,
}

#[derive(Debug, Clone)]
pub(crate) struct AcceleratedOutcome<T> {
    pub flow: Vec<T>,
    pub vertex: Vec<T>,
    pub objective: T,
    pub optimality: T,
    pub iterations: usize,
    pub converged: bool,
}

/// `u = base − div h`.
pub(crate) fn vertex_values<T: Scalar>(g: &OrientedGraph, base: &[T], h: &[T], out: &mut [T]) {
    g.divergence_into(h, out);
    for (o, &b) in out.iter_mut().zip(base) {
        *o = b - *o;
    }
}

/// Gradient with respect to `h` of `Σ ψ(base − div h)` given `ψ'(u)`:
/// `∂/∂h(i,j) = ψ'(u_i) − ψ'(u_j)`.
fn edge_gradient<T: Scalar>(g: &OrientedGraph, vertex_grad: &[T], out: &mut [T]) {
    g.divergence_adjoint_into(vertex_grad, out);
    out.iter_mut().for_each(|v| *v = -*v);
}

struct Workspace<T> {
    vertex_grad: Vec<T>,
    edge_grad: Vec<T>,
    trial: Vec<T>,
}

impl<T: Scalar> Workspace<T> {
    fn new(n: usize, m: usize) -> Self {
        Self {
            vertex_grad: vec![T::zero(); n],
            edge_grad: vec![T::zero(); m],
            trial: vec![T::zero(); m],
        }
    }

    /// Stores `P(point − step · ∇)` in `self.trial`, using the vertex values
    /// `u` of `point`.
    fn gradient_step<S, O>(
        &mut self,
        g: &OrientedGraph,
        set: &S,
        objective: &O,
        point: &[T],
        u: &[T],
        step: T,
    ) where
        S: FlowSet<T> + ?Sized,
        O: VertexObjective<T> + ?Sized,
    {
        objective.gradient(u, &mut self.vertex_grad);
        edge_gradient(g, &self.vertex_grad, &mut self.edge_grad);
        for ((t, &p), &d) in self.trial.iter_mut().zip(point).zip(&self.edge_grad) {
            *t = p - step * d;
        }
        set.project(&mut self.trial);
    }
}

fn distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

/// FISTA with a fixed step `1/L` and restart whenever the objective would
/// increase, which keeps the accepted iterates monotone.
pub(crate) fn accelerated_descent<T, S, O>(
    g: &OrientedGraph,
    base: &[T],
    set: &S,
    objective: &O,
    start: Vec<T>,
    config: &AcceleratedConfig<T>,
    mut observe: impl FnMut(&[T], T),
) -> AcceleratedOutcome<T>
where
    T: Scalar,
    S: FlowSet<T> + ?Sized,
    O: VertexObjective<T> + ?Sized,
{
    let (n, m) = (g.vertex_count(), g.edge_count());
    let step = T::one() / config.lipschitz;
    let mut ws = Workspace::new(n, m);

    let mut x = start;
    set.project(&mut x);
    let mut ux = vec![T::zero(); n];
    vertex_values(g, base, &x, &mut ux);
    let mut fx = objective.value(&ux);
    observe(&ux, fx);

    let mut y = x.clone();
    let mut uy = ux.clone();
    let mut u_trial = vec![T::zero(); n];
    let mut theta = T::one();
    let mut history: VecDeque<T> = VecDeque::new();

    let optimality_at = |ws: &mut Workspace<T>, x: &[T], ux: &[T]| -> T {
        ws.gradient_step(g, set, objective, x, ux, step);
        distance(x, &ws.trial) / step
    };

    let mut optimality = optimality_at(&mut ws, &x, &ux);
    if optimality <= config.tol || m == 0 {
        return AcceleratedOutcome {
            flow: x,
            vertex: ux,
            objective: fx,
            optimality,
            iterations: 0,
            converged: true,
        };
    }

    for iteration in 1..=config.max_iterations {
        ws.gradient_step(g, set, objective, &y, &uy, step);
        vertex_values(g, base, &ws.trial, &mut u_trial);
        let mut f_trial = objective.value(&u_trial);
        if f_trial > fx {
            theta = T::one();
            ws.gradient_step(g, set, objective, &x, &ux, step);
            vertex_values(g, base, &ws.trial, &mut u_trial);
            f_trial = objective.value(&u_trial);
        }
        let theta_next = (T::one() + (T::one() + T::of(4.0) * theta * theta).sqrt()) * T::of(0.5);
        let beta = (theta - T::one()) / theta_next;
        for ((yv, &xn), &xo) in y.iter_mut().zip(&ws.trial).zip(&x) {
            *yv = xn + beta * (xn - xo);
        }
        theta = theta_next;
        std::mem::swap(&mut x, &mut ws.trial);
        std::mem::swap(&mut ux, &mut u_trial);
        fx = f_trial;
        vertex_values(g, base, &y, &mut uy);
        observe(&ux, fx);

        optimality = optimality_at(&mut ws, &x, &ux);
        if optimality <= config.tol {
            return AcceleratedOutcome {
                flow: x,
                vertex: ux,
                objective: fx,
                optimality,
                iterations: iteration,
                converged: true,
            };
        }
        if let Some((window, rel)) = config.stall {
            history.push_back(fx);
            if history.len() > window {
                let old = history.pop_front().unwrap_or(fx);
                if old - fx <= rel * (T::one() + fx.abs()) {
                    return AcceleratedOutcome {
                        flow: x,
                        vertex: ux,
                        objective: fx,
                        optimality,
                        iterations: iteration,
                        converged: true,
                    };
                }
            }
        }
    }
    AcceleratedOutcome {
        flow: x,
        vertex: ux,
        objective: fx,
        optimality,
        iterations: config.max_iterations,
        converged: false,
    }
}
