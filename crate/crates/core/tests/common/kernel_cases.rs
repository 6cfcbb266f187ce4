//! Random op-level instances for the gradient oracle.

use std::sync::Arc;

use rand::Rng;
use robust_gnn::kernel::Reduce;
use robust_gnn::{Csr, Result, Tape, Tensor, Var};

use super::{max_rel_err, numeric_gradient, random_edges, random_tensor, rng};

pub const STEP: f64 = 1e-5;
pub const FLOOR: f64 = 1e-6;

pub type Build = dyn Fn(&mut Tape, &[Var]) -> Result<Var>;

/// Reduces an arbitrary matrix output to a scalar with a fixed random
/// projection, so every output coordinate carries weight.
pub fn scalarize(tape: &mut Tape, out: Var, proj: &Tensor) -> Result<Var> {
    let r = tape.constant(proj.clone())?;
    let d = tape.row_dot(out, r)?;
    tape.mean_rows(d)
}

fn eval(f: &Build, params: &[Tensor]) -> f64 {
    let mut tape = Tape::new();
    let vars: Vec<Var> = params.iter().map(|p| tape.param(p).unwrap()).collect();
    let out = f(&mut tape, &vars).unwrap();
    tape.value(out).scalar()
}

fn analytic(f: &Build, params: &[Tensor]) -> Vec<Tensor> {
    let mut tape = Tape::new();
    let vars: Vec<Var> = params.iter().map(|p| tape.param(p).unwrap()).collect();
    let out = f(&mut tape, &vars).unwrap();
    let grads = tape.backward(out).unwrap();
    vars.iter()
        .zip(params)
        .map(|(&v, p)| grads.get_or_zeros(v, p.shape()))
        .collect()
}

pub type Case = (Box<Build>, Vec<Tensor>);

/// Worst relative error of the tape against central differences over
/// instances `0..instances` of `make`.
pub fn worst_error(make: impl Fn(u64) -> Case, instances: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..instances {
        let (f, params) = make(seed);
        let a = analytic(&*f, &params);
        let n = numeric_gradient(|p| eval(&*f, p), &params, STEP);
        worst = worst.max(max_rel_err(&a, &n, FLOOR));
    }
    worst
}

pub fn dims(seed: u64) -> (rand_chacha::ChaCha8Rng, usize, usize) {
    let mut r = rng(seed);
    let a = r.random_range(1..6);
    let b = r.random_range(1..6);
    (r, a, b)
}

pub fn matmul(seed: u64) -> Case {
    let (mut r, n, k) = dims(seed);
    let m = r.random_range(1..6);
    let params = vec![random_tensor(n, k, &mut r), random_tensor(k, m, &mut r)];
    let proj = random_tensor(1, m, &mut r);
    let f = move |t: &mut Tape, v: &[Var]| {
        let o = t.matmul(v[0], v[1])?;
        scalarize(t, o, &proj)
    };
    (Box::new(f), params)
}

pub fn add_and_scale(seed: u64) -> Case {
    let (mut r, n, c) = dims(seed);
    let s: f64 = r.random_range(-3.0..3.0);
    let params = vec![random_tensor(n, c, &mut r), random_tensor(n, c, &mut r)];
    let proj = random_tensor(1, c, &mut r);
    let f = move |t: &mut Tape, v: &[Var]| {
        let a = t.scale(v[0], s)?;
        let o = t.add(a, v[1])?;
        // reusing an input exercises gradient accumulation
        let o = t.add(o, v[0])?;
        scalarize(t, o, &proj)
    };
    (Box::new(f), params)
}

pub fn relu_and_sigmoid(seed: u64) -> Case {
    let (mut r, n, c) = dims(seed);
    let params = vec![random_tensor(n, c, &mut r).scaled(4.0)];
    let proj = random_tensor(1, c, &mut r);
    let f = move |t: &mut Tape, v: &[Var]| {
        let a = t.relu(v[0])?;
        let b = t.sigmoid(v[0])?;
        let o = t.add(a, b)?;
        scalarize(t, o, &proj)
    };
    (Box::new(f), params)
}

pub fn transpose_and_concat(seed: u64) -> Case {
    let (mut r, n, c) = dims(seed);
    let c2 = r.random_range(1..4);
    let params = vec![random_tensor(c, n, &mut r), random_tensor(n, c2, &mut r)];
    let proj = random_tensor(1, c + c2 + c, &mut r);
    let f = move |t: &mut Tape, v: &[Var]| {
        let a = t.transpose(v[0])?;
        let o = t.concat_cols(&[a, v[1], a])?;
        scalarize(t, o, &proj)
    };
    (Box::new(f), params)
}

pub fn row_lookup_with_repeats(seed: u64) -> Case {
    let (mut r, n, c) = dims(seed);
    let idx: Vec<usize> = (0..r.random_range(1..8)).map(|_| r.random_range(0..n)).collect();
    let params = vec![random_tensor(n, c, &mut r)];
    let proj = random_tensor(1, c, &mut r);
    let f = move |t: &mut Tape, v: &[Var]| {
        let o = t.row_lookup(v[0], &idx)?;
        scalarize(t, o, &proj)
    };
    (Box::new(f), params)
}

pub fn row_dot_and_mean_rows(seed: u64) -> Case {
    let (mut r, n, c) = dims(seed);
    let params = vec![
        random_tensor(n, c, &mut r),
        random_tensor(n, c, &mut r),
        random_tensor(1, c, &mut r),
    ];
    let f = move |t: &mut Tape, v: &[Var]| {
        let full = t.row_dot(v[0], v[1])?;
        let bcast = t.row_dot(v[0], v[2])?;
        let prod = t.row_dot(full, bcast)?;
        t.mean_rows(prod)
    };
    (Box::new(f), params)
}

pub fn neighbor_case(reduce: Reduce) -> impl Fn(u64) -> Case {
    move |seed| {
        let (mut r, _, c) = dims(seed);
        let n = r.random_range(2..9);
        let adj = Arc::new(Csr::from_edges(n, random_edges(n, 0.4, &mut r)).unwrap());
        let params = vec![random_tensor(n, c, &mut r)];
        let proj = random_tensor(1, c, &mut r);
        let f = move |t: &mut Tape, v: &[Var]| {
            let o = t.neighbor_rows(v[0], &adj, reduce)?;
            scalarize(t, o, &proj)
        };
        (Box::new(f), params)
    }
}

pub fn softmax_cross_entropy(seed: u64) -> Case {
    let (mut r, n, _) = dims(seed);
    let c = r.random_range(2..6);
    let rows: Vec<usize> = (0..r.random_range(1..6)).map(|_| r.random_range(0..n)).collect();
    let targets: Vec<usize> = rows.iter().map(|_| r.random_range(0..c)).collect();
    let params = vec![random_tensor(n, c, &mut r).scaled(3.0)];
    let f = move |t: &mut Tape, v: &[Var]| t.softmax_xent(v[0], &rows, &targets);
    (Box::new(f), params)
}

pub fn binary_cross_entropy_with_logits(seed: u64) -> Case {
    let (mut r, n, c) = dims(seed);
    let targets: Vec<f64> = (0..n * c).map(|_| r.random_range(0.0..1.0)).collect();
    let scale = r.random_range(0.1..2.0);
    let params = vec![random_tensor(n, c, &mut r).scaled(5.0)];
    let f = move |t: &mut Tape, v: &[Var]| t.binary_xent_with_logits(v[0], &targets, scale);
    (Box::new(f), params)
}

pub fn composite_two_layer_network(seed: u64) -> Case {
    let mut r = rng(seed);
    let n = r.random_range(3..8);
    let (d, h, c) = (4, 3, 2);
    let adj = Arc::new(Csr::from_edges(n, random_edges(n, 0.5, &mut r)).unwrap());
    let x = random_tensor(n, d, &mut r);
    let labels: Vec<usize> = (0..n).map(|v| v % c).collect();
    let params = vec![random_tensor(d, h, &mut r), random_tensor(h, c, &mut r)];
    let f = move |t: &mut Tape, v: &[Var]| {
        let x = t.constant(x.clone())?;
        let a = t.neighbor_rows(x, &adj, Reduce::MeanWithSelf)?;
        let z = t.matmul(a, v[0])?;
        let z = t.sigmoid(z)?;
        let z = t.matmul(z, v[1])?;
        let rows: Vec<usize> = (0..n).collect();
        t.softmax_xent(z, &rows, &labels)
    };
    (Box::new(f), params)
}

/// Every op family with its label.
pub type Family = (&'static str, Box<dyn Fn(u64) -> Case>);

pub fn all() -> Vec<Family> {
    vec![
        ("matmul", Box::new(matmul)),
        ("add/scale", Box::new(add_and_scale)),
        ("relu/sigmoid", Box::new(relu_and_sigmoid)),
        ("transpose/concat", Box::new(transpose_and_concat)),
        ("row_lookup", Box::new(row_lookup_with_repeats)),
        ("row_dot", Box::new(row_dot_and_mean_rows)),
        ("neighbor mean", Box::new(neighbor_case(Reduce::Mean))),
        ("neighbor sum", Box::new(neighbor_case(Reduce::Sum))),
        ("neighbor max", Box::new(neighbor_case(Reduce::Max))),
        (
            "neighbor mean+self",
            Box::new(neighbor_case(Reduce::MeanWithSelf)),
        ),
        ("softmax_xent", Box::new(softmax_cross_entropy)),
        ("binary_xent", Box::new(binary_cross_entropy_with_logits)),
        ("composite", Box::new(composite_two_layer_network)),
    ]
}
