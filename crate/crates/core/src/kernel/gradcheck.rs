//! Central finite-difference oracle for tape gradients.

use crate::error::{Error, Result};
use crate::kernel::{Tape, Tensor, Var};

/// Denominator floor for relative errors, so that coordinates whose true
/// gradient is ~0 are judged by absolute error instead.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub max_abs_err: f64,
    /// `(parameter index, flat coordinate)` of the worst relative error.
    pub worst: (usize, usize),
    pub coordinates: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_err < tol
    }
}

/// Compares the tape gradient of the scalar `f` against central
/// differences `(f(θ+h·e_i) − f(θ−h·e_i)) / 2h` for every coordinate of
/// every parameter.
pub fn grad_check<F>(f: F, params: &[Tensor], step: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let eval = |ps: &[Tensor]| -> Result<f64> {
        let mut tape = Tape::new();
        let vars = ps.iter().map(|p| tape.param(p)).collect::<Result<Vec<_>>>()?;
        let out = f(&mut tape, &vars)?;
        let v = tape.value(out).scalar();
        if !v.is_finite() {
            return Err(Error::NonFinite("grad_check objective"));
        }
        Ok(v)
    };

    let mut tape = Tape::new();
    let vars = params.iter().map(|p| tape.param(p)).collect::<Result<Vec<_>>>()?;
    let out = f(&mut tape, &vars)?;
    if !tape.value(out).scalar().is_finite() {
        return Err(Error::NonFinite("grad_check objective"));
    }
    let grads = tape.backward(out)?;

    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        max_abs_err: 0.0,
        worst: (0, 0),
        coordinates: 0,
    };
    let mut work = params.to_vec();
    for (pi, var) in vars.iter().enumerate() {
        let analytic = grads.get_or_zeros(*var, params[pi].shape());
        for k in 0..params[pi].data().len() {
            let orig = params[pi].data()[k];
            work[pi].data_mut()[k] = orig + step;
            let plus = eval(&work)?;
            work[pi].data_mut()[k] = orig - step;
            let minus = eval(&work)?;
            work[pi].data_mut()[k] = orig;

            let numeric = (plus - minus) / (2.0 * step);
            let a = analytic.data()[k];
            let abs = (a - numeric).abs();
            let rel = abs / a.abs().max(numeric.abs()).max(REL_FLOOR);
            report.coordinates += 1;
            report.max_abs_err = report.max_abs_err.max(abs);
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst = (pi, k);
            }
        }
    }
    Ok(report)
}
