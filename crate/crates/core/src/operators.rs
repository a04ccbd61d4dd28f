//! Forward-model abstraction and the nonlinear compressive-sensing
//! operator family y = a(A * b(x)) with componentwise power nonlinearities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix data",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    what: "matrix row",
                    expected: c,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        DenseMatrix::new(r, c, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// A * x.
    pub fn matvec(&self, x: &Signal) -> Signal {
        debug_assert_eq!(x.dim(), self.cols);
        let xs = x.as_slice();
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            out.push(row.iter().zip(xs).map(|(a, b)| a * b).sum());
        }
        Signal::from_vec(out)
    }

    /// A^T * w (rows of A swept once, accumulating into the output).
    pub fn matvec_transpose(&self, w: &Signal) -> Signal {
        debug_assert_eq!(w.dim(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let wi = w[i];
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += wi * a;
            }
        }
        Signal::from_vec(out)
    }

    /// New matrix with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Largest singular value, estimated by power iteration on A^T A.
    pub fn spectral_norm_est(&self, iters: usize) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        let mut v = Signal::constant(self.cols, 1.0 / (self.cols as f64).sqrt());
        let mut sigma = 0.0;
        for _ in 0..iters {
            let av = self.matvec(&v);
            let atav = self.matvec_transpose(&av);
            let norm = atav.norm_l2();
            if norm == 0.0 {
                return 0.0;
            }
            v = atav.scaled(1.0 / norm);
            sigma = self.matvec(&v).norm_l2();
        }
        sigma
    }
}

/// Rescale every entry of `a` by `factor`.
pub fn rescale_matrix(a: &DenseMatrix, factor: f64) -> Result<DenseMatrix> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "rescale factor must be positive and finite, got {factor}"
        )));
    }
    Ok(a.scaled(factor))
}

/// A differentiable forward operator F: R^n -> R^m together with
/// matrix-free Jacobian and adjoint-Jacobian products.
pub trait ForwardModel {
    /// (n, m): input and output dimensions.
    fn dims(&self) -> (usize, usize);

    /// F(x), length m.
    fn apply(&self, x: &Signal) -> Result<Signal>;

    /// F'(x) * v, length m.
    fn jacobian_apply(&self, x: &Signal, v: &Signal) -> Result<Signal>;

    /// F'(x)^* * w, length n. All spaces are real, so the adjoint is the
    /// transpose and <F'(x) v, w> = <v, F'(x)^* w> must hold.
    fn jacobian_adjoint_apply(&self, x: &Signal, w: &Signal) -> Result<Signal>;
}

/// Shape of the componentwise nonlinearities in [`NonlinearCsModel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorForm {
    /// a(u) = u + u^c, b(x) = x + x^d.
    Additive,
    /// a(u) = u^c, b(x) = x^d. With c = d = 1 this is the plain linear map;
    /// with c = 2, d = 1 it produces intensity measurements (A x)^2.
    PurePower,
}

/// The nonlinear compressive-sensing operator F(x) = a(A * b(x)).
#[derive(Clone, Debug)]
pub struct NonlinearCsModel {
    matrix: DenseMatrix,
    c: u32,
    d: u32,
    form: OperatorForm,
}

impl NonlinearCsModel {
    pub fn new(matrix: DenseMatrix, c: u32, d: u32, form: OperatorForm) -> Result<Self> {
        if c < 1 || d < 1 {
            return Err(Error::InvalidParam(format!(
                "power exponents must satisfy c >= 1 and d >= 1, got c = {c}, d = {d}"
            )));
        }
        Ok(NonlinearCsModel {
            matrix,
            c,
            d,
            form,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    fn outer(&self, u: f64) -> f64 {
        match self.form {
            OperatorForm::Additive => u + u.powi(self.c as i32),
            OperatorForm::PurePower => u.powi(self.c as i32),
        }
    }

    fn inner(&self, x: f64) -> f64 {
        match self.form {
            OperatorForm::Additive => x + x.powi(self.d as i32),
            OperatorForm::PurePower => x.powi(self.d as i32),
        }
    }

    // Derivative of the outer map at u; x^0 == 1 by powi, so c = 1 gives the
    // constant 2 (additive) or 1 (pure power) as expected.
    fn outer_deriv(&self, u: f64) -> f64 {
        let p = self.c as f64 * u.powi(self.c as i32 - 1);
        match self.form {
            OperatorForm::Additive => 1.0 + p,
            OperatorForm::PurePower => p,
        }
    }

    fn inner_deriv(&self, x: f64) -> f64 {
        let p = self.d as f64 * x.powi(self.d as i32 - 1);
        match self.form {
            OperatorForm::Additive => 1.0 + p,
            OperatorForm::PurePower => p,
        }
    }

    fn check_input(&self, x: &Signal, what: &'static str) -> Result<()> {
        if x.dim() != self.matrix.cols() {
            return Err(Error::DimensionMismatch {
                what,
                expected: self.matrix.cols(),
                got: x.dim(),
            });
        }
        Ok(())
    }

    /// A * b(x), the mixed pre-image the outer nonlinearity acts on.
    fn mixed(&self, x: &Signal) -> Signal {
        self.matrix.matvec(&x.map(|v| self.inner(v)))
    }
}

impl ForwardModel for NonlinearCsModel {
    fn dims(&self) -> (usize, usize) {
        (self.matrix.cols(), self.matrix.rows())
    }

    fn apply(&self, x: &Signal) -> Result<Signal> {
        self.check_input(x, "operator input")?;
        if !x.all_finite() {
            return Err(Error::NonFinite("operator input"));
        }
        let y = self.mixed(x).map(|u| self.outer(u));
        if !y.all_finite() {
            return Err(Error::DivergedEvaluation("forward operator"));
        }
        Ok(y)
    }

    fn jacobian_apply(&self, x: &Signal, v: &Signal) -> Result<Signal> {
        self.check_input(x, "jacobian point")?;
        self.check_input(v, "jacobian direction")?;
        if !x.all_finite() || !v.all_finite() {
            return Err(Error::NonFinite("jacobian input"));
        }
        let u = self.mixed(x);
        let scaled_v = Signal::from_vec(
            v.iter()
                .zip(x.iter())
                .map(|(&vj, &xj)| self.inner_deriv(xj) * vj)
                .collect(),
        );
        let av = self.matrix.matvec(&scaled_v);
        let out = Signal::from_vec(
            av.iter()
                .zip(u.iter())
                .map(|(&avi, &ui)| self.outer_deriv(ui) * avi)
                .collect(),
        );
        if !out.all_finite() {
            return Err(Error::DivergedEvaluation("jacobian product"));
        }
        Ok(out)
    }

    fn jacobian_adjoint_apply(&self, x: &Signal, w: &Signal) -> Result<Signal> {
        self.check_input(x, "jacobian point")?;
        if w.dim() != self.matrix.rows() {
            return Err(Error::DimensionMismatch {
                what: "adjoint direction",
                expected: self.matrix.rows(),
                got: w.dim(),
            });
        }
        if !x.all_finite() || !w.all_finite() {
            return Err(Error::NonFinite("adjoint input"));
        }
        let u = self.mixed(x);
        let scaled_w = Signal::from_vec(
            w.iter()
                .zip(u.iter())
                .map(|(&wi, &ui)| self.outer_deriv(ui) * wi)
                .collect(),
        );
        let atw = self.matrix.matvec_transpose(&scaled_w);
        let out = Signal::from_vec(
            atw.iter()
                .zip(x.iter())
                .map(|(&aj, &xj)| self.inner_deriv(xj) * aj)
                .collect(),
        );
        if !out.all_finite() {
            return Err(Error::DivergedEvaluation("adjoint jacobian product"));
        }
        Ok(out)
    }
}

/// Central finite-difference approximation of F'(x) * v with stencil
/// width h: (F(x + h v) - F(x - h v)) / (2 h). Verification oracle for
/// analytic Jacobian products; O(h^2) truncation error.
pub fn finite_difference_jacobian_apply(
    model: &dyn ForwardModel,
    x: &Signal,
    v: &Signal,
    h: f64,
) -> Result<Signal> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let fp = model.apply(&x.add_scaled(h, v))?;
    let fm = model.apply(&x.add_scaled(-h, v))?;
    let out = fp.sub(&fm).scaled(1.0 / (2.0 * h));
    if !out.all_finite() {
        return Err(Error::DivergedEvaluation("finite-difference quotient"));
    }
    Ok(out)
}
