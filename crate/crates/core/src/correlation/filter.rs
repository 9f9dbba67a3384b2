//! Quasi-correlation recursions.
//!
//! For t ≥ 2
//!
//! ```text
//! Q_t = (1 − a − b) R̄ + a · G_t ⊙ (Q̃_{t−1} ε_{t−1} ε'_{t−1} Q̃_{t−1}) + b · Q_{t−1}
//! R_t = Q̃_t⁻¹ Q_t Q̃_t⁻¹,   Q̃_t = diag(√q_ii,t)
//! ```
//!
//! with `G_t = 1` for DCC and `G_t = exp⊙[φ (R_{t−1} − J)]` for NLARC.
//! `Q_1 = R̄` unless a starting state is supplied.

use serde::{Deserialize, Serialize};

use super::{CorrModel, DccParams, NlarcParams};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, RowMatrix};

/// Sequence of conditional correlation matrices with a positive-definiteness
/// certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPath {
    pub n: usize,
    /// T row-major N×N correlation matrices, concatenated.
    pub matrices: Vec<f64>,
    /// T row-major N×N quasi-correlation matrices, concatenated.
    pub q_matrices: Vec<f64>,
    /// Smallest eigenvalue over every R_t.
    pub min_eigenvalue: f64,
}

impl CorrelationPath {
    pub fn len(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.matrices.len() / (self.n * self.n)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn r(&self, t: usize) -> &[f64] {
        let nn = self.n * self.n;
        &self.matrices[t * nn..(t + 1) * nn]
    }

    pub fn q(&self, t: usize) -> &[f64] {
        let nn = self.n * self.n;
        &self.q_matrices[t * nn..(t + 1) * nn]
    }

    /// Correlation of series `i` and `j` over time.
    pub fn pair(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.len()).map(|t| self.r(t)[i * self.n + j]).collect()
    }

    /// Largest `|R_t[i][i] − 1|`.
    pub fn max_diagonal_error(&self) -> f64 {
        (0..self.len())
            .flat_map(|t| (0..self.n).map(move |i| (t, i)))
            .map(|(t, i)| (self.r(t)[i * self.n + i] - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Constant path `R_t = r` for `t_len` steps.
    pub fn constant(r: &[f64], n: usize, t_len: usize) -> Self {
        let matrices = r.repeat(t_len);
        Self {
            n,
            q_matrices: matrices.clone(),
            matrices,
            min_eigenvalue: min_eigenvalue(r, n),
        }
    }
}

/// Gate entry `exp(φ (r − 1))`.
#[inline]
pub fn gate_entry(r: f64, phi: f64) -> f64 {
    (phi * (r - 1.0)).exp()
}

/// The NLARC news-impact gate `A_t = exp⊙[φ (R_{t−1} − J)]`.
pub fn hadamard_gate(r_prev: &[f64], n: usize, phi_a: f64) -> Result<Vec<f64>> {
    if !(phi_a >= 0.0) {
        return Err(Error::InvalidParams(format!("phi_A must be >= 0, got {phi_a}")));
    }
    if r_prev.len() != n * n || r_prev.iter().any(|v| !(-1.0..=1.0).contains(v)) {
        return Err(Error::InvalidInput("gate input must be an N×N matrix with entries in [-1, 1]".into()));
    }
    Ok(r_prev.iter().map(|&r| gate_entry(r, phi_a)).collect())
}

/// Scratch state for one pass of the recursion.
pub(crate) struct Recursion<'a> {
    n: usize,
    r_bar: &'a [f64],
    c: f64,
    a: f64,
    b: f64,
    phi: Option<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    /// √q_ii
    pub qd: Vec<f64>,
    q_next: Vec<f64>,
    x: Vec<f64>,
    t: usize,
}

impl<'a> Recursion<'a> {
    pub fn new(model: &CorrModel, r_bar: &'a [f64], n: usize, init_q: Option<&[f64]>) -> Self {
        let (a, b, phi) = match *model {
            CorrModel::Ccc => (0.0, 0.0, None),
            CorrModel::Dcc(p) => (p.a, p.b, None),
            CorrModel::Nlarc(p) => (p.a, p.b, Some(p.phi_a)),
        };
        let q = init_q.unwrap_or(r_bar).to_vec();
        let mut s = Self {
            n,
            r_bar,
            c: 1.0 - a - b,
            a,
            b,
            phi,
            r: vec![0.0; n * n],
            qd: vec![0.0; n],
            q_next: vec![0.0; n * n],
            x: vec![0.0; n],
            q,
            t: 0,
        };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let n = self.n;
        for i in 0..n {
            self.qd[i] = self.q[i * n + i].sqrt();
        }
        for i in 0..n {
            for j in 0..n {
                self.r[i * n + j] = if i == j {
                    1.0
                } else {
                    self.q[i * n + j] / (self.qd[i] * self.qd[j])
                };
            }
        }
    }

    /// Checks the current state; call before [`advance`].
    pub fn check(&self) -> Result<()> {
        if self.q.iter().chain(&self.r).any(|v| !v.is_finite()) || self.qd.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::NonFinite(self.t));
        }
        Ok(())
    }

    /// `Q̃_t ε_t` for the current state.
    pub fn scaled_shock(&mut self, eps: &[f64]) -> &[f64] {
        for i in 0..self.n {
            self.x[i] = self.qd[i] * eps[i];
        }
        &self.x
    }

    /// Moves from Q_t to Q_{t+1} using ε_t.
    pub fn advance(&mut self, eps: &[f64]) {
        let n = self.n;
        for i in 0..n {
            self.x[i] = self.qd[i] * eps[i];
        }
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                let m = self.x[i] * self.x[j];
                let shock = match self.phi {
                    Some(phi) => gate_entry(self.r[k], phi) * m,
                    None => m,
                };
                self.q_next[k] = self.c * self.r_bar[k] + self.a * shock + self.b * self.q[k];
            }
        }
        std::mem::swap(&mut self.q, &mut self.q_next);
        self.t += 1;
        self.normalize();
    }
}

fn validate(eps: &RowMatrix, r_bar: &[f64]) -> Result<()> {
    let n = eps.cols();
    if r_bar.len() != n * n {
        return Err(Error::InvalidInput(format!("R̄ must be {n}×{n}")));
    }
    for i in 0..n {
        if (r_bar[i * n + i] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("R̄ must have unit diagonal".into()));
        }
        for j in 0..n {
            if (r_bar[i * n + j] - r_bar[j * n + i]).abs() > 1e-12 {
                return Err(Error::InvalidInput("R̄ must be symmetric".into()));
            }
        }
    }
    if !(min_eigenvalue(r_bar, n) > 0.0) {
        return Err(Error::SingularCorrelation);
    }
    Ok(())
}

/// Runs the recursion over the whole panel, storing every Q_t and R_t.
/// `init_q` overrides `Q_1 = R̄`.
pub fn filter_path(eps: &RowMatrix, model: &CorrModel, r_bar: &[f64], init_q: Option<&[f64]>) -> Result<CorrelationPath> {
    model.validate()?;
    validate(eps, r_bar)?;
    let (t_len, n) = (eps.rows(), eps.cols());
    let mut rec = Recursion::new(model, r_bar, n, init_q);
    let mut matrices = Vec::with_capacity(t_len * n * n);
    let mut q_matrices = Vec::with_capacity(t_len * n * n);
    let mut min_eig = f64::INFINITY;
    for t in 0..t_len {
        rec.check()?;
        let lam = min_eigenvalue(&rec.r, n);
        if !(lam > 0.0) {
            return Err(Error::NotPositiveDefinite(t));
        }
        min_eig = min_eig.min(lam);
        matrices.extend_from_slice(&rec.r);
        q_matrices.extend_from_slice(&rec.q);
        if t + 1 < t_len {
            rec.advance(eps.row(t));
        }
    }
    Ok(CorrelationPath {
        n,
        matrices,
        q_matrices,
        min_eigenvalue: min_eig,
    })
}

/// DCC path with the Aielli-corrected shock term.
pub fn dcc_filter(eps: &RowMatrix, params: DccParams, r_bar: &[f64]) -> Result<CorrelationPath> {
    filter_path(eps, &CorrModel::Dcc(params), r_bar, None)
}

/// NLARC path: the DCC shock term multiplied entrywise by the gate built from
/// the previous correlation matrix.
pub fn nlarc_filter(eps: &RowMatrix, params: NlarcParams, r_bar: &[f64]) -> Result<CorrelationPath> {
    filter_path(eps, &CorrModel::Nlarc(params), r_bar, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps() -> RowMatrix {
        RowMatrix::from_row_major(4, 2, vec![0.5, -1.0, 1.5, 0.3, -0.2, 2.0, 0.9, 0.9])
    }

    const RBAR: [f64; 4] = [1.0, 0.4, 0.4, 1.0];

    #[test]
    fn zero_parameters_give_constant_path() {
        let p = dcc_filter(&eps(), DccParams::new(0.0, 0.0).unwrap(), &RBAR).unwrap();
        for t in 0..4 {
            assert_eq!(p.r(t), &RBAR);
        }
    }

    #[test]
    fn zero_a_is_a_fixed_point() {
        let p = dcc_filter(&eps(), DccParams::new(0.0, 0.93).unwrap(), &RBAR).unwrap();
        for t in 0..4 {
            for (x, y) in p.r(t).iter().zip(&RBAR) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gate_values() {
        let g = hadamard_gate(&[1.0, 0.5, 0.5, 1.0], 2, 2.0).unwrap();
        assert_eq!(g[0], 1.0);
        assert!((g[1] - (-1.0f64).exp()).abs() < 1e-16);
        assert!((g[1] - 0.367879).abs() < 1e-6);
        let ones = hadamard_gate(&[1.0, -0.7, -0.7, 1.0], 2, 0.0).unwrap();
        assert!(ones.iter().all(|v| *v == 1.0));
        assert!(hadamard_gate(&RBAR, 2, -0.1).is_err());
    }

    #[test]
    fn a_zero_nlarc_ignores_phi() {
        let p = nlarc_filter(&eps(), NlarcParams::new(0.0, 0.9, 7.0).unwrap(), &RBAR).unwrap();
        for t in 0..4 {
            for (x, y) in p.r(t).iter().zip(&RBAR) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_bad_r_bar() {
        let bad = [1.0, 1.0, 1.0, 1.0];
        assert!(dcc_filter(&eps(), DccParams::new(0.05, 0.9).unwrap(), &bad).is_err());
        let asym = [1.0, 0.2, 0.3, 1.0];
        assert!(dcc_filter(&eps(), DccParams::new(0.05, 0.9).unwrap(), &asym).is_err());
    }

    #[test]
    fn non_finite_input_reports_time() {
        let e = RowMatrix::from_row_major(3, 2, vec![0.1, 0.2, f64::NAN, 0.1, 0.3, 0.3]);
        let err = dcc_filter(&e, DccParams::new(0.05, 0.9).unwrap(), &RBAR).unwrap_err();
        assert!(matches!(err, Error::NonFinite(2)), "{err:?}");
    }
}
