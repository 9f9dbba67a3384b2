//! Shared fixtures and naive reference implementations for integration tests.
//!
//! The oracles below are written for clarity: full matrices, explicit inverses
//! and textbook formulas, with no state shared with the library's recursions.

#![allow(dead_code)]

use std::path::Path;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use condcorr::linalg::RowMatrix;
use condcorr::simulation::business_days;
use condcorr::volatility::{DegarchPanel, ScaleSource};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// iid normals mixed through a random loading so the columns correlate.
pub fn random_panel(rng: &mut ChaCha20Rng, t: usize, n: usize) -> RowMatrix {
    let load: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.8..0.8)).collect();
    let mut m = RowMatrix::zeros(t, n);
    for s in 0..t {
        let common: f64 = rng.sample(StandardNormal);
        for i in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            m.set(s, i, load[i] * common + (1.0 - load[i] * load[i]).sqrt() * z);
        }
    }
    m
}

/// Random positive-definite correlation matrix, row-major.
pub fn random_corr(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    let w = DMatrix::from_fn(n, n + 2, |_, _| rng.sample::<f64, _>(StandardNormal));
    let s = &w * w.transpose() + DMatrix::identity(n, n) * 0.5;
    let d: Vec<f64> = (0..n).map(|i| s[(i, i)].sqrt()).collect();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = if i == j { 1.0 } else { s[(i, j)] / (d[i] * d[j]) };
        }
    }
    out
}

pub fn dates(t: usize) -> Vec<NaiveDate> {
    business_days(NaiveDate::from_ymd_opt(2015, 1, 5).unwrap(), t)
}

pub fn degarch_panel(m: RowMatrix) -> DegarchPanel {
    let n = m.cols();
    DegarchPanel {
        dates: dates(m.rows()),
        names: (0..n).map(|i| format!("s{i}")).collect(),
        matrix: m,
        scale: vec![ScaleSource::Unconditional; n],
    }
}

fn to_dmatrix(v: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, v)
}

/// Correlation matrices R_1..R_T of the gated cDCC recursion
///
/// Q_t = (1−a−b) R̄ + a A_t ⊙ (Q̃_{t−1} ε_{t−1} ε_{t−1}' Q̃_{t−1}) + b Q_{t−1},
/// A_t = exp(φ (R_{t−1} − 1)), Q_1 = R̄. `phi = None` is plain cDCC.
pub fn naive_filter(eps: &RowMatrix, a: f64, b: f64, phi: Option<f64>, r_bar: &[f64]) -> Vec<DMatrix<f64>> {
    let n = eps.cols();
    let rb = to_dmatrix(r_bar, n);
    let corr_of = |q: &DMatrix<f64>| {
        let d = DMatrix::from_diagonal(&q.diagonal().map(|v| 1.0 / v.sqrt()));
        &d * q * &d
    };
    let mut q = rb.clone();
    let mut out = vec![corr_of(&q)];
    for t in 1..eps.rows() {
        let prev_r = out[t - 1].clone();
        let q_tilde = DMatrix::from_diagonal(&q.diagonal().map(f64::sqrt));
        let e = DVector::from_row_slice(eps.row(t - 1));
        let x = &q_tilde * e;
        let mut shock = &x * x.transpose();
        if let Some(phi) = phi {
            let gate = prev_r.map(|r| (phi * (r - 1.0)).exp());
            shock = shock.component_mul(&gate);
        }
        q = &rb * (1.0 - a - b) + shock * a + &q * b;
        out.push(corr_of(&q));
    }
    out
}

/// Gaussian log-likelihood with an explicit inverse and determinant.
pub fn naive_loglik(eps: &RowMatrix, rs: &[DMatrix<f64>]) -> f64 {
    let n = eps.cols() as f64;
    rs.iter()
        .enumerate()
        .map(|(t, r)| {
            let e = DVector::from_row_slice(eps.row(t));
            let inv = r.clone().try_inverse().expect("invertible");
            let quad = (e.transpose() * inv * &e)[(0, 0)];
            -0.5 * (n * (2.0 * std::f64::consts::PI).ln() + r.determinant().ln() + quad)
        })
        .sum()
}

/// h_t = ω + α y²_{t−1} + β h_{t−1}, h_1 = h0.
pub fn naive_garch(y: &[f64], omega: f64, alpha: f64, beta: f64, h0: f64) -> Vec<f64> {
    let mut h = vec![h0];
    for t in 1..y.len() {
        h.push(omega + alpha * y[t - 1].powi(2) + beta * h[t - 1]);
    }
    h
}

fn var(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
}

/// Window correlation through the polarization identity
/// ρ = (Var x + Var y − Var(x − y)) / (2 sd x sd y).
pub fn naive_rolling(x: &[f64], y: &[f64], w: usize) -> Vec<f64> {
    (w - 1..x.len())
        .map(|end| {
            let xs = &x[end + 1 - w..=end];
            let ys = &y[end + 1 - w..=end];
            let diff: Vec<f64> = xs.iter().zip(ys).map(|(a, b)| a - b).collect();
            (var(xs) + var(ys) - var(&diff)) / (2.0 * (var(xs) * var(ys)).sqrt())
        })
        .collect()
}

/// Writes `date,value` CSVs for a simulated bundle and returns the config text.
pub fn write_bundle(dir: &Path, t: usize, seed: u64) -> String {
    use condcorr::correlation::DccParams;
    use condcorr::simulation::{panel_to_series, simulate_corr_panel, SimSpec};
    use condcorr::volatility::GarchParams;

    let names: Vec<String> = ["polls", "ads", "inflation", "tpu", "vix"].map(String::from).to_vec();
    let g = GarchParams::new(0.05, 0.12, 0.83).unwrap();
    let spec = SimSpec::dcc(DccParams::new(0.05, 0.85).unwrap(), SimSpec::equicorrelation(5, 0.3), 5, t, seed)
        .with_garch_layers(vec![None, Some(g), Some(g), None, Some(g)]);
    let sim = simulate_corr_panel(&spec).unwrap();
    let integrated = [true, false, true, false, true];
    let series = panel_to_series(&sim.data, &names, &integrated, NaiveDate::from_ymd_opt(2020, 3, 2).unwrap()).unwrap();
    std::fs::create_dir_all(dir.join("data")).unwrap();
    let mut cfg = format!("seed = {seed}\noutput_dir = \"results\"\n");
    for s in &series {
        s.write_csv(dir.join("data").join(format!("{}.csv", s.name)), "value").unwrap();
        cfg.push_str(&format!(
            "\n[[series]]\nname = \"{0}\"\npath = \"data/{0}.csv\"\nvalue_column = \"value\"\n",
            s.name
        ));
    }
    std::fs::write(dir.join("run.toml"), &cfg).unwrap();
    cfg
}

/// Largest |R_t[i][i] − 1| and smallest eigenvalue over a stack of matrices.
pub fn path_health(p: &condcorr::correlation::CorrelationPath) -> (f64, f64) {
    let n = p.n;
    let mut diag: f64 = 0.0;
    let mut eig = f64::INFINITY;
    for t in 0..p.len() {
        let r = p.r(t);
        for i in 0..n {
            diag = diag.max((r[i * n + i] - 1.0).abs());
        }
        eig = eig.min(condcorr::linalg::min_eigenvalue(r, n));
    }
    (diag, eig)
}
