//! Hypodifferential descent with Armijo steps.
//!
//! Each iteration projects the origin onto the hypodifferential at `x_n`,
//! giving `(a_n, v_n)`, and moves to `x_n - alpha_n v_n` where `alpha_n` is
//! the largest `gamma^k` with sufficient decrease.

use serde::{Deserialize, Serialize};

use crate::convex::ConvexFn;
use crate::error::{check_dim, Error, Result};
use crate::minnorm::{self, min_norm_point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MhdConfig {
    pub sigma: f64,
    pub gamma: f64,
    /// Stop once `|(a_n, v_n)|` falls to this value.
    pub stop_tol: f64,
    pub max_iter: usize,
    pub armijo_max_k: u32,
}

impl Default for MhdConfig {
    fn default() -> Self {
        Self { sigma: 0.1, gamma: 0.5, stop_tol: 1e-8, max_iter: 10_000, armijo_max_k: 60 }
    }
}

impl MhdConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.sigma) || !open_unit(self.gamma) {
            return Err(Error::InvalidParameter("sigma and gamma must lie in (0, 1)".into()));
        }
        if !(self.stop_tol > 0.0) {
            return Err(Error::InvalidParameter("stop_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MhdRecord {
    pub n: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub a: f64,
    pub v: Vec<f64>,
    pub norm: f64,
    /// Accepted step; absent on the final, stationary record.
    pub alpha: Option<f64>,
    pub k: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MhdStatus {
    Stationary,
    IterLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MhdTrace {
    pub records: Vec<MhdRecord>,
    pub status: MhdStatus,
}

impl MhdTrace {
    pub fn final_point(&self) -> &[f64] {
        &self.records.last().expect("trace has at least one record").x
    }

    pub fn final_value(&self) -> f64 {
        self.records.last().expect("trace has at least one record").f
    }

    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.records.iter().filter(|r| r.alpha.is_some()).count()
    }

    /// CSV with columns `n,f,norm,alpha,k` followed by `x1..xd`.
    pub fn to_csv(&self) -> Result<String> {
        let d = self.records.first().map_or(0, |r| r.x.len());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = ["n", "f", "norm", "alpha", "k"].iter().map(|s| s.to_string()).collect();
        header.extend((1..=d).map(|i| format!("x{i}")));
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        w.write_record(&header).map_err(io)?;
        for r in &self.records {
            let mut row = vec![
                r.n.to_string(),
                format!("{:?}", r.f),
                format!("{:?}", r.norm),
                r.alpha.map_or(String::new(), |a| format!("{a:?}")),
                r.k.map_or(String::new(), |k| k.to_string()),
            ];
            row.extend(r.x.iter().map(|x| format!("{x:?}")));
            w.write_record(&row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Largest `gamma^k` with `f(x - gamma^k v) - f(x) <= -gamma^k sigma norm2`.
pub fn armijo_step(f: &ConvexFn, x: &[f64], v: &[f64], norm2: f64, cfg: &MhdConfig) -> Result<(f64, u32)> {
    check_dim(f.dim(), x.len())?;
    check_dim(x.len(), v.len())?;
    if !(norm2 > 0.0) {
        return Err(Error::InvalidParameter("norm2 must be positive".into()));
    }
    let fx = f.eval(x);
    let mut alpha = 1.0;
    let mut trial = vec![0.0; x.len()];
    for k in 0..=cfg.armijo_max_k {
        for (t, (xi, vi)) in trial.iter_mut().zip(x.iter().zip(v)) {
            *t = xi - alpha * vi;
        }
        if f.eval(&trial) - fx <= -alpha * cfg.sigma * norm2 {
            return Ok((alpha, k));
        }
        alpha *= cfg.gamma;
    }
    Err(Error::ArmijoFailure { max_k: cfg.armijo_max_k })
}

pub fn mhd_run(f: &ConvexFn, x0: &[f64], cfg: &MhdConfig) -> Result<MhdTrace> {
    cfg.validate()?;
    check_dim(f.dim(), x0.len())?;
    if x0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut x = x0.to_vec();
    let mut records = Vec::new();
    for n in 0.. {
        let fx = f.eval(&x);
        let p = min_norm_point(&f.hypodiff(&x)?, minnorm::TIGHT_TOL)?.point;
        let norm2 = p.norm_sq();
        let mut record = MhdRecord {
            n,
            x: x.clone(),
            f: fx,
            a: p.a,
            v: p.v.clone(),
            norm: norm2.sqrt(),
            alpha: None,
            k: None,
        };
        if record.norm <= cfg.stop_tol {
            records.push(record);
            return Ok(MhdTrace { records, status: MhdStatus::Stationary });
        }
        if n >= cfg.max_iter {
            records.push(record);
            return Ok(MhdTrace { records, status: MhdStatus::IterLimit });
        }
        let (alpha, k) = armijo_step(f, &x, &p.v, norm2, cfg)?;
        record.alpha = Some(alpha);
        record.k = Some(k);
        records.push(record);
        for (xi, vi) in x.iter_mut().zip(&p.v) {
            *xi -= alpha * vi;
        }
    }
    unreachable!()
}
