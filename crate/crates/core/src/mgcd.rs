//! Global and classical codifferential descent for piecewise-affine functions.
//!
//! For each minus piece `j` the vector
//! `z_j(x) = (b_j - fbar(x) + <w_j, x>, w_j)` shifts the hypodifferential, and
//! `(a_j(x), v_j(x))` is the min-norm point of `hypo(x) + z_j(x)`. The point
//! `x` is a global minimiser of a bounded-below function exactly when every
//! `a_j(x) >= 0`.
//!
//! [`mgcd_run`] steps to `x + v_j / a_j` for the best active `j` and drops
//! pieces once `a_j >= 0`; dropped pieces stay dropped. [`mcd_run`] searches
//! exactly along every `-v_j` instead.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::minnorm::{self, min_norm_point, AugVector};
use crate::pa::{global_codiff, translate, DcForm, GlobalCodiff};

/// Tolerance used when the caller does not provide one:
/// `1e-9 * max(1, |f(x0)|)`.
pub fn default_tol(f0: f64) -> f64 {
    1e-9 * f0.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub j: usize,
    pub a: f64,
    pub v: Vec<f64>,
}

impl Projection {
    pub fn norm(&self) -> f64 {
        (self.a * self.a + crate::dot(&self.v, &self.v)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub point: Vec<f64>,
    /// `a_j(point)` for every minus piece.
    pub a: Vec<f64>,
    pub tol: f64,
    pub is_global: bool,
}

impl Certificate {
    /// Index with the most negative `a_j`.
    pub fn worst(&self) -> usize {
        let mut best = 0;
        for (j, a) in self.a.iter().enumerate() {
            if *a < self.a[best] {
                best = j;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum RunStatus {
    GlobalMin { certificate: Certificate },
    UnboundedBelow { ray: Vec<f64> },
    /// No candidate direction decreases `f` (classical descent only).
    Stationary,
    IterLimit,
}

impl RunStatus {
    pub fn name(&self) -> &'static str {
        match self {
            RunStatus::GlobalMin { .. } => "GlobalMin",
            RunStatus::UnboundedBelow { .. } => "UnboundedBelow",
            RunStatus::Stationary => "Stationary",
            RunStatus::IterLimit => "IterLimit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub n: usize,
    pub x: Vec<f64>,
    pub f: f64,
    /// Projections of the pieces examined at this iterate.
    pub projections: Vec<Projection>,
    /// Pieces dropped from the active set at this iterate.
    pub discarded: Vec<usize>,
    /// Piece that produced the step.
    pub chosen: Option<usize>,
    /// Step length along `-v_chosen`.
    pub alpha: Option<f64>,
    /// `min f(x + v_j / a_j)` over examined pieces with `a_j < -tol`.
    pub trial_value: Option<f64>,
    /// `f(x_{n+1}) <= f(x_n) - (|a| + |v|^2 / |a|) + tol` for the chosen piece.
    pub descent_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscardEvent {
    pub iteration: usize,
    pub j: usize,
}

/// A dropped piece whose re-projection became clearly negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscardViolation {
    pub iteration: usize,
    pub j: usize,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalRun {
    pub method: String,
    pub tol: f64,
    pub records: Vec<IterationRecord>,
    pub discards: Vec<DiscardEvent>,
    pub violations: Vec<DiscardViolation>,
    pub status: RunStatus,
}

impl GlobalRun {
    pub fn final_point(&self) -> &[f64] {
        &self.records.last().expect("run has at least one record").x
    }

    pub fn final_value(&self) -> f64 {
        self.records.last().expect("run has at least one record").f
    }

    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.records.iter().filter(|r| r.chosen.is_some()).count()
    }

    /// One row per iterate: `n,f,chosen,alpha,trial_value,descent_ok,discarded,x1..xd`.
    /// Empty cells mark absent values and `discarded` joins indices with `;`.
    pub fn to_csv(&self) -> Result<String> {
        let d = self.records.first().map_or(0, |r| r.x.len());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = ["n", "f", "chosen", "alpha", "trial_value", "descent_ok", "discarded"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend((1..=d).map(|i| format!("x{i}")));
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        w.write_record(&header).map_err(io)?;
        fn opt<T: std::fmt::Debug>(v: Option<T>) -> String {
            v.map_or(String::new(), |v| format!("{v:?}"))
        }
        for r in &self.records {
            let mut row = vec![
                r.n.to_string(),
                format!("{:?}", r.f),
                opt(r.chosen),
                opt(r.alpha),
                opt(r.trial_value),
                opt(r.descent_ok),
                r.discarded.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
            ];
            row.extend(r.x.iter().map(|x| format!("{x:?}")));
            w.write_record(&row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MgcdConfig {
    /// `None` selects [`default_tol`] at the starting point.
    pub tol: Option<f64>,
    pub max_iter: usize,
    /// Re-project every dropped piece at every later iterate.
    pub verify_discards: bool,
}

impl Default for MgcdConfig {
    fn default() -> Self {
        Self { tol: None, max_iter: 1000, verify_discards: cfg!(test) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McdConfig {
    /// Only pieces with `z_j` first coordinate at most `mu` are examined.
    pub mu: f64,
    pub tol: Option<f64>,
    pub max_iter: usize,
}

impl Default for McdConfig {
    fn default() -> Self {
        Self { mu: f64::INFINITY, tol: None, max_iter: 1000 }
    }
}

fn check_index(f: &DcForm, j: usize) -> Result<()> {
    if j < f.minus().len() {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index: j, len: f.minus().len() })
    }
}

/// `z_j(x) = (b_j - fbar(x) + <w_j, x>, w_j)`.
pub fn hyper_grad(f: &DcForm, x: &[f64], j: usize) -> Result<AugVector> {
    check_dim(f.dim(), x.len())?;
    check_index(f, j)?;
    let w = &f.minus()[j];
    Ok(AugVector::new(w.affine_at(x) - f.min_part(x), w.v.clone()))
}

fn project_gc(gc: &GlobalCodiff, j: usize) -> Result<Projection> {
    let z = &gc.hyper.vertices()[j];
    let p = min_norm_point(&gc.hypo.translated(z), minnorm::TIGHT_TOL)?.point;
    Ok(Projection { j, a: p.a, v: p.v })
}

/// Min-norm point of `hypo(x) + z_j(x)`.
pub fn project_piece(f: &DcForm, x: &[f64], j: usize) -> Result<Projection> {
    check_index(f, j)?;
    project_gc(&global_codiff(f, x)?, j)
}

fn certificate_from(gc: &GlobalCodiff, tol: f64) -> Result<Certificate> {
    let a = (0..gc.hyper.len()).map(|j| project_gc(gc, j).map(|p| p.a)).collect::<Result<Vec<_>>>()?;
    let is_global = a.iter().all(|a| *a >= -tol);
    Ok(Certificate { point: gc.at.clone(), a, tol, is_global })
}

/// Global optimality test: `x` minimises a bounded-below `f` iff all
/// `a_j(x) >= 0`.
pub fn check_global_opt(f: &DcForm, x: &[f64], tol: f64) -> Result<Certificate> {
    certificate_from(&global_codiff(f, x)?, tol)
}

/// `0 in hypo(x) + z_j(x)` for every `j` whose `z_j` first coordinate is at
/// most `tol`.
pub fn check_inf_stationary(f: &DcForm, x: &[f64], tol: f64) -> Result<bool> {
    let gc = global_codiff(f, x)?;
    for (j, z) in gc.hyper.vertices().iter().enumerate() {
        if z.a <= tol && project_gc(&gc, j)?.norm() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum LineSearch {
    Minimum { alpha: f64, value: f64 },
    UnboundedBelow,
}

/// Breakpoints in `(0, inf)` of the upper envelope `max_k (c_k + s_k t)`.
fn upper_envelope_breaks(lines: &[(f64, f64)]) -> Vec<f64> {
    let mut cur = 0;
    for (k, &(c, s)) in lines.iter().enumerate() {
        let (cc, cs) = lines[cur];
        if c > cc || (c == cc && s > cs) {
            cur = k;
        }
    }
    let mut t = 0.0;
    let mut breaks = Vec::new();
    loop {
        let (cc, cs) = lines[cur];
        let mut next: Option<(f64, usize)> = None;
        for (k, &(c, s)) in lines.iter().enumerate() {
            if s > cs {
                let cross = ((cc - c) / (s - cs)).max(t);
                let better = match next {
                    None => true,
                    Some((nt, nk)) => cross < nt || (cross == nt && s > lines[nk].1),
                };
                if better {
                    next = Some((cross, k));
                }
            }
        }
        match next {
            Some((nt, nk)) => {
                if nt > t {
                    breaks.push(nt);
                }
                t = nt;
                cur = nk;
            }
            None => return breaks,
        }
    }
}

/// Exact minimisation of `alpha -> f(x - alpha dir)` over `alpha >= 0`.
///
/// The restriction is `max_i (A_i + B_i alpha) + min_j (C_j + D_j alpha)`; its
/// minimum is attained at `0` or at a breakpoint of one of the two envelopes
/// unless the slope at infinity is negative.
pub fn line_search_pa(f: &DcForm, x: &[f64], dir: &[f64]) -> Result<LineSearch> {
    check_dim(f.dim(), x.len())?;
    check_dim(f.dim(), dir.len())?;
    if dir.iter().all(|d| *d == 0.0) {
        return Err(Error::InvalidParameter("search direction must be nonzero".into()));
    }
    let restrict = |pieces: &[AugVector], sign: f64| -> Vec<(f64, f64)> {
        pieces.iter().map(|q| (sign * q.affine_at(x), -sign * crate::dot(&q.v, dir))).collect()
    };
    let upper = restrict(f.plus(), 1.0);
    // min_j (C_j + D_j t) = -max_j (-C_j - D_j t)
    let lower = restrict(f.minus(), -1.0);

    let max_slope = upper.iter().map(|l| l.1).fold(f64::NEG_INFINITY, f64::max);
    let min_slope = -lower.iter().map(|l| l.1).fold(f64::NEG_INFINITY, f64::max);
    let scale = 1.0 + upper.iter().chain(&lower).map(|l| l.1.abs()).fold(0.0, f64::max);
    if max_slope + min_slope < -1e-12 * scale {
        return Ok(LineSearch::UnboundedBelow);
    }

    let mut candidates = vec![0.0];
    candidates.extend(upper_envelope_breaks(&upper));
    candidates.extend(upper_envelope_breaks(&lower));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut point = vec![0.0; x.len()];
    let mut best = (0.0, f64::INFINITY);
    for alpha in candidates {
        for (p, (xi, di)) in point.iter_mut().zip(x.iter().zip(dir)) {
            *p = xi - alpha * di;
        }
        let value = f.value(&point);
        if value < best.1 {
            best = (alpha, value);
        }
    }
    Ok(LineSearch::Minimum { alpha: best.0, value: best.1 })
}

fn resolve_tol(tol: Option<f64>, f0: f64) -> Result<f64> {
    let tol = tol.unwrap_or_else(|| default_tol(f0));
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidParameter("tol must be positive and finite".into()));
    }
    Ok(tol)
}

fn start(f: &DcForm, x0: &[f64]) -> Result<f64> {
    check_dim(f.dim(), x0.len())?;
    if x0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(f.value(x0))
}

/// A projection with `a_j ~ 0` and `v_j` clearly nonzero signals that `f`
/// decreases without bound along `-v_j`; confirmed by exact line search.
fn confirmed_ray(f: &DcForm, x: &[f64], p: &Projection, tol: f64) -> Result<Option<Vec<f64>>> {
    let vnorm = crate::norm(&p.v);
    if p.a.abs() > tol || vnorm <= tol.sqrt() {
        return Ok(None);
    }
    match line_search_pa(f, x, &p.v)? {
        LineSearch::UnboundedBelow => Ok(Some(p.v.iter().map(|v| -v / vnorm).collect())),
        LineSearch::Minimum { .. } => Ok(None),
    }
}

fn step_to(x: &[f64], p: &Projection) -> Vec<f64> {
    x.iter().zip(&p.v).map(|(xi, vi)| xi + vi / p.a).collect()
}

/// Method of global codifferential descent.
pub fn mgcd_run(f: &DcForm, x0: &[f64], cfg: &MgcdConfig) -> Result<GlobalRun> {
    let f0 = start(f, x0)?;
    let tol = resolve_tol(cfg.tol, f0)?;
    let mut active: Vec<usize> = (0..f.minus().len()).collect();
    let mut dropped: Vec<usize> = Vec::new();
    let mut gc = global_codiff(f, x0)?;
    let mut run = GlobalRun {
        method: "mgcd".into(),
        tol,
        records: Vec::new(),
        discards: Vec::new(),
        violations: Vec::new(),
        status: RunStatus::IterLimit,
    };

    for n in 0.. {
        let x = gc.at.clone();
        let fx = f.value(&x);
        let projections = active.iter().map(|&j| project_gc(&gc, j)).collect::<Result<Vec<_>>>()?;
        if cfg.verify_discards {
            for &j in &dropped {
                let a = project_gc(&gc, j)?.a;
                if a < -10.0 * tol {
                    run.violations.push(DiscardViolation { iteration: n, j, a });
                }
            }
        }
        let mut record = IterationRecord {
            n,
            x: x.clone(),
            f: fx,
            projections: projections.clone(),
            discarded: Vec::new(),
            chosen: None,
            alpha: None,
            trial_value: None,
            descent_ok: None,
        };

        for p in &projections {
            if let Some(ray) = confirmed_ray(f, &x, p, tol)? {
                run.records.push(record);
                run.status = RunStatus::UnboundedBelow { ray };
                return Ok(run);
            }
        }

        let mut remaining = Vec::new();
        for p in projections {
            if p.a >= -tol {
                record.discarded.push(p.j);
                run.discards.push(DiscardEvent { iteration: n, j: p.j });
                dropped.push(p.j);
            } else {
                remaining.push(p);
            }
        }
        active = remaining.iter().map(|p| p.j).collect();

        if remaining.is_empty() {
            run.records.push(record);
            run.status = RunStatus::GlobalMin { certificate: certificate_from(&gc, tol)? };
            return Ok(run);
        }
        if n >= cfg.max_iter {
            run.records.push(record);
            return Ok(run);
        }

        let mut best: Option<(f64, &Projection)> = None;
        for p in &remaining {
            let value = f.value(&step_to(&x, p));
            if best.is_none_or(|(b, _)| value < b) {
                best = Some((value, p));
            }
        }
        let (value, p) = best.expect("active set is nonempty");
        let y = step_to(&x, p);
        let decrease = p.a.abs() + crate::dot(&p.v, &p.v) / p.a.abs();
        record.chosen = Some(p.j);
        record.alpha = Some(1.0 / p.a.abs());
        record.trial_value = Some(value);
        record.descent_ok = Some(value <= fx - decrease + tol);
        run.records.push(record);
        gc = translate(f, &gc, &y)?;
    }
    unreachable!()
}

/// Classical codifferential descent with exact line search.
pub fn mcd_run(f: &DcForm, x0: &[f64], cfg: &McdConfig) -> Result<GlobalRun> {
    let f0 = start(f, x0)?;
    let tol = resolve_tol(cfg.tol, f0)?;
    if !(cfg.mu >= 0.0) {
        return Err(Error::InvalidParameter("mu must be nonnegative".into()));
    }
    let mut gc = global_codiff(f, x0)?;
    let mut run = GlobalRun {
        method: "mcd".into(),
        tol,
        records: Vec::new(),
        discards: Vec::new(),
        violations: Vec::new(),
        status: RunStatus::IterLimit,
    };

    for n in 0.. {
        let x = gc.at.clone();
        let fx = f.value(&x);
        let candidates: Vec<usize> =
            gc.hyper.vertices().iter().enumerate().filter(|(_, z)| z.a <= cfg.mu).map(|(j, _)| j).collect();
        let projections = candidates.iter().map(|&j| project_gc(&gc, j)).collect::<Result<Vec<_>>>()?;
        let mut record = IterationRecord {
            n,
            x: x.clone(),
            f: fx,
            projections: projections.clone(),
            discarded: Vec::new(),
            chosen: None,
            alpha: None,
            trial_value: None,
            descent_ok: None,
        };

        for p in &projections {
            if let Some(ray) = confirmed_ray(f, &x, p, tol)? {
                run.records.push(record);
                run.status = RunStatus::UnboundedBelow { ray };
                return Ok(run);
            }
        }
        if cfg.mu.is_infinite() && projections.iter().all(|p| p.a >= -tol) {
            run.records.push(record);
            run.status = RunStatus::GlobalMin { certificate: certificate_from(&gc, tol)? };
            return Ok(run);
        }

        record.trial_value = projections
            .iter()
            .filter(|p| p.a < -tol)
            .map(|p| f.value(&step_to(&x, p)))
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));

        let mut best: Option<(f64, f64, &Projection)> = None;
        for p in projections.iter().filter(|p| p.norm() > tol) {
            match line_search_pa(f, &x, &p.v)? {
                LineSearch::UnboundedBelow => {
                    let len = crate::norm(&p.v);
                    run.records.push(record);
                    run.status = RunStatus::UnboundedBelow { ray: p.v.iter().map(|v| -v / len).collect() };
                    return Ok(run);
                }
                LineSearch::Minimum { alpha, value } => {
                    if best.is_none_or(|(b, _, _)| value < b) {
                        best = Some((value, alpha, p));
                    }
                }
            }
        }

        let floor = 8.0 * f64::EPSILON * (1.0 + fx.abs());
        let Some((value, alpha, p)) = best.filter(|(value, _, _)| *value < fx - floor) else {
            let certificate = certificate_from(&gc, tol)?;
            run.records.push(record);
            run.status = if certificate.is_global { RunStatus::GlobalMin { certificate } } else { RunStatus::Stationary };
            return Ok(run);
        };
        if n >= cfg.max_iter {
            run.records.push(record);
            return Ok(run);
        }
        record.chosen = Some(p.j);
        record.alpha = Some(alpha);
        record.descent_ok = record.trial_value.map(|t| value <= t + tol);
        let y: Vec<f64> = x.iter().zip(&p.v).map(|(xi, vi)| xi - alpha * vi).collect();
        run.records.push(record);
        gc = translate(f, &gc, &y)?;
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pa::{expr_to_dc, two_basin_example};

    fn example() -> DcForm {
        expr_to_dc(&two_basin_example()).unwrap()
    }

    fn abs_1d() -> DcForm {
        DcForm::new(1, vec![AugVector::new(0.0, vec![1.0]), AugVector::new(0.0, vec![-1.0])], vec![AugVector::zeros(1)])
            .unwrap()
    }

    #[test]
    fn csv_has_one_row_per_iterate() {
        let run = mgcd_run(&example(), &[2.0, 2.0], &MgcdConfig::default()).unwrap();
        let text = run.to_csv().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,f,chosen,alpha,trial_value,descent_ok,discarded,x1,x2");
        assert_eq!(lines.len(), run.records.len() + 1);
        assert!(lines[1].starts_with("0,1.0,0,"), "{}", lines[1]);
        assert_eq!(run.status.name(), "GlobalMin");
    }

    fn line() -> DcForm {
        DcForm::new(1, vec![AugVector::new(0.0, vec![1.0])], vec![AugVector::zeros(1)]).unwrap()
    }

    #[test]
    fn hyper_grad_examples() {
        let f = example();
        assert_eq!(hyper_grad(&f, &[2.0, 2.0], 0).unwrap(), AugVector::new(1.0, vec![2.0, 0.0]));
        let g = abs_1d();
        assert_eq!(hyper_grad(&g, &[3.0], 0).unwrap(), AugVector::zeros(1));
        assert!(matches!(hyper_grad(&g, &[3.0], 1), Err(Error::IndexOutOfRange { .. })));
        for j in 0..f.minus().len() {
            assert!(hyper_grad(&f, &[0.3, -1.7], j).unwrap().a >= 0.0);
        }
    }

    #[test]
    fn example_projection() {
        let p = project_piece(&example(), &[2.0, 2.0], 0).unwrap();
        assert!((p.a + 1.0 / 9.0).abs() < 1e-9);
        assert!((p.v[0] - 2.0 / 9.0).abs() < 1e-9 && (p.v[1] - 2.0 / 9.0).abs() < 1e-9);
        let q = project_piece(&abs_1d(), &[0.0], 0).unwrap();
        assert!(q.norm() < 1e-12);
    }

    #[test]
    fn example_certificates() {
        let f = example();
        let tol = 1e-9;
        assert!(check_global_opt(&f, &[0.0, 0.0], tol).unwrap().is_global);
        let c = check_global_opt(&f, &[2.0, 2.0], tol).unwrap();
        assert!(!c.is_global);
        assert_eq!(c.worst(), 0);
        assert!(!check_global_opt(&abs_1d(), &[1.0], tol).unwrap().is_global);
        assert!(check_inf_stationary(&f, &[2.0, 2.0], tol).unwrap());
        assert!(check_inf_stationary(&f, &[0.0, 0.0], tol).unwrap());
        assert!(!check_inf_stationary(&abs_1d(), &[1.0], tol).unwrap());
    }

    #[test]
    fn line_search_examples() {
        let f = abs_1d();
        assert_eq!(line_search_pa(&f, &[5.0], &[1.0]).unwrap(), LineSearch::Minimum { alpha: 5.0, value: 0.0 });
        assert_eq!(line_search_pa(&f, &[5.0], &[-1.0]).unwrap(), LineSearch::Minimum { alpha: 0.0, value: 5.0 });
        assert_eq!(line_search_pa(&line(), &[0.0], &[1.0]).unwrap(), LineSearch::UnboundedBelow);
        match line_search_pa(&example(), &[2.0, 2.0], &[2.0 / 9.0, 2.0 / 9.0]).unwrap() {
            LineSearch::Minimum { alpha, value } => {
                assert!(value.abs() < 1e-12);
                assert!((alpha - 9.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn line_search_matches_dense_sampling() {
        let f = example();
        let x = [1.3, -0.4];
        let dir = [0.7, 0.2];
        let LineSearch::Minimum { value, .. } = line_search_pa(&f, &x, &dir).unwrap() else { panic!() };
        for k in 0..20_000 {
            let t = k as f64 * 1e-3;
            let y = [x[0] - t * dir[0], x[1] - t * dir[1]];
            assert!(f.value(&y) >= value - 1e-12);
        }
    }

    #[test]
    fn mgcd_example_one_step() {
        let run = mgcd_run(&example(), &[2.0, 2.0], &MgcdConfig::default()).unwrap();
        assert_eq!(run.iterations(), 1);
        assert!(run.final_point().iter().all(|x| x.abs() < 1e-12));
        assert!(matches!(run.status, RunStatus::GlobalMin { .. }));
        assert!(run.violations.is_empty());
        assert_eq!(run.records[0].descent_ok, Some(true));
    }

    #[test]
    fn mgcd_from_optimum_and_unbounded() {
        let run = mgcd_run(&example(), &[0.0, 0.0], &MgcdConfig::default()).unwrap();
        assert_eq!(run.iterations(), 0);
        assert_eq!(run.discards.len(), example().minus().len());
        let run = mgcd_run(&line(), &[0.0], &MgcdConfig::default()).unwrap();
        match run.status {
            RunStatus::UnboundedBelow { ray } => assert!(ray[0] < 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mcd_examples() {
        let f = example();
        let run = mcd_run(&f, &[2.0, 2.0], &McdConfig::default()).unwrap();
        assert!(matches!(run.status, RunStatus::GlobalMin { .. }));
        assert!(run.final_value().abs() < 1e-12);

        let run = mcd_run(&f, &[2.0, 2.0], &McdConfig { mu: 0.0, ..Default::default() }).unwrap();
        assert_eq!(run.status, RunStatus::Stationary);
        assert_eq!(run.final_point(), &[2.0, 2.0]);

        let run = mcd_run(&abs_1d(), &[4.0], &McdConfig::default()).unwrap();
        assert!(matches!(run.status, RunStatus::GlobalMin { .. }));
        assert!(run.final_value().abs() < 1e-12);

        let run = mcd_run(&line(), &[0.0], &McdConfig::default()).unwrap();
        assert!(matches!(run.status, RunStatus::UnboundedBelow { .. }));
    }
}
