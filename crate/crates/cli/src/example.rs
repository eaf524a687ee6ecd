//! End-to-end replay of the two-basin example from `(2, 2)`.

use std::cmp::Ordering;

use codiff::mgcd::{check_global_opt, default_tol, hyper_grad, mgcd_run, project_piece, MgcdConfig, RunStatus};
use codiff::pa::{expr_to_dc, global_codiff, two_basin_example};
use codiff::AugVector;

const HYPO: [[f64; 3]; 16] = [
    [0., 3., 0.],
    [-4., 1., 0.],
    [0., 2., 1.],
    [-4., 2., -1.],
    [0., -1., 0.],
    [-4., -3., 0.],
    [0., -2., 1.],
    [-4., -2., -1.],
    [0., 1., 1.],
    [-4., -1., 1.],
    [0., 0., 2.],
    [-4., 0., 0.],
    [0., 1., -1.],
    [-4., -1., -1.],
    [0., 0., 0.],
    [-4., 0., -2.],
];

const HYPER: [[f64; 3]; 8] = [
    [1., 2., 0.],
    [1., -2., 0.],
    [1., 0., 1.],
    [1., 0., -1.],
    [0., -1., 0.],
    [4., 1., 0.],
    [0., 0., -1.],
    [4., 0., 1.],
];

pub struct Check {
    pub ok: bool,
    pub line: String,
}

fn lex(p: &AugVector, q: &AugVector) -> Ordering {
    p.a.total_cmp(&q.a).then_with(|| {
        p.v.iter().zip(&q.v).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
    })
}

fn same_set(got: &[AugVector], want: &[[f64; 3]]) -> bool {
    let mut got = got.to_vec();
    let mut want: Vec<AugVector> = want.iter().map(|r| AugVector::new(r[0], r[1..].to_vec())).collect();
    got.sort_by(lex);
    want.sort_by(lex);
    got == want
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{:.4}", if x.abs() < 5e-5 { 0.0 } else { *x })).collect();
    format!("({})", parts.join(", "))
}

pub fn run() -> Result<Vec<Check>, codiff::Error> {
    let f = expr_to_dc(&two_basin_example())?;
    let x0 = [2.0, 2.0];
    let mut out = Vec::new();
    let mut check = |ok: bool, line: String| out.push(Check { ok, line });

    let gc = global_codiff(&f, &x0)?;
    check(same_set(gc.hypo.vertices(), &HYPO), format!("hypodifferential at x0 has {} vertices", gc.hypo.len()));
    check(same_set(gc.hyper.vertices(), &HYPER), format!("hyperdifferential at x0 has {} vertices", gc.hyper.len()));

    let z1 = hyper_grad(&f, &x0, 0)?;
    check(z1 == AugVector::new(1.0, vec![2.0, 0.0]), format!("z1(x0) = ({}, {}, {})", z1.a, z1.v[0], z1.v[1]));

    let p = project_piece(&f, &x0, 0)?;
    let want = [-1.0 / 9.0, 2.0 / 9.0, 2.0 / 9.0];
    let got = [p.a, p.v[0], p.v[1]];
    check(
        got.iter().zip(&want).all(|(g, w)| (g - w).abs() <= 1e-9),
        format!("(a1, v1)(x0) = ({:.4}, {:.4}, {:.4})", got[0], got[1], got[2]),
    );

    let run = mgcd_run(&f, &x0, &MgcdConfig::default())?;
    let x1 = run.records.get(1).map(|r| r.x.clone()).unwrap_or_default();
    check(
        run.iterations() == 1 && x1.len() == 2 && x1.iter().all(|x| x.abs() <= 1e-12),
        format!("x1 = {} after {} step(s)", fmt_vec(&x1), run.iterations()),
    );
    check(matches!(run.status, RunStatus::GlobalMin { .. }), format!("status {}", run.status.name()));

    let tol = default_tol(0.0);
    let at_x1 = check_global_opt(&f, &[0.0, 0.0], tol)?;
    check(at_x1.is_global, format!("certificate at (0, 0): min a_j = {:.4}", at_x1.a[at_x1.worst()]));
    let at_x0 = check_global_opt(&f, &x0, tol)?;
    check(!at_x0.is_global, format!("certificate at x0 rejects: min a_j = {:.4}", at_x0.a[at_x0.worst()]));
    Ok(out)
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        let checks = super::run().unwrap();
        assert_eq!(checks.len(), 8);
        assert!(checks.iter().all(|c| c.ok), "{:?}", checks.iter().map(|c| &c.line).collect::<Vec<_>>());
    }
}
