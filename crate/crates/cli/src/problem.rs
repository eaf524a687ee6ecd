use std::path::{Path, PathBuf};

use clap::Args;
use codiff::generate::GenSpec;
use codiff::pa::{expr_to_dc, two_basin_example};
use codiff::{DcForm, PaExpr};

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// JSON file holding a DC form (`{"d", "plus", "minus"}`) or an expression tree
    #[arg(long, value_name = "FILE")]
    pub problem: Option<PathBuf>,

    /// Random bounded-below instance with `l` plus and `s` minus pieces in R^d
    #[arg(long, value_name = "D,L,S,SEED", value_parser = parse_gen)]
    pub generate: Option<GenSpec>,

    /// The two-basin example `min{max|x_i|, 1 + max{2|x1 - 2|, |x2 - 2|}}`
    #[arg(long)]
    pub example: bool,
}

#[derive(Debug, Args)]
pub struct SourceOptions {
    #[command(flatten)]
    pub source: Source,

    /// Magnitude of generated coefficients
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,

    /// Starting point; defaults to the generator's point, (2, 2) for the example, else the origin
    #[arg(long, value_name = "X1,X2,..", value_parser = parse_point, allow_hyphen_values = true)]
    pub x0: Option<Point>,
}

/// Comma-separated coordinates, kept in a newtype so clap reads it as one value.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

pub struct Problem {
    pub f: DcForm,
    pub x0: Vec<f64>,
    pub label: String,
}

pub fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}")))
        .collect()
}

pub fn parse_point(s: &str) -> Result<Point, String> {
    parse_vector(s).map(Point)
}

pub fn parse_gen(s: &str) -> Result<GenSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [d, l, s_, seed] = parts.as_slice() else {
        return Err(format!("expected D,L,S,SEED, got {s:?}"));
    };
    let int = |t: &str| t.parse::<usize>().map_err(|e| format!("bad integer {t:?}: {e}"));
    let seed = seed.parse::<u64>().map_err(|e| format!("bad seed {seed:?}: {e}"))?;
    Ok(GenSpec::new(seed, int(d)?, int(l)?, int(s_)?))
}

/// Reads a DC form, or compiles an expression tree when the JSON has no `plus` field.
pub fn read_problem(path: &Path) -> Result<DcForm, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if value.get("plus").is_some() {
        serde_json::from_value(value).map_err(|e| format!("{}: {e}", path.display()))
    } else {
        let expr: PaExpr = serde_json::from_value(value).map_err(|e| format!("{}: {e}", path.display()))?;
        expr_to_dc(&expr).map_err(|e| format!("{}: {e}", path.display()))
    }
}

impl SourceOptions {
    pub fn load(&self) -> Result<Problem, String> {
        let (f, default_x0, label) = if let Some(path) = &self.source.problem {
            let f = read_problem(path)?;
            let x0 = vec![0.0; f.dim()];
            (f, x0, path.display().to_string())
        } else if let Some(spec) = &self.source.generate {
            let spec = GenSpec { scale: self.scale, ..spec.clone() };
            let f = spec.generate().map_err(|e| e.to_string())?;
            let label = format!("generated d={} l={} s={} seed={}", spec.d, spec.l, spec.s, spec.seed);
            (f, spec.start(), label)
        } else {
            let f = expr_to_dc(&two_basin_example()).map_err(|e| e.to_string())?;
            (f, vec![2.0, 2.0], "example".to_string())
        };
        let x0 = self.x0.clone().map_or(default_x0, |p| p.0);
        if x0.len() != f.dim() {
            return Err(format!("starting point has {} coordinates, problem has {}", x0.len(), f.dim()));
        }
        Ok(Problem { f, x0, label })
    }
}
