use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::special::student_t_sf;
use super::StatsError;

/// Alternative hypothesis for a t-test, stated for sample `a` relative to `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    OneGreater,
    OneLess,
    Two,
}

impl Tail {
    pub fn as_str(self) -> &'static str {
        match self {
            Tail::OneGreater => "one_greater",
            Tail::OneLess => "one_less",
            Tail::Two => "two",
        }
    }
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tail {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "one_greater" => Ok(Tail::OneGreater),
            "one_less" => Ok(Tail::OneLess),
            "two" => Ok(Tail::Two),
            other => Err(format!("unknown tail `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_stat: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub dof: f64,
    pub p_value: f64,
    pub tail: Tail,
    pub mean_a: f64,
    pub mean_b: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Welch's unequal-variance t-test of `a` against `b`.
pub fn welch_t(a: &[f64], b: &[f64], tail: Tail) -> Result<TTestResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::InsufficientSample(a.len(), b.len()));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    if va == 0.0 && vb == 0.0 {
        return Err(StatsError::ZeroVarianceBoth);
    }
    let sa = va / a.len() as f64;
    let sb = vb / b.len() as f64;
    let se2 = sa + sb;
    let t = (ma - mb) / se2.sqrt();
    let dof = se2 * se2 / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    let greater = student_t_sf(t, dof);
    let p = match tail {
        Tail::OneGreater => greater,
        Tail::OneLess => student_t_sf(-t, dof),
        Tail::Two => (2.0 * greater.min(1.0 - greater)).min(1.0),
    };
    Ok(TTestResult {
        t_stat: t,
        dof,
        p_value: p,
        tail,
        mean_a: ma,
        mean_b: mb,
    })
}

/// Compares the videos assigned to `category` against every other video.
/// Videos without an assignment count toward the rest group.
pub fn category_vs_rest<C: Ord + PartialEq>(
    values: &BTreeMap<String, f64>,
    assignment: &BTreeMap<String, C>,
    category: &C,
    tail: Tail,
) -> Result<TTestResult, StatsError> {
    let (mut inside, mut rest) = (Vec::new(), Vec::new());
    for (video, &v) in values {
        if assignment.get(video) == Some(category) {
            inside.push(v);
        } else {
            rest.push(v);
        }
    }
    welch_t(&inside, &rest, tail)
}
