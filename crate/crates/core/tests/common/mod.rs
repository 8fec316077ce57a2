//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::f64::consts::PI;

/// ln Γ(x) via upward recurrence and the Stirling series, independent of the
/// Lanczos form used by the library.
pub fn ln_gamma_stirling(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut shift = 0.0;
    let mut z = x;
    while z < 30.0 {
        shift += z.ln();
        z += 1.0;
    }
    let z2 = z * z;
    let series = 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z2 * z2 * z) - 1.0 / (1680.0 * z2 * z2 * z2 * z)
        + 1.0 / (1188.0 * z2 * z2 * z2 * z2 * z);
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - shift
}

/// Student-t density.
pub fn t_density(x: f64, dof: f64) -> f64 {
    let ln_norm = ln_gamma_stirling((dof + 1.0) / 2.0) - ln_gamma_stirling(dof / 2.0) - 0.5 * (dof * PI).ln();
    (ln_norm - (dof + 1.0) / 2.0 * (1.0 + x * x / dof).ln()).exp()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// P(T ≤ t) by direct integration of the density from 0 to |t|. Long
/// intervals are split into unit pieces to keep each quadrature well
/// conditioned.
pub fn t_cdf(t: f64, dof: f64) -> f64 {
    let f = |x: f64| t_density(x, dof);
    let a = t.abs();
    let mut half = 0.0;
    let mut lo = 0.0;
    while lo < a {
        let hi = (lo + 0.5).min(a);
        half += integrate(&f, lo, hi, 1e-15);
        lo = hi;
    }
    if t >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// Welch statistic and Welch–Satterthwaite degrees of freedom, two-pass.
pub fn welch(a: &[f64], b: &[f64]) -> (f64, f64) {
    let stats = |x: &[f64]| {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
        (n, m, v)
    };
    let (na, ma, va) = stats(a);
    let (nb, mb, vb) = stats(b);
    let (qa, qb) = (va / na, vb / nb);
    let t = (ma - mb) / (qa + qb).sqrt();
    let dof = (qa + qb).powi(2) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    (t, dof)
}

/// Brute-force majority vote: second `i` is positive when at least
/// `ceil(votes * k / window)` of the `k` seconds of its centred window that
/// fall inside the signal are positive.
pub fn vote_oracle(labels: &[bool], window: usize, votes: usize) -> Vec<(f64, f64)> {
    let n = labels.len() as i64;
    let half = (window / 2) as i64;
    let relabelled: Vec<bool> = (0..n)
        .map(|i| {
            let mut inside = 0usize;
            let mut positive = 0usize;
            for j in i - half..=i + half {
                if (0..n).contains(&j) {
                    inside += 1;
                    positive += usize::from(labels[j as usize]);
                }
            }
            let mut needed = 0;
            while needed * window < votes * inside {
                needed += 1;
            }
            positive >= needed
        })
        .collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < relabelled.len() {
        if relabelled[i] {
            let start = i;
            while i < relabelled.len() && relabelled[i] {
                i += 1;
            }
            spans.push((start as f64, i as f64));
        } else {
            i += 1;
        }
    }
    spans
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Exact rational number for hand-arithmetic oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio {
    pub num: i128,
    pub den: i128,
}

impl Ratio {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0);
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Self {
            num: s * num / g,
            den: s * den / g,
        }
    }
    pub fn add(self, o: Self) -> Self {
        Self::new(self.num * o.den + o.num * self.den, self.den * o.den)
    }
    pub fn sub(self, o: Self) -> Self {
        Self::new(self.num * o.den - o.num * self.den, self.den * o.den)
    }
    pub fn mul(self, o: Self) -> Self {
        Self::new(self.num * o.num, self.den * o.den)
    }
    pub fn div(self, o: Self) -> Self {
        Self::new(self.num * o.den, self.den * o.num)
    }
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Fleiss' kappa in exact rational arithmetic.
pub fn kappa_exact(ratings: &[Vec<u32>]) -> Ratio {
    let n_items = ratings.len() as i128;
    let raters: i128 = ratings[0].iter().map(|&c| c as i128).sum();
    let k = ratings[0].len();
    let mut p_bar = Ratio::new(0, 1);
    for row in ratings {
        let agree: i128 = row.iter().map(|&c| (c as i128) * (c as i128 - 1)).sum();
        p_bar = p_bar.add(Ratio::new(agree, raters * (raters - 1)));
    }
    p_bar = p_bar.div(Ratio::new(n_items, 1));
    let mut p_e = Ratio::new(0, 1);
    for j in 0..k {
        let col: i128 = ratings.iter().map(|r| r[j] as i128).sum();
        let pj = Ratio::new(col, n_items * raters);
        p_e = p_e.add(pj.mul(pj));
    }
    p_bar.sub(p_e).div(Ratio::new(1, 1).sub(p_e))
}

/// Modularity straight from the definition, over an undirected edge list
/// (each edge listed once; a self-loop of weight w counts 2w on the diagonal).
pub fn modularity_oracle(n: usize, edges: &[(usize, usize, f64)], community: &[usize]) -> f64 {
    let mut adj = vec![vec![0.0; n]; n];
    for &(u, v, w) in edges {
        if u == v {
            adj[u][u] += 2.0 * w;
        } else {
            adj[u][v] += w;
            adj[v][u] += w;
        }
    }
    let degree: Vec<f64> = adj.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = degree.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if community[i] == community[j] {
                q += adj[i][j] - degree[i] * degree[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Best modularity over every set partition of `n` nodes (restricted growth
/// strings). Feasible for `n` up to about 11.
pub fn best_partition(n: usize, edges: &[(usize, usize, f64)]) -> (f64, Vec<usize>) {
    let mut best = (f64::NEG_INFINITY, vec![0; n]);
    let mut labels = vec![0usize; n];
    fn rec(i: usize, max: usize, labels: &mut Vec<usize>, n: usize, edges: &[(usize, usize, f64)], best: &mut (f64, Vec<usize>)) {
        if i == n {
            let q = modularity_oracle(n, edges, labels);
            if q > best.0 + 1e-12 {
                *best = (q, labels.clone());
            }
            return;
        }
        for c in 0..=max + 1 {
            labels[i] = c;
            rec(i + 1, max.max(c), labels, n, edges, best);
        }
    }
    if n > 0 {
        labels[0] = 0;
        rec(1, 0, &mut labels, n, edges, &mut best);
    }
    best
}

/// True when two labelings describe the same partition.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

/// The published priority list, highest first.
pub const PUBLISHED_LADDER: [&str; 26] = [
    "Ram Mandir Babri Masjid",
    "Farmers Protest Issue",
    "Citizenship Amendment Act",
    "SSR Case",
    "Pulwama-Balakot",
    "Kashmir",
    "COVID/Lockdown",
    "Republic TRP Scam",
    "Scams",
    "Russia-Ukraine",
    "China",
    "Pakistan",
    "International Affairs",
    "Economy",
    "Supporting-BJP",
    "Anti-Opposition",
    "Anti-BJP",
    "State level politics",
    "Religion",
    "Defense & Terrorism",
    "Education",
    "Sports",
    "Bollywood",
    "Crime and Justice",
    "Politics",
    "Miscellaneous",
];

/// Six kept sentences, two naming both sides and one sentence per negation
/// term; every keyword appears in a kept sentence.
pub const KEPT: [(&str, &str, panelscope::bias::BiasLabel); 6] = [
    ("Narendra Modi and Amit Shah addressed the rally", "<PER> <PER> and <PER> <PER> addressed the rally", panelscope::bias::BiasLabel::Bjp),
    ("Yogi Adityanath's BJP released a manifesto", "<PER> <PER> <PARTY> released a manifesto", panelscope::bias::BiasLabel::Bjp),
    ("Rahul Gandhi and Sonia Gandhi visited Kerala", "<PER> <PER> and <PER> <PER> visited kerala", panelscope::bias::BiasLabel::Opposition),
    ("Priyanka and Robert Vadra answered questions", "<PER> and <PER> <PER> answered questions", panelscope::bias::BiasLabel::Opposition),
    ("Kejriwal met Congress leaders", "<PER> met <PARTY> leaders", panelscope::bias::BiasLabel::Opposition),
    ("Congress's rally drew crowds", "<PARTY> rally drew crowds", panelscope::bias::BiasLabel::Opposition),
];

pub const BOTH_SIDES: [&str; 2] = ["Modi criticised Rahul", "The BJP and Congress clashed again"];

pub const NEGATED: [&str; 22] = [
    "Modi did not respond",
    "Shah don't care",
    "Rahul can't win",
    "Kejriwal won't resign",
    "Congress shouldn't gloat",
    "Yogi mustn't delay",
    "Sonia should not apologise",
    "Priyanka must not stay silent",
    "Adityanath do not worry",
    "Vadra cannot explain",
    "Amit will not attend",
    "Narendra would not comment",
    "Robert wouldn't say",
    "Gandhi isn't present",
    "BJP is not worried",
    "Modi dare not debate",
    "Rahul have not answered",
    "Shah might not come",
    "Congress may not contest",
    "Kejriwal need not fear",
    "Yogi ought not gloat",
    "Sonia shall not return",
];

/// Ten fixed sample pairs of varied size, spread and sign of the difference.
pub fn fixed_pairs() -> Vec<(Vec<f64>, Vec<f64>)> {
    vec![
        (vec![2.1, 2.0, 1.9, 2.2], vec![1.0, 1.1, 0.9, 1.0]),
        (vec![0.21, 0.25, 0.19, 0.3, 0.22], vec![0.15, 0.18, 0.12, 0.2, 0.16, 0.14]),
        (vec![1.0, 2.0], vec![1.5, 2.5, 3.5]),
        (vec![10.0, 12.0, 9.5, 11.0, 10.5, 13.0], vec![10.2, 10.1, 10.4]),
        (vec![-1.0, 0.5, 0.25, -0.75], vec![0.0, 0.1, -0.1, 0.05, 0.02]),
        (vec![5.0, 5.5, 6.0, 7.5, 4.0, 6.5, 5.25], vec![5.1, 5.2]),
        (vec![0.001, 0.002, 0.0015], vec![0.0011, 0.0009, 0.0013, 0.0012]),
        (vec![100.0, 140.0, 90.0, 120.0], vec![60.0, 200.0, 10.0, 150.0, 80.0]),
        (vec![3.0, 3.0, 3.0, 3.5], vec![1.0, 4.0, 2.0, 6.0, 3.0, 5.0]),
        (vec![0.6, 0.4, 0.55, 0.45, 0.5, 0.52], vec![0.49, 0.51, 0.5, 0.48]),
    ]
}

/// Worked example: 10 subjects, 14 raters, 5 categories.
pub const WORKED_KAPPA: [[u32; 5]; 10] = [
    [0, 0, 0, 0, 14],
    [0, 2, 6, 4, 2],
    [0, 0, 3, 5, 6],
    [0, 3, 9, 2, 0],
    [2, 2, 8, 1, 1],
    [7, 7, 0, 0, 0],
    [3, 2, 6, 3, 0],
    [2, 5, 3, 2, 2],
    [6, 5, 2, 1, 0],
    [0, 2, 2, 3, 7],
];
