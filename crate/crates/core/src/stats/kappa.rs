use super::StatsError;

/// Fleiss' kappa over an `items × categories` matrix of rater counts.
pub fn fleiss_kappa(ratings: &[Vec<u32>]) -> Result<f64, StatsError> {
    let Some(first) = ratings.first() else {
        return Err(StatsError::TooFewRatings);
    };
    let n: u32 = first.iter().sum();
    if n < 2 {
        return Err(StatsError::TooFewRatings);
    }
    let k = first.len();
    if ratings.iter().any(|row| row.len() != k || row.iter().sum::<u32>() != n) {
        return Err(StatsError::UnequalRaterCounts);
    }
    let items = ratings.len() as f64;
    let n = n as f64;

    let mut column_totals = vec![0.0; k];
    let mut p_bar = 0.0;
    for row in ratings {
        let mut agree = 0.0;
        for (j, &c) in row.iter().enumerate() {
            let c = c as f64;
            column_totals[j] += c;
            agree += c * (c - 1.0);
        }
        p_bar += agree / (n * (n - 1.0));
    }
    p_bar /= items;
    let p_e: f64 = column_totals
        .iter()
        .map(|t| {
            let p = t / (items * n);
            p * p
        })
        .sum();
    if p_e >= 1.0 {
        return Err(StatsError::Degenerate);
    }
    if p_bar == 1.0 {
        return Ok(1.0);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}
