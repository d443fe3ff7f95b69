use super::{Dataset, ScoreError};

/// Joint tables up to this many cells are counted densely; larger ones are
/// counted by sorting row keys.
const DENSE_LIMIT: u64 = 1 << 20;

/// BIC of `v` given `parents`: maximum log-likelihood (natural log) minus
/// `ln(N)/2 · (r_v − 1) · ∏ r_p`. Unobserved parent configurations add
/// nothing to the likelihood term.
pub fn bic_score(data: &Dataset, v: usize, parents: &[usize]) -> Result<f64, ScoreError> {
    let n_vars = data.var_count();
    if v >= n_vars {
        return Err(ScoreError::VertexOutOfRange { vertex: v, count: n_vars });
    }
    if let Some(&p) = parents.iter().find(|&&p| p >= n_vars) {
        return Err(ScoreError::VertexOutOfRange { vertex: p, count: n_vars });
    }
    if parents.contains(&v) {
        return Err(ScoreError::SelfParent(v));
    }
    let r_v = data.arity(v) as u64;
    let mut q: u64 = 1;
    for &p in parents {
        q = q
            .checked_mul(data.arity(p) as u64)
            .ok_or(ScoreError::TooManyConfigurations(v))?;
    }
    let cells = q
        .checked_mul(r_v)
        .ok_or(ScoreError::TooManyConfigurations(v))?;

    let rows = data.row_count();
    let keys = (0..rows).map(|i| {
        let mut j: u64 = 0;
        for &p in parents {
            j = j * data.arity(p) as u64 + data.column(p)[i] as u64;
        }
        j * r_v + data.column(v)[i] as u64
    });

    let ll = if cells <= DENSE_LIMIT {
        let mut counts = vec![0u32; cells as usize];
        for k in keys {
            counts[k as usize] += 1;
        }
        counts
            .chunks(r_v as usize)
            .map(config_log_likelihood)
            .sum::<f64>()
    } else {
        let mut keys: Vec<u64> = keys.collect();
        keys.sort_unstable();
        let mut ll = 0.0;
        let mut block: Vec<u32> = Vec::new();
        let mut i = 0;
        while i < keys.len() {
            let config = keys[i] / r_v;
            block.clear();
            while i < keys.len() && keys[i] / r_v == config {
                let k = keys[i];
                let mut c = 0;
                while i < keys.len() && keys[i] == k {
                    c += 1;
                    i += 1;
                }
                block.push(c);
            }
            ll += config_log_likelihood(&block);
        }
        ll
    };

    let penalty = 0.5 * (rows as f64).ln() * (r_v - 1) as f64 * q as f64;
    Ok(ll - penalty)
}

/// `Σ_k N_jk ln(N_jk / N_j)` for one parent configuration.
fn config_log_likelihood(counts: &[u32]) -> f64 {
    let total: u32 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let c = c as f64;
            c * (c / total).ln()
        })
        .sum()
}

/// Empirical mutual information (nats) between two variables.
pub fn mutual_information(data: &Dataset, a: usize, b: usize) -> f64 {
    let (ra, rb) = (data.arity(a), data.arity(b));
    let mut joint = vec![0u32; ra * rb];
    let (ca, cb) = (data.column(a), data.column(b));
    for i in 0..data.row_count() {
        joint[ca[i] as usize * rb + cb[i] as usize] += 1;
    }
    let n = data.row_count() as f64;
    let mut pa = vec![0u32; ra];
    let mut pb = vec![0u32; rb];
    for x in 0..ra {
        for y in 0..rb {
            pa[x] += joint[x * rb + y];
            pb[y] += joint[x * rb + y];
        }
    }
    let mut mi = 0.0;
    for x in 0..ra {
        for y in 0..rb {
            let c = joint[x * rb + y];
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (pa[x] as f64 * pb[y] as f64)).ln();
            }
        }
    }
    mi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(arities: Vec<usize>, rows: &[&[u32]]) -> Dataset {
        let rows: Vec<Vec<u32>> = rows.iter().map(|r| r.to_vec()).collect();
        Dataset::from_rows(arities, &rows).unwrap()
    }

    #[test]
    fn balanced_binary_without_parents() {
        let d = data(vec![2], &[&[0], &[0], &[1], &[1]]);
        let expected = 4.0 * 0.5f64.ln() - 4f64.ln() / 2.0;
        assert!((bic_score(&d, 0, &[]).unwrap() - expected).abs() < 1e-9);
        assert!((bic_score(&d, 0, &[]).unwrap() - (-3.4657359027997265)).abs() < 1e-9);
    }

    #[test]
    fn constant_variable_pays_only_the_penalty() {
        let d = data(vec![3], &[&[1], &[1], &[1], &[1], &[1]]);
        let expected = -(5f64.ln()) / 2.0 * 2.0;
        assert!((bic_score(&d, 0, &[]).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn perfectly_predictive_parent() {
        let d = data(vec![2, 2], &[&[0, 0], &[0, 0], &[1, 1], &[1, 1]]);
        assert!((bic_score(&d, 1, &[0]).unwrap() - (-1.3862943611198906)).abs() < 1e-9);
    }

    #[test]
    fn own_parent_is_rejected() {
        let d = data(vec![2, 2], &[&[0, 0]]);
        assert!(matches!(bic_score(&d, 1, &[1]), Err(ScoreError::SelfParent(1))));
    }

    #[test]
    fn sorted_counting_matches_grouping() {
        // 12 ternary parents: 3^13 cells, beyond the dense limit
        let rows: Vec<Vec<u32>> = (0..300u32)
            .map(|i| (0..13).map(|v| (i * (v + 7) / 5 + v * i / 3) % 3).collect())
            .collect();
        let d = Dataset::from_rows(vec![3; 13], &rows).unwrap();
        let parents: Vec<usize> = (0..12).collect();
        let got = bic_score(&d, 12, &parents).unwrap();
        let mut groups: std::collections::BTreeMap<Vec<u32>, [u32; 3]> = Default::default();
        for r in &rows {
            groups.entry(r[..12].to_vec()).or_default()[r[12] as usize] += 1;
        }
        let ll: f64 = groups.values().map(|c| config_log_likelihood(c)).sum();
        let pen = 0.5 * 300f64.ln() * 2.0 * 3f64.powi(12);
        assert!((got - (ll - pen)).abs() < 1e-9);
    }

    #[test]
    fn mutual_information_of_copy_is_entropy() {
        let d = data(vec![2, 2], &[&[0, 0], &[1, 1], &[0, 0], &[1, 1]]);
        assert!((mutual_information(&d, 0, 1) - 2f64.ln()).abs() < 1e-12);
        let ind = data(vec![2, 2], &[&[0, 0], &[0, 1], &[1, 0], &[1, 1]]);
        assert!(mutual_information(&ind, 0, 1).abs() < 1e-12);
    }
}
