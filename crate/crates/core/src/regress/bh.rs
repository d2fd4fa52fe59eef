use super::RegressError;

/// Benjamini–Hochberg step-up adjusted p-values, returned in input order.
pub fn bh_adjust(p_values: &[f64]) -> Result<Vec<f64>, RegressError> {
    if let Some(&bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(RegressError::PValueOutOfRange(bad));
    }
    let n = p_values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));

    let mut adjusted = vec![0.0; n];
    let mut running = 1.0f64;
    for (pos, &idx) in order.iter().enumerate().rev() {
        let rank = (pos + 1) as f64;
        running = running.min(p_values[idx] * n as f64 / rank);
        // rounding in p·n/rank must not push the result below p
        adjusted[idx] = running.max(p_values[idx]);
    }
    Ok(adjusted)
}
