use crate::error::{Error, Result};

/// Drop the `k` slowest values, keeping survivors in their original order.
/// Among equal values the later ones are dropped first.
pub fn trim_worst(times: &[f64], k: usize) -> Result<Vec<f64>> {
    if times.len() <= k {
        return Err(Error::Insufficient(format!(
            "cannot trim {k} of {} values",
            times.len()
        )));
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[b].total_cmp(&times[a]).then(b.cmp(&a)));
    let mut drop = vec![false; times.len()];
    for &i in &order[..k] {
        drop[i] = true;
    }
    Ok(times
        .iter()
        .zip(drop)
        .filter_map(|(&t, d)| (!d).then_some(t))
        .collect())
}
