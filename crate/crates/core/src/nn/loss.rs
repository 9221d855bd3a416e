use super::NnError;

/// Mean pinball loss for quantile `q` and its gradient with respect to `pred`.
///
/// Per element the loss is `max(q * e, (q - 1) * e)` with `e = target - pred`.
/// The subgradient at `e == 0` is taken as zero.
pub fn pinball_loss(pred: &[f64], target: &[f64], q: f64) -> Result<(f64, Vec<f64>), NnError> {
    if pred.len() != target.len() {
        return Err(NnError::ShapeMismatch {
            op: "pinball_loss",
            dim: "len",
            expected: pred.len(),
            actual: target.len(),
        });
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(NnError::InvalidArgument(format!("quantile {q} outside (0, 1)")));
    }
    if pred.is_empty() {
        return Ok((0.0, Vec::new()));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(p, y)| {
            let e = y - p;
            loss += (q * e).max((q - 1.0) * e);
            if e > 0.0 {
                -q / n
            } else if e < 0.0 {
                (1.0 - q) / n
            } else {
                0.0
            }
        })
        .collect();
    Ok((loss / n, grad))
}
