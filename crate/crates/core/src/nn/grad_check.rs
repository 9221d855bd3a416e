//! Central finite-difference gradient checking.

/// Step used for central differences on `f64`.
pub const FD_STEP: f64 = 1e-5;

/// `|a - n| / (|a| + |n| + 1e-12)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs() + 1e-12)
}

/// A scalar function of a flat parameter vector with an analytic gradient.
pub trait Differentiable {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

/// Central-difference partials of `f` at `point` for the listed coordinates.
pub fn numeric_gradient<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    point: &[f64],
    coords: &[usize],
) -> Vec<f64> {
    let mut x = point.to_vec();
    coords
        .iter()
        .map(|&i| {
            let orig = x[i];
            x[i] = orig + FD_STEP;
            let plus = f(&x);
            x[i] = orig - FD_STEP;
            let minus = f(&x);
            x[i] = orig;
            (plus - minus) / (2.0 * FD_STEP)
        })
        .collect()
}

/// Max relative error between `analytic` and finite differences of `f`,
/// over the listed coordinates.
pub fn check_gradient_at<F: FnMut(&[f64]) -> f64>(
    f: F,
    point: &[f64],
    analytic: &[f64],
    coords: &[usize],
) -> f64 {
    let numeric = numeric_gradient(f, point, coords);
    coords
        .iter()
        .zip(&numeric)
        .map(|(&i, &n)| relative_error(analytic[i], n))
        .fold(0.0, f64::max)
}

/// Max relative error over every coordinate.
pub fn check_gradient<F: FnMut(&[f64]) -> f64>(f: F, point: &[f64], analytic: &[f64]) -> f64 {
    let coords: Vec<usize> = (0..point.len()).collect();
    check_gradient_at(f, point, analytic, &coords)
}

pub fn grad_check(op: &impl Differentiable, point: &[f64]) -> f64 {
    let analytic = op.gradient(point);
    check_gradient(|x| op.value(x), point, &analytic)
}
