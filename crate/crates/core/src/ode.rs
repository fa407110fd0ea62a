//! Classical fixed-step Runge–Kutta integration over fixed-size states.

/// Advances `y` from `t` by one RK4 step of length `h`.
pub fn rk4_step<const N: usize, F>(f: F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = f(t + h, &axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * k[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_fourth_order() {
        // x'' = -x, exact solution cos(t); global error scales as h^4
        let run = |h: f64| {
            let steps = (1.0 / h).round() as usize;
            let mut y = [1.0, 0.0];
            for i in 0..steps {
                y = rk4_step(|_, s| [s[1], -s[0]], i as f64 * h, &y, h);
            }
            (y[0] - libm::cos(1.0)).abs()
        };
        let e1 = run(0.1);
        let e2 = run(0.05);
        let order = libm::log2(e1 / e2);
        assert!((order - 4.0).abs() < 0.3, "observed order {order}");
    }
}
