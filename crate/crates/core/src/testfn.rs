//! Temporal test functions: smooth compactly supported plateaus, the C^1
//! linear-ramp glue, and the unit step with a linear transition window.

/// sigma(s) = exp(-1/s) for s > 0, else 0. Building block of C-infinity
/// cutoffs.
fn sigma(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

fn sigma_deriv(s: f64) -> f64 {
    if s > 0.0 {
        sigma(s) / (s * s)
    } else {
        0.0
    }
}

/// C-infinity step: 0 for s <= 0, 1 for s >= 1.
fn smoothstep(s: f64) -> f64 {
    let a = sigma(s);
    let b = sigma(1.0 - s);
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        1.0
    } else {
        a / (a + b)
    }
}

fn smoothstep_deriv(s: f64) -> f64 {
    let a = sigma(s);
    let b = sigma(1.0 - s);
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        let da = sigma_deriv(s);
        let db = -sigma_deriv(1.0 - s);
        (da * b - a * db) / ((a + b) * (a + b))
    }
}

#[derive(Debug, Clone)]
pub enum TestFunction {
    /// C-infinity plateau: rises on [t0, t0+edge], equals 1, falls on
    /// [t1-edge, t1]; vanishes outside (t0, t1).
    SmoothCompact { t0: f64, t1: f64, edge: f64 },
    /// psi(t) = t/tau for t <= tau, cubic C^1 glue on [tau, tau+1/k],
    /// then a unit plateau that falls smoothly on [fall_start, fall_end].
    Ramp {
        tau: f64,
        k: f64,
        fall_start: f64,
        fall_end: f64,
    },
    /// 0 below t_tilde - eps/2, linear across the window, 1 above.
    Step { t_tilde: f64, eps: f64 },
}

impl TestFunction {
    pub fn smooth_compact(t0: f64, t1: f64, edge: f64) -> Self {
        assert!(t1 - t0 > 2.0 * edge && edge > 0.0);
        TestFunction::SmoothCompact { t0, t1, edge }
    }

    pub fn ramp(tau: f64, k: f64, fall_start: f64, fall_end: f64) -> Self {
        assert!(tau > 0.0 && k > 0.0);
        assert!(tau + 1.0 / k < fall_start && fall_start < fall_end);
        TestFunction::Ramp {
            tau,
            k,
            fall_start,
            fall_end,
        }
    }

    pub fn step(t_tilde: f64, eps: f64) -> Self {
        assert!(eps > 0.0 && t_tilde >= eps / 2.0);
        TestFunction::Step { t_tilde, eps }
    }

    /// Interval outside which both psi and psi_t vanish. The step function
    /// never returns to zero; its support extends to +infinity.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            TestFunction::SmoothCompact { t0, t1, .. } => (t0, t1),
            TestFunction::Ramp { fall_end, .. } => (0.0, fall_end),
            TestFunction::Step { t_tilde, eps } => (t_tilde - eps / 2.0, f64::INFINITY),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TestFunction::SmoothCompact { t0, t1, edge } => {
                smoothstep((t - t0) / edge) * smoothstep((t1 - t) / edge)
            }
            TestFunction::Ramp {
                tau,
                k,
                fall_start,
                fall_end,
            } => {
                if t <= 0.0 {
                    0.0
                } else if t <= tau {
                    t / tau
                } else if t < tau + 1.0 / k {
                    // cubic Hermite: (1, 1/tau) -> (1, 0)
                    let x = (t - tau) * k;
                    1.0 + (x * x * x - 2.0 * x * x + x) / (tau * k)
                } else if t <= fall_start {
                    1.0
                } else if t < fall_end {
                    smoothstep((fall_end - t) / (fall_end - fall_start))
                } else {
                    0.0
                }
            }
            TestFunction::Step { t_tilde, eps } => {
                if t <= t_tilde - eps / 2.0 {
                    0.0
                } else if t >= t_tilde + eps / 2.0 {
                    1.0
                } else {
                    0.5 + (t - t_tilde) / eps
                }
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            TestFunction::SmoothCompact { t0, t1, edge } => {
                let up = smoothstep((t - t0) / edge);
                let dn = smoothstep((t1 - t) / edge);
                let dup = smoothstep_deriv((t - t0) / edge) / edge;
                let ddn = -smoothstep_deriv((t1 - t) / edge) / edge;
                dup * dn + up * ddn
            }
            TestFunction::Ramp {
                tau,
                k,
                fall_start,
                fall_end,
            } => {
                if t < 0.0 {
                    0.0
                } else if t <= tau {
                    // right-limit at the t = 0 kink: trajectories start at 0,
                    // so node-based trapezoid sums only see the ramp side
                    1.0 / tau
                } else if t < tau + 1.0 / k {
                    let x = (t - tau) * k;
                    (3.0 * x * x - 4.0 * x + 1.0) / tau
                } else if t <= fall_start {
                    0.0
                } else if t < fall_end {
                    -smoothstep_deriv((fall_end - t) / (fall_end - fall_start))
                        / (fall_end - fall_start)
                } else {
                    0.0
                }
            }
            TestFunction::Step { t_tilde, eps } => {
                let lo = t_tilde - eps / 2.0;
                let hi = t_tilde + eps / 2.0;
                if t > lo && t < hi {
                    1.0 / eps
                } else {
                    0.0
                }
            }
        }
    }

    pub fn values_on(&self, times: &[f64]) -> Vec<f64> {
        times.iter().map(|&t| self.value(t)).collect()
    }

    pub fn derivatives_on(&self, times: &[f64]) -> Vec<f64> {
        times.iter().map(|&t| self.derivative(t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_compact_vanishes_near_endpoints() {
        let psi = TestFunction::smooth_compact(1.0, 2.0, 0.25);
        assert_eq!(psi.value(0.99), 0.0);
        assert_eq!(psi.value(2.01), 0.0);
        assert!((psi.value(1.5) - 1.0).abs() < 1e-12);
        // derivative consistent with finite differences
        for &t in &[1.1, 1.2, 1.8, 1.9] {
            let h = 1e-6;
            let fd = (psi.value(t + h) - psi.value(t - h)) / (2.0 * h);
            assert!((psi.derivative(t) - fd).abs() < 1e-5, "t={t}");
        }
    }

    #[test]
    fn ramp_matches_linear_part_and_is_c1() {
        let psi = TestFunction::ramp(0.2, 50.0, 1.0, 1.5);
        assert!((psi.value(0.1) - 0.5).abs() < 1e-12);
        assert!((psi.derivative(0.1) - 5.0).abs() < 1e-12);
        // C1 joins at tau and tau + 1/k
        for &t in &[0.2, 0.22] {
            let h = 1e-7;
            let left = (psi.value(t) - psi.value(t - h)) / h;
            let right = (psi.value(t + h) - psi.value(t)) / h;
            assert!((left - right).abs() < 1e-4, "kink at {t}: {left} vs {right}");
        }
        assert!((psi.value(0.5) - 1.0).abs() < 1e-12);
        assert_eq!(psi.value(1.6), 0.0);
    }

    #[test]
    fn step_matches_piecewise_definition() {
        let psi = TestFunction::step(1.0, 0.2);
        assert_eq!(psi.value(0.89), 0.0);
        assert_eq!(psi.value(1.11), 1.0);
        assert!((psi.value(1.0) - 0.5).abs() < 1e-14);
        assert!((psi.value(1.05) - 0.75).abs() < 1e-14);
        assert!((psi.derivative(1.0) - 5.0).abs() < 1e-14);
        // discrete telescoping: sum of forward differences equals 1
        let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.01).collect();
        let values = psi.values_on(&times);
        let total: f64 = values.windows(2).map(|w| w[1] - w[0]).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
