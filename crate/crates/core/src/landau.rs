//! Landau layer for the shifted order parameter `m = phi - phi_c`:
//! `F(m) = a m^2 / 2 + b m^4 / 4 - h m`, its stationary points, over-damped
//! relaxation and the peak-normalized critical susceptibility.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandauParams {
    pub a: f64,
    /// Quartic coefficient; strictly positive.
    pub b: f64,
    pub h_field: f64,
    /// Relaxation time; strictly positive.
    pub tau: f64,
    pub phi_c: f64,
}

impl LandauParams {
    pub fn new(a: f64, b: f64, h_field: f64, tau: f64, phi_c: f64) -> Result<Self> {
        let p = Self { a, b, h_field, tau, phi_c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) || !(self.tau > 0.0) || !self.a.is_finite() || !self.h_field.is_finite() {
            return Err(Error::Domain(format!("Landau parameters need b > 0, tau > 0 and finite a, h: {self:?}")));
        }
        Ok(())
    }

    /// Drift `-a m - b m^3 + h`, equal to `-F'(m)`.
    pub fn force(&self, m: f64) -> f64 {
        -self.a * m - self.b * m * m * m + self.h_field
    }

    fn curvature(&self, m: f64) -> f64 {
        self.a + 3.0 * self.b * m * m
    }
}

pub fn free_energy(m: f64, p: &LandauParams) -> f64 {
    0.5 * p.a * m * m + 0.25 * p.b * m.powi(4) - p.h_field * m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryKind {
    Minimum,
    Maximum,
    /// Flat inflection; only at the exact critical point with a field.
    Inflection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoint {
    pub m: f64,
    pub kind: StationaryKind,
    pub free_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarySet {
    /// Distinct real roots in ascending order.
    pub points: Vec<StationaryPoint>,
    pub global_minimum: f64,
    /// Two minima share the lowest free energy; the positive one is reported.
    pub degenerate: bool,
    /// A repeated root was merged.
    pub collapsed: bool,
}

/// Real roots of `t^3 + p t + q = 0`, ascending, possibly repeated.
fn depressed_cubic_roots(p: f64, q: f64) -> Vec<f64> {
    if p == 0.0 {
        return vec![(-q).cbrt()];
    }
    let disc = q * q / 4.0 + p * p * p / 27.0;
    if p < 0.0 && disc <= 0.0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let mut roots: Vec<f64> = (0..3)
            .map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect();
        roots.sort_by(f64::total_cmp);
        roots
    } else {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    }
}

/// All real solutions of `a m + b m^3 = h`, classified by curvature, each
/// polished by one Newton step.
pub fn stationary_points(p: &LandauParams) -> Result<StationarySet> {
    p.validate()?;
    let raw = depressed_cubic_roots(p.a / p.b, -p.h_field / p.b);
    let polish = |m: f64| {
        let g = p.b * m * m * m + p.a * m - p.h_field;
        let d = p.curvature(m);
        if d.abs() > 1e-300 {
            let next = m - g / d;
            let g_next = p.b * next * next * next + p.a * next - p.h_field;
            if g_next.abs() <= g.abs() {
                return next;
            }
        }
        m
    };
    let scale = (p.a.abs() / p.b).sqrt().max((p.h_field.abs() / p.b).cbrt()).max(1e-300);
    let mut roots: Vec<f64> = Vec::with_capacity(3);
    let mut collapsed = false;
    for m in raw.into_iter().map(polish) {
        if roots.last().is_some_and(|&last: &f64| (m - last).abs() <= 1e-7 * scale) {
            collapsed = true;
            continue;
        }
        roots.push(m);
    }

    let classify = |m: f64| {
        let c = p.curvature(m);
        let tol = 1e-9 * (p.a.abs() + 3.0 * p.b * m * m).max(f64::MIN_POSITIVE);
        if c > tol {
            StationaryKind::Minimum
        } else if c < -tol {
            StationaryKind::Maximum
        } else {
            // flat: compare neighbours
            let e = 1e-4 * scale.max(1e-6);
            let f0 = free_energy(m, p);
            match (free_energy(m - e, p) > f0, free_energy(m + e, p) > f0) {
                (true, true) => StationaryKind::Minimum,
                (false, false) => StationaryKind::Maximum,
                _ => StationaryKind::Inflection,
            }
        }
    };
    let points: Vec<StationaryPoint> = roots
        .iter()
        .map(|&m| StationaryPoint {
            m,
            kind: classify(m),
            free_energy: free_energy(m, p),
        })
        .collect();

    let minima: Vec<&StationaryPoint> = points.iter().filter(|s| s.kind == StationaryKind::Minimum).collect();
    let lowest = minima.iter().map(|s| s.free_energy).fold(f64::INFINITY, f64::min);
    let tied: Vec<&&StationaryPoint> = minima
        .iter()
        .filter(|s| s.free_energy - lowest <= 1e-12 * (1.0 + lowest.abs()))
        .collect();
    let symmetric_well = p.h_field == 0.0 && p.a < 0.0;
    let degenerate = symmetric_well || tied.len() > 1;
    let global_minimum = if symmetric_well {
        (-p.a / p.b).sqrt()
    } else {
        // the positive branch wins ties
        tied.iter().map(|s| s.m).fold(f64::NEG_INFINITY, f64::max)
    };
    Ok(StationarySet {
        points,
        global_minimum,
        degenerate,
        collapsed,
    })
}

/// Largest step that keeps explicit Euler stable on `[-m_max, m_max]`.
pub fn stability_limit(p: &LandauParams, m_max: f64) -> f64 {
    p.tau / (p.a.abs() + 3.0 * p.b * m_max * m_max + 1.0)
}

/// Euler–Maruyama for `tau dm = (-a m - b m^3 + h) dt + noise_sd dW`.
///
/// Returns `steps + 1` states starting at `m0`. The stability bound uses
/// `m_max = max(|m0|, |roots|)`. With `noise_sd = 0` this is plain Euler.
pub fn lk_trajectory(m0: f64, p: &LandauParams, noise_sd: f64, dt: f64, steps: usize, seed: u64) -> Result<Vec<f64>> {
    p.validate()?;
    if !(dt > 0.0) || steps == 0 || !(noise_sd >= 0.0) || !m0.is_finite() {
        return Err(Error::Domain(format!(
            "need dt > 0, steps >= 1, noise_sd >= 0 and finite m0 (dt = {dt}, steps = {steps}, noise_sd = {noise_sd})"
        )));
    }
    let roots = stationary_points(p)?;
    let m_max = roots.points.iter().map(|s| s.m.abs()).fold(m0.abs(), f64::max);
    let limit = stability_limit(p, m_max);
    if dt >= limit {
        return Err(Error::StepSize { dt, limit });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kick = noise_sd * dt.sqrt() / p.tau;
    let mut out = Vec::with_capacity(steps + 1);
    let mut m = m0;
    out.push(m);
    for _ in 0..steps {
        let xi: f64 = if noise_sd > 0.0 { StandardNormal.sample(&mut rng) } else { 0.0 };
        m += dt / p.tau * p.force(m) + kick * xi;
        if !m.is_finite() {
            return Err(Error::StepSize { dt, limit });
        }
        out.push(m);
    }
    Ok(out)
}

/// Peak-normalized susceptibility `eps / (|phi - phi_c| + eps)`.
pub fn susceptibility(phi: f64, phi_c: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(epsilon / ((phi - phi_c).abs() + epsilon))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub a: f64,
    pub m_star: f64,
    pub f_min: f64,
    pub degenerate: bool,
}

/// Global minimum across a grid of `a` values at fixed `b`, `h`.
pub fn pitchfork_sweep(a_values: &[f64], b: f64, h_field: f64) -> Result<Vec<SweepRow>> {
    a_values
        .iter()
        .map(|&a| {
            let p = LandauParams::new(a, b, h_field, 1.0, 0.0)?;
            let s = stationary_points(&p)?;
            Ok(SweepRow {
                a,
                m_star: s.global_minimum,
                f_min: free_energy(s.global_minimum, &p),
                degenerate: s.degenerate,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lp(a: f64, b: f64, h: f64) -> LandauParams {
        LandauParams::new(a, b, h, 1.0, 0.231).unwrap()
    }

    #[test]
    fn free_energy_examples() {
        assert_eq!(free_energy(0.0, &lp(3.0, 2.0, 1.0)), 0.0);
        let p = lp(-1.0, 1.0, 0.0);
        assert_eq!(free_energy(1.0, &p), -0.25);
        assert_eq!(free_energy(-1.0, &p), -0.25);
    }

    #[test]
    fn single_well() {
        let s = stationary_points(&lp(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].m, 0.0);
        assert_eq!(s.points[0].kind, StationaryKind::Minimum);
        assert!(!s.degenerate);
    }

    #[test]
    fn symmetric_double_well() {
        let s = stationary_points(&lp(-1.0, 1.0, 0.0)).unwrap();
        let ms: Vec<f64> = s.points.iter().map(|p| p.m).collect();
        assert_eq!(ms.len(), 3);
        for (m, e) in ms.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((m - e).abs() < 1e-15);
        }
        assert_eq!(s.points[1].kind, StationaryKind::Maximum);
        assert!((s.points[0].free_energy + 0.25).abs() < 1e-15);
        assert!(s.degenerate);
        assert_eq!(s.global_minimum, 1.0);
    }

    #[test]
    fn biased_single_well() {
        let p = lp(1.0, 1.0, 0.5);
        let s = stationary_points(&p).unwrap();
        assert_eq!(s.points.len(), 1);
        let m = s.points[0].m;
        assert!((m - 0.423_853_799_069_7).abs() < 1e-12);
        assert!((m + m * m * m - 0.5).abs() < 1e-14);
        assert_eq!(free_energy(m, &p), 0.5 * m * m + 0.25 * m.powi(4) - 0.5 * m);
    }

    #[test]
    fn critical_point_is_a_minimum() {
        let s = stationary_points(&lp(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].kind, StationaryKind::Minimum);
        assert_eq!(s.global_minimum, 0.0);
    }

    #[test]
    fn spinodal_double_root_collapses() {
        // h at the spinodal of a = -3, b = 1: h = 2
        let s = stationary_points(&lp(-3.0, 1.0, 2.0)).unwrap();
        assert!(s.collapsed);
        assert_eq!(s.points.len(), 2);
    }

    #[test]
    fn pitchfork_grid() {
        let a: Vec<f64> = (0..=200).map(|i| 1.0 - 0.01 * i as f64).collect();
        for row in pitchfork_sweep(&a, 1.0, 0.0).unwrap() {
            let expected = if row.a >= 0.0 { 0.0 } else { (-row.a).sqrt() };
            assert!((row.m_star.abs() - expected).abs() < 1e-8, "{row:?}");
            assert_eq!(row.degenerate, row.a < 0.0);
        }
    }

    #[test]
    fn relaxation_examples() {
        let tr = lk_trajectory(0.5, &lp(1.0, 1.0, 0.0), 0.0, 0.1, 2000, 0).unwrap();
        assert!(tr.last().unwrap().abs() < 1e-6);
        assert!(tr.windows(2).all(|w| w[1].abs() <= w[0].abs()));
        let tr = lk_trajectory(0.1, &lp(-1.0, 1.0, 0.0), 0.0, 0.1, 2000, 0).unwrap();
        assert!((tr.last().unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn unstable_step_rejected() {
        let p = lp(-1.0, 1.0, 0.0);
        assert!(matches!(lk_trajectory(2.0, &p, 0.0, 0.5, 10, 0), Err(Error::StepSize { .. })));
    }

    #[test]
    fn noisy_trajectory_is_seeded() {
        let p = lp(-1.0, 1.0, 0.1);
        let a = lk_trajectory(0.0, &p, 0.2, 0.05, 500, 42).unwrap();
        let b = lk_trajectory(0.0, &p, 0.2, 0.05, 500, 42).unwrap();
        let c = lk_trajectory(0.0, &p, 0.2, 0.05, 500, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn susceptibility_examples() {
        assert_eq!(susceptibility(0.231, 0.231, 0.01).unwrap(), 1.0);
        assert!((susceptibility(0.241, 0.231, 0.01).unwrap() - 0.5).abs() < 1e-12);
        assert!((susceptibility(0.221, 0.231, 0.01).unwrap() - 0.5).abs() < 1e-12);
        assert!(susceptibility(0.3, 0.231, 0.0).is_err());
    }

    /// Sign changes of the cubic on a dense grid, as bracket midpoints.
    fn bracket_roots(p: &LandauParams) -> Vec<f64> {
        let g = |m: f64| p.b * m * m * m + p.a * m - p.h_field;
        let n = 200_000;
        let (lo, hi) = (-5.0, 5.0);
        let step = (hi - lo) / n as f64;
        let mut out = Vec::new();
        for i in 0..n {
            let (x0, x1) = (lo + i as f64 * step, lo + (i + 1) as f64 * step);
            if g(x0) == 0.0 || g(x0).signum() != g(x1).signum() {
                out.push(0.5 * (x0 + x1));
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn roots_satisfy_cubic_and_match_brackets(a in -2.0f64..2.0, b in 0.2f64..2.0, h in -1.0f64..1.0) {
            let p = lp(a, b, h);
            let s = stationary_points(&p).unwrap();
            prop_assert!(s.points.len() == 1 || s.points.len() == 3 || s.collapsed);
            for pt in &s.points {
                prop_assert!((b * pt.m.powi(3) + a * pt.m - h).abs() < 1e-10);
            }
            let brackets = bracket_roots(&p);
            if !s.collapsed && brackets.len() == s.points.len() {
                for (r, m) in brackets.iter().zip(&s.points) {
                    prop_assert!((r - m.m).abs() < 1e-4);
                }
            } else {
                // near-tangent roots can hide between grid points
                prop_assert!(brackets.len() <= s.points.len() + 1);
            }
            let gmin = free_energy(s.global_minimum, &p);
            for pt in s.points.iter().filter(|p| p.kind == StationaryKind::Minimum) {
                prop_assert!(gmin <= pt.free_energy + 1e-12);
            }
        }

        #[test]
        fn noiseless_descent_ends_at_a_root(a in -2.0f64..2.0, b in 0.2f64..2.0, h in -1.0f64..1.0, m0 in -2.0f64..2.0) {
            let p = lp(a, b, h);
            let roots = stationary_points(&p).unwrap();
            let m_max = roots.points.iter().map(|s| s.m.abs()).fold(m0.abs(), f64::max);
            let dt = 0.5 * stability_limit(&p, m_max);
            let tr = lk_trajectory(m0, &p, 0.0, dt, 20_000, 0).unwrap();
            for w in tr.windows(2) {
                prop_assert!(free_energy(w[1], &p) <= free_energy(w[0], &p) + 1e-12);
            }
            let last = *tr.last().unwrap();
            let dist = roots.points.iter().map(|s| (s.m - last).abs()).fold(f64::INFINITY, f64::min);
            prop_assert!(dist < 1e-4, "last {last} roots {:?}", roots.points);
        }

        #[test]
        fn susceptibility_even_and_decreasing(d in 0.0f64..1.0, e in 1e-4f64..0.1) {
            let s_plus = susceptibility(0.231 + d, 0.231, e).unwrap();
            let s_minus = susceptibility(0.231 - d, 0.231, e).unwrap();
            prop_assert!((s_plus - s_minus).abs() < 1e-12);
            prop_assert!(susceptibility(0.231 + d + 0.01, 0.231, e).unwrap() < s_plus);
        }
    }
}
