//! Robust pole placement for a pendulum with uncertain mass, length and
//! friction.
//!
//! The controller `f(s)/g(s)` with `f = f1 s + f2`, `g = s^2 + g1 s + g2`
//! gives the closed-loop polynomial `a(s) g(s) + f(s)`. Its coefficients are
//! linear in the controller, so the minimax distance to a reference polynomial
//! is a linear program.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::roots::polynomial_roots;
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpStatus, RowTag, Sense};
use crate::scenario::{canonical_order, Decision, DecisionProblem, ScenarioId, ScenarioSampler};

pub const PROBLEM_ID: &str = "pole-placement";
pub const GRAVITY: f64 = 9.8;
/// Slack allowed on the coefficient rows when checking baseline
/// appropriateness.
pub const ROW_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PendulumScenario {
    /// Mass, kg.
    #[serde(rename = "M")]
    pub mass: f64,
    /// Length, m.
    #[serde(rename = "l")]
    pub length: f64,
    /// Friction coefficient.
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicSector {
    pub max_real: f64,
    pub min_damping: f64,
}

impl ConicSector {
    pub fn new(max_real: f64, min_damping: f64) -> Result<Self> {
        if !(max_real < 0.0) {
            return Err(Error::domain(format!(
                "sector real-part bound must be negative, got {max_real}"
            )));
        }
        if !(min_damping > 0.0 && min_damping < 1.0) {
            return Err(Error::domain(format!(
                "sector damping must lie in (0, 1), got {min_damping}"
            )));
        }
        Ok(ConicSector {
            max_real,
            min_damping,
        })
    }

    /// `sqrt(1 - ζ^2) / ζ`
    pub fn slope(&self) -> f64 {
        (1.0 - self.min_damping * self.min_damping).sqrt() / self.min_damping
    }
}

pub fn in_conic_sector(root: Complex64, sector: &ConicSector) -> bool {
    root.re <= sector.max_real && root.im.abs() <= sector.slope() * (-root.re)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolePlacementSpec {
    /// `r_1..r_4` of `s^4 + r_1 s^3 + r_2 s^2 + r_3 s + r_4`.
    pub reference_coeffs: [f64; 4],
    pub sector: ConicSector,
    pub gravity: f64,
}

impl PolePlacementSpec {
    pub fn new(reference_coeffs: [f64; 4], sector: ConicSector, gravity: f64) -> Result<Self> {
        let mut poly = vec![1.0];
        poly.extend_from_slice(&reference_coeffs);
        for z in polynomial_roots(&poly)? {
            let inside = z.re < sector.max_real && z.im.abs() < sector.slope() * (-z.re);
            if !inside {
                return Err(Error::domain(format!(
                    "reference root {z} is not strictly inside the sector"
                )));
            }
        }
        Ok(PolePlacementSpec {
            reference_coeffs,
            sector,
            gravity,
        })
    }

    pub fn with_sector(&self, sector: ConicSector) -> Result<Self> {
        Self::new(self.reference_coeffs, sector, self.gravity)
    }
}

impl Default for PolePlacementSpec {
    fn default() -> Self {
        PolePlacementSpec {
            reference_coeffs: [8.0, 32.0, 48.0, 36.0],
            sector: ConicSector {
                max_real: -0.7,
                min_damping: 0.5,
            },
            gravity: GRAVITY,
        }
    }
}

/// `(a1, a2)` of the plant denominator `s^2 + a1 s + a2`.
pub fn pendulum_plant_coeffs(s: &PendulumScenario, gravity: f64) -> Result<(f64, f64)> {
    if !(s.mass > 0.0) || !(s.length > 0.0) {
        return Err(Error::domain(format!(
            "pendulum mass and length must be positive, got M = {}, l = {}",
            s.mass, s.length
        )));
    }
    Ok((s.alpha / (s.mass * s.length), -gravity / s.length))
}

/// Closed-loop coefficients `(p1, p2, p3, p4)` for controller
/// `(f1, f2, g1, g2)`.
pub fn closed_loop_coeffs(plant: (f64, f64), controller: [f64; 4]) -> [f64; 4] {
    let (a1, a2) = plant;
    let [f1, f2, g1, g2] = controller;
    [
        a1 + g1,
        a2 + g2 + a1 * g1,
        a1 * g2 + a2 * g1 + f1,
        a2 * g2 + f2,
    ]
}

/// Constant part and controller gradient of each closed-loop coefficient.
fn affine_coeffs(plant: (f64, f64)) -> [(f64, [f64; 4]); 4] {
    let (a1, a2) = plant;
    [
        (a1, [0.0, 0.0, 1.0, 0.0]),
        (a2, [0.0, 0.0, a1, 1.0]),
        (0.0, [1.0, 0.0, a2, a1]),
        (0.0, [0.0, 1.0, 0.0, a2]),
    ]
}

/// Variables `(f1, f2, g1, g2, h1..h4)`, objective `Σ h`.
pub fn build_pole_placement_lp(
    scenarios: &[(ScenarioId, &PendulumScenario)],
    spec: &PolePlacementSpec,
) -> Result<LinearProgram> {
    let mut c = vec![0.0; 8];
    c[4..].iter_mut().for_each(|v| *v = 1.0);
    let mut lp = LinearProgram::new(c);
    for j in 4..8 {
        lp.set_bounds(j, 0.0, f64::INFINITY);
    }
    for &(id, s) in scenarios {
        let plant = pendulum_plant_coeffs(s, spec.gravity)?;
        for (j, (constant, grad)) in affine_coeffs(plant).into_iter().enumerate() {
            let r = spec.reference_coeffs[j];
            let mut up = vec![0.0; 8];
            up[..4].copy_from_slice(&grad);
            up[4 + j] = -1.0;
            let mut down: Vec<f64> = grad.iter().map(|v| -v).collect();
            down.extend_from_slice(&[0.0; 4]);
            down[4 + j] = -1.0;
            lp.push_row(up, Sense::Le, r - constant, RowTag::Scenario(id));
            lp.push_row(down, Sense::Le, constant - r, RowTag::Scenario(id));
        }
    }
    Ok(lp)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControllerDecision {
    pub f: [f64; 2],
    pub g: [f64; 2],
    pub h: [f64; 4],
}

impl ControllerDecision {
    pub fn from_decision(d: &Decision) -> Result<Self> {
        let v = &d.variables;
        if v.len() != 8 {
            return Err(Error::domain(format!(
                "pole-placement decision has {} variables, expected 8",
                v.len()
            )));
        }
        Ok(ControllerDecision {
            f: [v[0], v[1]],
            g: [v[2], v[3]],
            h: [v[4], v[5], v[6], v[7]],
        })
    }

    pub fn controller(&self) -> [f64; 4] {
        [self.f[0], self.f[1], self.g[0], self.g[1]]
    }

    pub fn to_decision(&self) -> Decision {
        let mut v = self.controller().to_vec();
        v.extend_from_slice(&self.h);
        Decision::new(v, self.h.iter().sum())
    }
}

/// Closed-loop poles of `scenario` under `controller`.
pub fn closed_loop_roots(
    controller: [f64; 4],
    scenario: &PendulumScenario,
    gravity: f64,
) -> Result<Vec<Complex64>> {
    let plant = pendulum_plant_coeffs(scenario, gravity)?;
    let p = closed_loop_coeffs(plant, controller);
    polynomial_roots(&[1.0, p[0], p[1], p[2], p[3]])
}

/// All four closed-loop poles lie in the sector.
pub fn pole_placement_postdesign_ok(
    decision: &ControllerDecision,
    scenario: &PendulumScenario,
    spec: &PolePlacementSpec,
) -> Result<bool> {
    let roots = closed_loop_roots(decision.controller(), scenario, spec.gravity)?;
    Ok(roots.iter().all(|z| in_conic_sector(*z, &spec.sector)))
}

/// `|p_j(δ) - r_j| <= h_j` for every coefficient.
pub fn pole_placement_baseline_ok(
    decision: &ControllerDecision,
    scenario: &PendulumScenario,
    spec: &PolePlacementSpec,
) -> Result<bool> {
    let plant = pendulum_plant_coeffs(scenario, spec.gravity)?;
    let p = closed_loop_coeffs(plant, decision.controller());
    Ok((0..4).all(|j| {
        let r = spec.reference_coeffs[j];
        (p[j] - r).abs() <= decision.h[j] + ROW_TOLERANCE * (1.0 + r.abs())
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolePlacement {
    pub spec: PolePlacementSpec,
    pub nondegenerate: bool,
}

impl PolePlacement {
    pub fn new(spec: PolePlacementSpec) -> Self {
        PolePlacement {
            spec,
            nondegenerate: false,
        }
    }
}

impl DecisionProblem for PolePlacement {
    type Scenario = PendulumScenario;

    fn solve(&self, scenarios: &[(ScenarioId, &PendulumScenario)]) -> Result<Decision> {
        let ordered = canonical_order(scenarios, |s| vec![s.mass, s.length, s.alpha]);
        let lp = build_pole_placement_lp(&ordered, &self.spec)?;
        let sol = solve_lp(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::numerical(format!(
                "pole-placement program reported {:?}",
                sol.status
            )));
        }
        let mut d = Decision::new(sol.variables.clone(), sol.objective_value);
        d.active_scenarios = Some(sol.active_scenarios());
        Ok(d)
    }

    fn baseline_ok(&self, decision: &Decision, scenario: &PendulumScenario) -> Result<bool> {
        pole_placement_baseline_ok(
            &ControllerDecision::from_decision(decision)?,
            scenario,
            &self.spec,
        )
    }

    fn postdesign_ok(&self, decision: &Decision, scenario: &PendulumScenario) -> Result<bool> {
        pole_placement_postdesign_ok(
            &ControllerDecision::from_decision(decision)?,
            scenario,
            &self.spec,
        )
    }

    /// Sector membership does not imply the coefficient bounds.
    fn is_nested(&self) -> bool {
        false
    }

    fn nondegenerate(&self) -> bool {
        self.nondegenerate
    }
}

/// `M ~ U[9, 10]`, `l ~ U[0.9, 1]`, `α | M ~ U[M, 1.1 M]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct PendulumSampler;

impl ScenarioSampler for PendulumSampler {
    type Scenario = PendulumScenario;

    fn name(&self) -> &str {
        "pendulum-uniform"
    }

    fn sample(&self, rng: &mut ChaCha20Rng) -> Result<PendulumScenario> {
        let mass = rng.random_range(9.0..=10.0);
        let length = rng.random_range(0.9..=1.0);
        let alpha = rng.random_range(mass..=1.1 * mass);
        Ok(PendulumScenario {
            mass,
            length,
            alpha,
        })
    }
}

pub fn sample_pendulum_scenarios(n: usize, seed: u64) -> Result<Vec<PendulumScenario>> {
    Ok(PendulumSampler.sample_set(n, seed)?.into_payloads())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(mass: f64, length: f64, alpha: f64) -> PendulumScenario {
        PendulumScenario {
            mass,
            length,
            alpha,
        }
    }

    #[test]
    fn plant_coefficients() {
        assert_eq!(
            pendulum_plant_coeffs(&sc(10.0, 1.0, 10.0), GRAVITY).unwrap(),
            (1.0, -9.8)
        );
        assert_eq!(
            pendulum_plant_coeffs(&sc(1.0, 1.0, 0.0), GRAVITY).unwrap(),
            (0.0, -9.8)
        );
        let (a1, a2) = pendulum_plant_coeffs(&sc(9.5, 0.95, 9.975), GRAVITY).unwrap();
        assert!((a1 - 1.105263).abs() < 1e-6 && (a2 + 10.315789).abs() < 1e-6);
        assert!(pendulum_plant_coeffs(&sc(0.0, 1.0, 1.0), GRAVITY).is_err());
        assert!(pendulum_plant_coeffs(&sc(1.0, -1.0, 1.0), GRAVITY).is_err());
    }

    #[test]
    fn closed_loop_expansion() {
        assert_eq!(
            closed_loop_coeffs((1.5, -2.0), [0.0; 4]),
            [1.5, -2.0, 0.0, 0.0]
        );
        assert_eq!(
            closed_loop_coeffs((0.0, 0.0), [1.0, 2.0, 3.0, 4.0]),
            [3.0, 4.0, 1.0, 2.0]
        );
        let p = closed_loop_coeffs((1.0, -9.8), [724.0, 3536.0, 6.889, 34.72]);
        let expected = [7.889, 31.809, 691.2078, 3195.744];
        for (a, b) in p.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9, "{p:?}");
        }
        // cross-check against the polynomial product a(s) g(s) + f(s)
        let a = [1.0, 1.0, -9.8];
        let g = [1.0, 6.889, 34.72];
        let mut prod = [0.0; 5];
        for i in 0..3 {
            for j in 0..3 {
                prod[i + j] += a[i] * g[j];
            }
        }
        prod[3] += 724.0;
        prod[4] += 3536.0;
        for j in 0..4 {
            assert!((prod[j + 1] - p[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn sector_membership() {
        let s = ConicSector::new(-0.7, 0.5).unwrap();
        assert!(!in_conic_sector(Complex64::new(-0.5, 0.0), &s));
        assert!(in_conic_sector(Complex64::new(-1.0, 1.0), &s));
        assert!(in_conic_sector(Complex64::new(-0.7, 0.0), &s));
        assert!(ConicSector::new(0.1, 0.5).is_err());
        assert!(ConicSector::new(-0.1, 1.0).is_err());
    }

    #[test]
    fn reference_polynomial_predicate() {
        // a plant (0, 0) turns the controller into the closed-loop coefficients
        let spec = PolePlacementSpec::default();
        let d = ControllerDecision {
            f: [48.0, 36.0],
            g: [8.0, 32.0],
            h: [0.0; 4],
        };
        let roots = polynomial_roots(&[1.0, 8.0, 32.0, 48.0, 36.0]).unwrap();
        assert!(roots.iter().all(|z| in_conic_sector(*z, &spec.sector)));
        let narrow = ConicSector::new(-5.0, 0.99).unwrap();
        assert!(!roots.iter().all(|z| in_conic_sector(*z, &narrow)));
        let wide = ConicSector::new(-1e-9, 1e-6).unwrap();
        assert!(roots.iter().all(|z| in_conic_sector(*z, &wide)));
        let wide_poles = closed_loop_roots(d.controller(), &sc(1.0, 1.0, 0.0), 0.0).unwrap();
        assert!(wide_poles.iter().all(|z| in_conic_sector(*z, &spec.sector)));
    }

    #[test]
    fn reference_roots_must_be_inside() {
        let narrow = ConicSector::new(-5.0, 0.99).unwrap();
        assert!(PolePlacementSpec::default().with_sector(narrow).is_err());
    }

    #[test]
    fn single_scenario_is_matched_exactly() {
        let spec = PolePlacementSpec::default();
        let s = sc(9.5, 0.95, 10.0);
        let lp = build_pole_placement_lp(&[(1, &s)], &spec).unwrap();
        assert_eq!(lp.rows.len(), 8);
        let d = PolePlacement::new(spec.clone()).solve(&[(1, &s)]).unwrap();
        let c = ControllerDecision::from_decision(&d).unwrap();
        // back substitution
        let (a1, a2) = pendulum_plant_coeffs(&s, GRAVITY).unwrap();
        let g1 = 8.0 - a1;
        let g2 = 32.0 - a2 - a1 * g1;
        let f1 = 48.0 - a1 * g2 - a2 * g1;
        let f2 = 36.0 - a2 * g2;
        for (a, b) in c.controller().iter().zip(&[f1, f2, g1, g2]) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(c.h.iter().all(|h| h.abs() < 1e-9));
    }

    #[test]
    fn sampler_ranges_and_determinism() {
        let a = sample_pendulum_scenarios(500, 3).unwrap();
        assert_eq!(a, sample_pendulum_scenarios(500, 3).unwrap());
        for s in &a {
            assert!((9.0..=10.0).contains(&s.mass));
            assert!((0.9..=1.0).contains(&s.length));
            assert!(s.mass <= s.alpha && s.alpha <= 1.1 * s.mass);
        }
    }
}
