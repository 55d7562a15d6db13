//! Two-pool astrocyte with calcium-induced calcium release.
//!
//! State: cytoplasmic calcium `c`, ER calcium `c_e`, IP3 mediator `S_m`
//! (driven by synaptic conductance) and glion mediator `G_m` (driven by `c`).
//!
//! ```text
//! tau_c dc/dt         = -c - k4 f(c, c_e) + (r + alpha u_rec + beta S_m)
//! eps_c tau_c dc_e/dt = f(c, c_e)
//! f(c, c_e)           = k1 c^2/(1+c^2) - c_e^2/(1+c_e^2) * c^4/(k2^4+c^4) - k3 c_e
//! tau_Sm dS_m/dt      = [1 + tanh(s_Sm (g_syn - h_Sm))] (1 - S_m) - S_m / d_Sm
//! tau_Gm dG_m/dt      = [1 + tanh(s_Gm (c - h_Gm))] (1 - G_m) - G_m / d_Gm
//! ```
//!
//! All time constants are integrated on the millisecond axis shared with the
//! neurons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AstrocyteParams {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub eps_c: f64,
    pub r: f64,
    pub tau_c: f64,
    pub tau_sm: f64,
    pub tau_gm: f64,
    pub s_sm: f64,
    pub s_gm: f64,
    pub h_sm: f64,
    pub h_gm: f64,
    pub d_sm: f64,
    pub d_gm: f64,
    /// Fast activation pathway gain (recovery variable of the output neuron).
    pub alpha: f64,
    /// Slow activation pathway gain (IP3 mediator).
    pub beta: f64,
    /// Positive feedback gain onto the output neuron.
    pub gamma: f64,
    /// Negative feedback gain onto the synapse.
    pub delta: f64,
}

impl Default for AstrocyteParams {
    fn default() -> Self {
        let eps_c = 0.04;
        Self {
            k1: 0.13,
            k2: 0.9,
            k3: 0.004,
            k4: 2.0 / eps_c,
            eps_c,
            r: 0.31,
            tau_c: 8.0,
            tau_sm: 100.0,
            tau_gm: 50.0,
            s_sm: 100.0,
            s_gm: 100.0,
            h_sm: 0.45,
            h_gm: 0.5,
            d_sm: 3.0,
            d_gm: 3.0,
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            delta: 0.0,
        }
    }
}

impl AstrocyteParams {
    pub fn with_gains(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            delta,
            ..Self::default()
        }
    }

    pub fn gains(&self) -> [f64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    /// Checks positivity and the explicit Euler step bounds.
    ///
    /// The mediator updates are affine in the mediator with coefficient
    /// `1 - dt (D + 1/d) / tau`, `D` in `[0, 2]`; keeping it non-negative
    /// confines `S_m` and `G_m` to `[0, 1]`.
    pub fn validate(&self, key: &str, dt: f64) -> Result<()> {
        let positive = [
            ("tau_c", self.tau_c),
            ("tau_sm", self.tau_sm),
            ("tau_gm", self.tau_gm),
            ("eps_c", self.eps_c),
            ("d_sm", self.d_sm),
            ("d_gm", self.d_gm),
        ];
        for (name, value) in positive {
            if !(value > 0.0) {
                return Err(Error::config(format!("{key}.{name}"), "must be > 0"));
            }
        }
        let finite = [
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
            ("k4", self.k4),
            ("r", self.r),
            ("s_sm", self.s_sm),
            ("s_gm", self.s_gm),
            ("h_sm", self.h_sm),
            ("h_gm", self.h_gm),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(Error::config(format!("{key}.{name}"), "must be finite"));
            }
        }
        for (name, tau, d) in [("tau_sm", self.tau_sm, self.d_sm), ("tau_gm", self.tau_gm, self.d_gm)] {
            if dt * (2.0 + 1.0 / d) > tau {
                return Err(Error::config(
                    "dt",
                    format!("dt={dt} too large for {key}.{name}={tau}: need dt*(2+1/d) <= tau"),
                ));
            }
        }
        if !(dt < self.tau_c) {
            return Err(Error::config(
                "dt",
                format!("dt={dt} must be smaller than {key}.tau_c={}", self.tau_c),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AstrocyteState {
    pub c: f64,
    pub c_e: f64,
    pub s_m: f64,
    pub g_m: f64,
}

/// Cytoplasm/ER exchange: uptake minus CICR release minus ER leak.
pub fn flux(c: f64, c_e: f64, p: &AstrocyteParams) -> f64 {
    let c2 = c * c;
    let c4 = c2 * c2;
    let ce2 = c_e * c_e;
    let k2_4 = p.k2.powi(4);
    p.k1 * c2 / (1.0 + c2) - (ce2 / (1.0 + ce2)) * (c4 / (k2_4 + c4)) - p.k3 * c_e
}

/// `(dc/dt, dc_e/dt)`.
pub fn calcium_derivatives(state: &AstrocyteState, p: &AstrocyteParams, u_rec: f64) -> (f64, f64) {
    let f = flux(state.c, state.c_e, p);
    let forcing = p.r + p.alpha * u_rec + p.beta * state.s_m;
    let dc = (-state.c - p.k4 * f + forcing) / p.tau_c;
    let dce = f / (p.eps_c * p.tau_c);
    (dc, dce)
}

pub fn calcium_step(state: &AstrocyteState, p: &AstrocyteParams, u_rec: f64, dt: f64) -> Result<(f64, f64)> {
    let (dc, dce) = calcium_derivatives(state, p, u_rec);
    let c = state.c + dt * dc;
    let c_e = state.c_e + dt * dce;
    if !c.is_finite() {
        return Err(Error::NonFinite {
            variable: "c".into(),
            t_ms: 0.0,
        });
    }
    if !c_e.is_finite() {
        return Err(Error::NonFinite {
            variable: "c_e".into(),
            t_ms: 0.0,
        });
    }
    Ok((c, c_e))
}

// Shared activation/relaxation law of both mediators.
fn mediator_derivative(level: f64, drive: f64, slope: f64, threshold: f64, relax: f64, tau: f64) -> f64 {
    ((1.0 + (slope * (drive - threshold)).tanh()) * (1.0 - level) - level / relax) / tau
}

pub fn sm_derivative(s_m: f64, g_syn: f64, p: &AstrocyteParams) -> f64 {
    mediator_derivative(s_m, g_syn, p.s_sm, p.h_sm, p.d_sm, p.tau_sm)
}

pub fn gm_derivative(g_m: f64, c: f64, p: &AstrocyteParams) -> f64 {
    mediator_derivative(g_m, c, p.s_gm, p.h_gm, p.d_gm, p.tau_gm)
}

pub fn sm_step(state: &AstrocyteState, g_syn: f64, p: &AstrocyteParams, dt: f64) -> f64 {
    state.s_m + dt * sm_derivative(state.s_m, g_syn, p)
}

pub fn gm_step(state: &AstrocyteState, p: &AstrocyteParams, dt: f64) -> f64 {
    state.g_m + dt * gm_derivative(state.g_m, state.c, p)
}

/// Depolarising current released onto the output neuron.
pub fn glion_current(g_m: f64, gamma: f64) -> f64 {
    gamma * g_m
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::{BigInt, BigRational, One, ToPrimitive, Zero};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    // Exact rational evaluation of the flux with default constants.
    fn exact_flux(c: &BigRational, ce: &BigRational) -> BigRational {
        let one = BigRational::one();
        let k1 = q(13, 100);
        let k2 = q(9, 10);
        let k3 = q(4, 1000);
        let c2 = c * c;
        let c4 = &c2 * &c2;
        let ce2 = ce * ce;
        let k2_4 = &k2 * &k2 * &k2 * &k2;
        &k1 * &c2 / (&one + &c2) - (&ce2 / (&one + &ce2)) * (&c4 / (k2_4 + &c4)) - k3 * ce
    }

    #[test]
    fn flux_examples() {
        let p = AstrocyteParams::default();
        assert_eq!(flux(0.0, 0.0, &p), 0.0);
        assert!((flux(0.0, 2.0, &p) - -0.008).abs() < 1e-15);
        let exact = exact_flux(&q(1, 1), &q(1, 1)).to_f64().unwrap();
        assert!((flux(1.0, 1.0, &p) - exact).abs() < 1e-12);
        assert!((exact - -0.240_914_135_6).abs() < 1e-10, "{exact}");
    }

    #[test]
    fn flux_matches_exact_oracle_on_grid() {
        let p = AstrocyteParams::default();
        for ci in 0..=20 {
            for ei in 0..=20 {
                let (c, ce) = (q(ci, 10), q(ei, 5));
                let exact = exact_flux(&c, &ce).to_f64().unwrap();
                let got = flux(ci as f64 / 10.0, ei as f64 / 5.0, &p);
                assert!((got - exact).abs() < 1e-12, "c={ci}/10 ce={ei}/5");
            }
        }
        assert!(exact_flux(&BigRational::zero(), &BigRational::zero()).is_zero());
    }

    #[test]
    fn calcium_rates_at_rest() {
        let p = AstrocyteParams::default();
        let (dc, dce) = calcium_derivatives(&AstrocyteState::default(), &p, 0.0);
        assert!((dc - 0.03875).abs() < 1e-15);
        assert_eq!(dce, 0.0);

        let p = AstrocyteParams::with_gains(0.0, 0.05, 0.0, 0.0);
        let s = AstrocyteState { s_m: 1.0, ..Default::default() };
        let (dc, _) = calcium_derivatives(&s, &p, 0.0);
        assert!((dc - 0.045).abs() < 1e-15);
    }

    #[test]
    fn calcium_equilibrium_is_stationary() {
        // c = r with c_e chosen so that f(c, c_e) = 0 would need root finding;
        // use r = 0 and the trivial root instead.
        let p = AstrocyteParams { r: 0.0, ..Default::default() };
        let s = AstrocyteState::default();
        assert_eq!(calcium_step(&s, &p, 0.0, 0.5).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn mediator_saturation() {
        let p = AstrocyteParams::default();
        assert!(sm_derivative(0.0, 0.0, &p).abs() < 1e-30);
        assert!((sm_derivative(0.0, 1.0, &p) - 0.02).abs() < 1e-15);
        assert!((sm_derivative(1.0, 0.3, &p) - -1.0 / 300.0).abs() < 1e-15);
        assert!(gm_derivative(0.0, 0.0, &p).abs() < 1e-30);
        assert!((gm_derivative(0.0, 1.0, &p) - 0.04).abs() < 1e-15);
        assert!((gm_derivative(1.0, 0.7, &p) - -1.0 / 150.0).abs() < 1e-15);
    }

    #[test]
    fn glion_current_examples() {
        assert!((glion_current(0.4, 1.5) - 0.6).abs() < 1e-15);
        assert_eq!(glion_current(0.8, 0.0), 0.0);
        assert_eq!(glion_current(0.0, 7.0), 0.0);
    }

    #[test]
    fn coupling_coefficients_under_defaults() {
        let p = AstrocyteParams::default();
        assert!((p.k4 * p.eps_c - 2.0).abs() < 1e-15);
    }

    #[test]
    fn silent_calcium_converges() {
        let p = AstrocyteParams::default();
        let mut s = AstrocyteState::default();
        let mut max_c = 0.0f64;
        for _ in 0..400_000 {
            let (c, c_e) = calcium_step(&s, &p, 0.0, 0.5).unwrap();
            s.c = c;
            s.c_e = c_e;
            max_c = max_c.max(c);
        }
        let (dc, dce) = calcium_derivatives(&s, &p, 0.0);
        assert!(dc.abs() < 1e-6 && dce.abs() < 1e-6, "dc={dc} dce={dce}");
        assert!(max_c > s.c, "transient should overshoot the steady state");
    }

    #[test]
    fn validation_rejects_unstable_steps() {
        let p = AstrocyteParams::default();
        assert!(p.validate("astrocyte", 0.5).is_ok());
        assert!(p.validate("astrocyte", 9.0).is_err());
        let bad = AstrocyteParams { tau_c: 0.0, ..p };
        assert!(bad.validate("astrocyte", 0.5).is_err());
    }

    #[test]
    fn mediators_stay_bounded_under_random_drive() {
        let p = AstrocyteParams::with_gains(0.0, 0.05, 1.5, 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut s = AstrocyteState::default();
        for _ in 0..200_000 {
            let g: f64 = rng.gen_range(0.0..3.0);
            s.s_m = sm_step(&s, g, &p, 0.5);
            s.c = rng.gen_range(0.0..2.0);
            s.g_m = gm_step(&s, &p, 0.5);
            assert!((0.0..=1.0).contains(&s.s_m), "{}", s.s_m);
            assert!((0.0..=1.0).contains(&s.g_m), "{}", s.g_m);
        }
    }

    proptest! {
        #[test]
        fn mediator_step_maps_unit_interval_into_itself(
            level in 0.0f64..=1.0,
            drive in -10.0f64..10.0,
        ) {
            let p = AstrocyteParams::default();
            let s = AstrocyteState { s_m: level, g_m: level, c: drive, c_e: 0.0 };
            let sm = sm_step(&s, drive, &p, 0.5);
            let gm = gm_step(&s, &p, 0.5);
            prop_assert!((0.0..=1.0).contains(&sm));
            prop_assert!((0.0..=1.0).contains(&gm));
        }
    }
}
