//! Dormand–Prince 5(4) with a state-dependent step cap and an admissibility
//! check (steps that leave the open chamber are rejected and retried).

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct DopriOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for DopriOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-12,
            h_min: 1e-15,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub min_cap: f64,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Right-hand side evaluation that may fail on singular states.
pub trait Rhs {
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

impl<F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>> Rhs for F {
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        self(t, y, dy)
    }
}

pub struct Dopri {
    opts: DopriOptions,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    ynew: Vec<f64>,
    h: f64,
    pub stats: StepStats,
}

impl Dopri {
    pub fn new(dim: usize, opts: DopriOptions) -> Self {
        Self {
            opts,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            ynew: vec![0.0; dim],
            h: 0.0,
            stats: StepStats {
                min_cap: f64::INFINITY,
                ..Default::default()
            },
        }
    }

    /// Advances `y` from `t0` to `t1`. `cap(y)` bounds the next step and
    /// `admissible(y)` must hold for every accepted state.
    pub fn integrate<R, C, A>(
        &mut self,
        rhs: &mut R,
        t0: f64,
        y: &mut [f64],
        t1: f64,
        cap: C,
        admissible: A,
    ) -> Result<()>
    where
        R: Rhs,
        C: Fn(&[f64]) -> f64,
        A: Fn(&[f64]) -> bool,
    {
        let mut t = t0;
        if t1 <= t0 {
            return Ok(());
        }
        rhs.eval(t, y, &mut self.k[0])?;
        if self.h <= 0.0 {
            self.h = (t1 - t0).min(1e-3);
        }
        let mut steps = 0usize;
        while t < t1 {
            steps += 1;
            if steps > self.opts.max_steps {
                return Err(self.underflow(t, self.h, cap(y)));
            }
            let step_cap = cap(y);
            self.stats.min_cap = self.stats.min_cap.min(step_cap);
            let remaining = t1 - t;
            let mut h = self.h.min(step_cap).min(remaining);
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            // a tiny step forced by the gap cap is legitimate; only an
            // error-driven collapse counts as underflow
            if h < self.opts.h_min * (t.abs() + step_cap.min(1.0)) && !last {
                return Err(self.underflow(t, h, step_cap));
            }
            match self.attempt(rhs, t, y, h) {
                Ok(err) if err <= 1.0 && admissible(&self.ynew) => {
                    t = if last { t1 } else { t + h };
                    y.copy_from_slice(&self.ynew);
                    // FSAL: stage 7 is the derivative at the new point
                    let (first, rest) = self.k.split_at_mut(1);
                    first[0].copy_from_slice(&rest[5]);
                    self.stats.accepted += 1;
                    let fac = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    // a capped or truncated step must not shrink the controller
                    let proposal = h * fac;
                    self.h = if h < self.h {
                        self.h.max(proposal)
                    } else {
                        proposal
                    };
                }
                Ok(err) => {
                    self.stats.rejected += 1;
                    let fac = if err.is_finite() && err > 1.0 {
                        (0.9 * err.powf(-0.25)).clamp(0.1, 0.5)
                    } else {
                        0.25
                    };
                    self.h = h * fac;
                }
                Err(Error::SingularConfiguration(_)) => {
                    self.stats.rejected += 1;
                    self.h = h * 0.25;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }

    fn underflow(&self, t: f64, step: f64, gap_cap: f64) -> Error {
        Error::StepUnderflow {
            t,
            step,
            min_gap: gap_cap,
            accepted: self.stats.accepted,
            rejected: self.stats.rejected,
        }
    }

    fn attempt<R: Rhs>(&mut self, rhs: &mut R, t: f64, y: &[f64], h: f64) -> Result<f64> {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        rhs.eval(t + C2 * h, tmp, k2)?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs.eval(t + C3 * h, tmp, k3)?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs.eval(t + C4 * h, tmp, k4)?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs.eval(t + C5 * h, tmp, k5)?;
        for i in 0..n {
            tmp[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs.eval(t + h, tmp, k6)?;
        let ynew = &mut self.ynew;
        for i in 0..n {
            ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        rhs.eval(t + h, ynew, k7)?;
        let mut err = 0.0f64;
        for i in 0..n {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.opts.atol + self.opts.rtol * y[i].abs().max(ynew[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            return Ok(f64::INFINITY);
        }
        Ok(err)
    }
}
