use num_complex::Complex64;

use super::{ArithConfig, CoverPoint, ODEPath, PathKind, PrecisionMode};
use crate::error::{Error, Result};

/// Value and first two derivatives of a solution at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JetValue {
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

impl JetValue {
    pub fn new(value: Complex64, d1: Complex64, d2: Complex64) -> Self {
        JetValue { value, d1, d2 }
    }

    pub fn real(value: f64, d1: f64, d2: f64) -> Self {
        JetValue::new(value.into(), d1.into(), d2.into())
    }

    pub fn as_array(&self) -> [Complex64; 3] {
        [self.value, self.d1, self.d2]
    }

    pub fn norm_inf(&self) -> f64 {
        self.value.norm().max(self.d1.norm()).max(self.d2.norm())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        JetValue::new(self.value * c, self.d1 * c, self.d2 * c)
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl std::ops::Add for JetValue {
    type Output = JetValue;
    fn add(self, o: JetValue) -> JetValue {
        JetValue::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl std::ops::Sub for JetValue {
    type Output = JetValue;
    fn sub(self, o: JetValue) -> JetValue {
        JetValue::new(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)
    }
}

/// A third-order linear equation written as Ψ''' = c₀Ψ + c₁Ψ' + c₂Ψ''.
pub trait JetRhs: Sync {
    fn coefficients(&self, z: &CoverPoint) -> [Complex64; 3];
}

impl<F> JetRhs for F
where
    F: Fn(&CoverPoint) -> [Complex64; 3] + Sync,
{
    fn coefficients(&self, z: &CoverPoint) -> [Complex64; 3] {
        self(z)
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

// Per-step target as a fraction of rel_tol, so that the error accumulated
// over a whole path stays within a small multiple of rel_tol.
const LOCAL_FRACTION: f64 = 0.02;
const MAX_STEPS: usize = 400_000;
const MIN_STEP: f64 = 1e-13;

fn eval_rhs<R: JetRhs + ?Sized>(rhs: &R, path: &ODEPath, u: f64, y: &[Complex64], dy: &mut [Complex64]) {
    let (p, dz) = path.point(u);
    let [c0, c1, c2] = rhs.coefficients(&p);
    for (yj, dj) in y.chunks_exact(3).zip(dy.chunks_exact_mut(3)) {
        dj[0] = dz * yj[1];
        dj[1] = dz * yj[2];
        dj[2] = dz * (c0 * yj[0] + c1 * yj[1] + c2 * yj[2]);
    }
}

fn jets_to_state(jets: &[JetValue]) -> Vec<Complex64> {
    jets.iter().flat_map(|j| j.as_array()).collect()
}

fn state_to_jets(y: &[Complex64]) -> Vec<JetValue> {
    y.chunks_exact(3).map(|c| JetValue::new(c[0], c[1], c[2])).collect()
}

/// Transport a single jet along `path`.
pub fn integrate_ode<R: JetRhs + ?Sized>(rhs: &R, init: JetValue, path: &ODEPath, cfg: &ArithConfig) -> Result<JetValue> {
    Ok(integrate_jets(rhs, &[init], path, cfg)?[0])
}

/// Transport several jets of the same equation along `path` in lockstep.
pub fn integrate_jets<R: JetRhs + ?Sized>(
    rhs: &R,
    init: &[JetValue],
    path: &ODEPath,
    cfg: &ArithConfig,
) -> Result<Vec<JetValue>> {
    let (end, _) = run(rhs, init, path, cfg, false)?;
    Ok(end)
}

/// As [`integrate_jets`], also returning the jets at every accepted step.
pub fn integrate_jets_recorded<R: JetRhs + ?Sized>(
    rhs: &R,
    init: &[JetValue],
    path: &ODEPath,
    cfg: &ArithConfig,
) -> Result<(Vec<JetValue>, Vec<(CoverPoint, Vec<JetValue>)>)> {
    run(rhs, init, path, cfg, true)
}

type Trace = Vec<(CoverPoint, Vec<JetValue>)>;

fn run<R: JetRhs + ?Sized>(
    rhs: &R,
    init: &[JetValue],
    path: &ODEPath,
    cfg: &ArithConfig,
    record: bool,
) -> Result<(Vec<JetValue>, Trace)> {
    cfg.validate()?;
    path.validate()?;
    let n = init.len() * 3;
    let mut y = jets_to_state(init);
    let mut trace = Vec::new();
    if record {
        trace.push((path.point(0.0).0, init.to_vec()));
    }
    let trivial = match path.kind {
        PathKind::CenteredArc { sweep, .. } => sweep == 0.0,
        _ => path.start == path.end,
    };
    if trivial {
        return Ok((init.to_vec(), trace));
    }
    let compensated = cfg.precision_mode == PrecisionMode::Extended;
    let mut comp = vec![Complex64::default(); n];
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); n]; 7];
    let mut tmp = vec![Complex64::default(); n];
    let mut ynew = vec![Complex64::default(); n];
    let mut incr = vec![Complex64::default(); n];
    let hmax = 1.0 / path.steps_hint.max(1) as f64;
    let mut h = hmax;
    let mut u = 0.0;
    eval_rhs(rhs, path, u, &y, &mut k[0]);
    let mut steps = 0usize;
    while u < 1.0 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::ToleranceFailure(format!("step budget exhausted at u={u}")));
        }
        if u + h > 1.0 {
            h = 1.0 - u;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = Complex64::default();
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += kj[i] * A[s][j];
                }
                tmp[i] = y[i] + acc * h;
                if s == 6 {
                    incr[i] = acc * h;
                }
            }
            eval_rhs(rhs, path, u + C[s] * h, &tmp, &mut k[s]);
            if s == 6 {
                ynew.copy_from_slice(&tmp);
            }
        }
        // k[6] was evaluated at the 5th-order solution (FSAL).
        let mut err = 0.0f64;
        for (jy, (jn, jk)) in y.chunks_exact(3).zip(ynew.chunks_exact(3).zip(0..)) {
            let scale_y = jy.iter().chain(jn.iter()).fold(0.0f64, |m, c| m.max(c.norm()));
            let sc = cfg.abs_tol + LOCAL_FRACTION * cfg.rel_tol * scale_y;
            for c in 0..3 {
                let i = jk * 3 + c;
                let mut e = Complex64::default();
                for (s, ks) in k.iter().enumerate() {
                    e += ks[i] * E[s];
                }
                err = err.max((e * h).norm() / sc);
            }
        }
        if !err.is_finite() {
            h *= 0.25;
            if h < MIN_STEP {
                return Err(Error::SingularityOnPath(format!("{:?}", path.point(u).0.to_complex())));
            }
            continue;
        }
        if err <= 1.0 {
            if compensated {
                for i in 0..n {
                    let delta = incr[i] - comp[i];
                    let t = y[i] + delta;
                    comp[i] = (t - y[i]) - delta;
                    y[i] = t;
                }
            } else {
                y.copy_from_slice(&ynew);
            }
            u += h;
            k.swap(0, 6);
            if record {
                trace.push((path.point(u.min(1.0)).0, state_to_jets(&y)));
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * fac).min(hmax);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < MIN_STEP {
                return Err(Error::SingularityOnPath(format!("{:?}", path.point(u).0.to_complex())));
            }
        }
    }
    Ok((state_to_jets(&y), trace))
}
