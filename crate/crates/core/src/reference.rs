//! Adaptive Dormand–Prince 8(5,3) reference integrator for `U' = A(t) U`.
//!
//! Independent of the expansion machinery: it only evaluates `A(t)` pointwise.

#![allow(clippy::excessive_precision)]

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::expansion::{Picture, SystemSpec};
use crate::linalg::ComplexMatrix;
use crate::propagator::{check_grid, PropagationResult};
use crate::Complex64;

/// Default local tolerance (both absolute and relative).
pub const DEFAULT_TOL: f64 = 1e-12;
/// Accepted tolerance range.
pub const TOL_RANGE: (f64, f64) = (1e-14, 1e-6);

const MAX_STEPS: usize = 50_000_000;
const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;

const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

/// Work counters of one integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// States at the requested output times.
#[derive(Clone, Debug)]
pub struct Solution {
    pub states: Vec<Vec<f64>>,
    pub stats: Stats,
}

fn check_tol(tol: f64) -> Result<()> {
    if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&tol) {
        return Err(Error::InvalidInput(alloc::format!(
            "tolerance {tol:e} outside [{:e}, {:e}]",
            TOL_RANGE.0, TOL_RANGE.1
        )));
    }
    Ok(())
}

struct Stages {
    k: [Vec<f64>; 10],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
}

fn combine(out: &mut [f64], y: &[f64], h: f64, parts: &[(f64, &[f64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (c, k) in parts {
            s += c * k[i];
        }
        *o = y[i] + h * s;
    }
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns `y` at each output time.
///
/// Local error is controlled with `atol = rtol = tol` and steps are shortened to land
/// exactly on the output times, which must be non-decreasing and not before `t0`.
pub fn dop853<F>(mut f: F, t0: f64, y0: &[f64], outputs: &[f64], tol: f64) -> Result<Solution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    check_tol(tol)?;
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(Error::invalid("output times must be non-decreasing and not before t0"));
    }
    let n = y0.len();
    let mut st = Stages {
        k: core::array::from_fn(|_| vec![0.0; n]),
        tmp: vec![0.0; n],
        y_new: vec![0.0; n],
    };
    let mut stats = Stats::default();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut states = Vec::with_capacity(outputs.len());
    let sk = |a: f64, b: f64| tol + tol * a.abs().max(b.abs());

    f(t, &y, &mut st.k[0]);
    stats.evaluations += 1;
    let mut h = initial_step(&mut f, t, &y, &st.k[0], tol, &mut stats);
    let mut last_rejected = false;

    for &target in outputs {
        while t < target {
            if stats.accepted + stats.rejected >= MAX_STEPS {
                return Err(Error::NoConvergence("reference integrator step budget"));
            }
            let remaining = target - t;
            let clipped = h >= remaining;
            let step = if clipped { remaining } else { h };
            if step.abs() <= 1e-15 * t.abs().max(1.0) * 10.0 && !clipped {
                return Err(Error::StepSizeUnderflow { t });
            }
            let (err, fac11) = trial(&mut f, t, &y, step, &mut st, &sk, &mut stats);
            if !err.is_finite() {
                h = 0.1 * step;
                stats.rejected += 1;
                last_rejected = true;
                if h <= 1e-15 * t.abs().max(1.0) {
                    return Err(Error::StepSizeUnderflow { t });
                }
                continue;
            }
            if err <= 1.0 {
                stats.accepted += 1;
                let fac = (fac11 / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = step / fac;
                if last_rejected {
                    h_new = h_new.min(step);
                }
                last_rejected = false;
                t = if clipped { target } else { t + step };
                core::mem::swap(&mut y, &mut st.y_new);
                // k4 holds f at the new point after the trial
                let (k0, rest) = st.k.split_at_mut(1);
                k0[0].copy_from_slice(&rest[2]);
                // a step shortened to hit an output keeps the unclipped proposal
                h = if clipped { h.max(h_new) } else { h_new };
            } else {
                stats.rejected += 1;
                last_rejected = true;
                h = step / (fac11 / SAFE).min(1.0 / FAC_MIN);
                if h.abs() <= 1e-15 * t.abs().max(1.0) * 10.0 {
                    return Err(Error::StepSizeUnderflow { t });
                }
            }
        }
        states.push(y.clone());
    }
    Ok(Solution { states, stats })
}

fn norm(v: &[f64], scale: &[f64]) -> f64 {
    let s: f64 = v.iter().zip(scale).map(|(x, s)| (x / s) * (x / s)).sum();
    (s / v.len().max(1) as f64).sqrt()
}

fn initial_step<F>(f: &mut F, t: f64, y: &[f64], f0: &[f64], tol: f64, stats: &mut Stats) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let scale: Vec<f64> = y.iter().map(|v| tol + tol * v.abs()).collect();
    let d0 = norm(y, &scale);
    let d1 = norm(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; y.len()];
    f(t + h0, &y1, &mut f1);
    stats.evaluations += 1;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff, &scale) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    (100.0 * h0).min(h1)
}

/// One DOP853 step of size `h`; returns the scaled error and `err^(1/8)`.
///
/// On return `st.y_new` holds the proposed state and `st.k[3]` the derivative there.
fn trial<F, S>(f: &mut F, t: f64, y: &[f64], h: f64, st: &mut Stages, sk: &S, stats: &mut Stats) -> (f64, f64)
where
    F: FnMut(f64, &[f64], &mut [f64]),
    S: Fn(f64, f64) -> f64,
{
    let n = y.len();
    let [k1, k2, k3, k4, k5, k6, k7, k8, k9, k10] = &mut st.k;
    let tmp = &mut st.tmp;
    combine(tmp, y, h, &[(A21, k1)]);
    f(t + C2 * h, tmp, k2);
    combine(tmp, y, h, &[(A31, k1), (A32, k2)]);
    f(t + C3 * h, tmp, k3);
    combine(tmp, y, h, &[(A41, k1), (A43, k3)]);
    f(t + C4 * h, tmp, k4);
    combine(tmp, y, h, &[(A51, k1), (A53, k3), (A54, k4)]);
    f(t + C5 * h, tmp, k5);
    combine(tmp, y, h, &[(A61, k1), (A64, k4), (A65, k5)]);
    f(t + C6 * h, tmp, k6);
    combine(tmp, y, h, &[(A71, k1), (A74, k4), (A75, k5), (A76, k6)]);
    f(t + C7 * h, tmp, k7);
    combine(tmp, y, h, &[(A81, k1), (A84, k4), (A85, k5), (A86, k6), (A87, k7)]);
    f(t + C8 * h, tmp, k8);
    combine(tmp, y, h, &[(A91, k1), (A94, k4), (A95, k5), (A96, k6), (A97, k7), (A98, k8)]);
    f(t + C9 * h, tmp, k9);
    combine(
        tmp,
        y,
        h,
        &[(A101, k1), (A104, k4), (A105, k5), (A106, k6), (A107, k7), (A108, k8), (A109, k9)],
    );
    f(t + C10 * h, tmp, k10);
    combine(
        tmp,
        y,
        h,
        &[
            (A111, k1),
            (A114, k4),
            (A115, k5),
            (A116, k6),
            (A117, k7),
            (A118, k8),
            (A119, k9),
            (A1110, k10),
        ],
    );
    f(t + C11 * h, tmp, k2);
    combine(
        tmp,
        y,
        h,
        &[
            (A121, k1),
            (A124, k4),
            (A125, k5),
            (A126, k6),
            (A127, k7),
            (A128, k8),
            (A129, k9),
            (A1210, k10),
            (A1211, k2),
        ],
    );
    f(t + h, tmp, k3);
    stats.evaluations += 11;

    // k4 <- increment direction, y_new <- y + h k4
    for i in 0..n {
        k4[i] = B1 * k1[i]
            + B6 * k6[i]
            + B7 * k7[i]
            + B8 * k8[i]
            + B9 * k9[i]
            + B10 * k10[i]
            + B11 * k2[i]
            + B12 * k3[i];
        st.y_new[i] = y[i] + h * k4[i];
    }

    let mut err = 0.0;
    let mut err2 = 0.0;
    for i in 0..n {
        let s = sk(y[i], st.y_new[i]);
        let e2 = k4[i] - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k3[i];
        err2 += (e2 / s) * (e2 / s);
        let e = ER1 * k1[i]
            + ER6 * k6[i]
            + ER7 * k7[i]
            + ER8 * k8[i]
            + ER9 * k9[i]
            + ER10 * k10[i]
            + ER11 * k2[i]
            + ER12 * k3[i];
        err += (e / s) * (e / s);
    }
    let mut deno = err + 0.01 * err2;
    if deno <= 0.0 {
        deno = 1.0;
    }
    let err = h.abs() * err * (1.0 / (n as f64 * deno)).sqrt();
    // derivative at the new point, reused as k1 of the next step
    f(t + h, &st.y_new, k4);
    stats.evaluations += 1;
    (err, err.powf(1.0 / 8.0))
}

fn pack(u: &ComplexMatrix) -> Vec<f64> {
    u.as_slice().iter().flat_map(|z| [z.re, z.im]).collect()
}

fn unpack(dim: usize, y: &[f64]) -> Result<ComplexMatrix> {
    let data = y.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
    ComplexMatrix::from_row_major(dim, data)
}

/// Propagator `U(t)` of `U' = A(t) U`, `U(0) = I`, integrated from `0` with an arbitrary
/// pointwise generator `a`.
pub fn reference_propagate_fn<A>(
    a: A,
    dim: usize,
    times: &[f64],
    tol: f64,
    observable: (usize, usize),
) -> Result<PropagationResult>
where
    A: Fn(f64) -> ComplexMatrix,
{
    check_grid(times)?;
    if times[0] < 0.0 {
        return Err(Error::invalid("reference grid must start at t >= 0"));
    }
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let m = a(t);
        let m = m.as_slice();
        for r in 0..dim {
            for c in 0..dim {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    let u = Complex64::new(y[2 * (k * dim + c)], y[2 * (k * dim + c) + 1]);
                    s += m[r * dim + k] * u;
                }
                dy[2 * (r * dim + c)] = s.re;
                dy[2 * (r * dim + c) + 1] = s.im;
            }
        }
    };
    let sol = dop853(rhs, 0.0, &pack(&ComplexMatrix::identity(dim)), times, tol)?;
    let samples = sol
        .states
        .iter()
        .map(|y| unpack(dim, y))
        .collect::<Result<Vec<_>>>()?;
    if samples.iter().any(|u| !u.is_finite()) {
        return Err(Error::NonFinite("reference integrator"));
    }
    PropagationResult::from_samples(times.to_vec(), samples, observable, Picture::Direct)
}

/// Reference propagator of `sys` at its own `epsilon`.
pub fn reference_propagate(
    sys: &SystemSpec,
    times: &[f64],
    tol: f64,
    observable: (usize, usize),
) -> Result<PropagationResult> {
    reference_propagate_fn(|t| sys.eval(t), sys.dim(), times, tol, observable)
}

fn same_grid(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a
            .iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0))
}

/// `(t, |P_ij^approx(t) - P_ij^ref(t)|)` on a shared grid, `(i, j)` 0-based.
pub fn error_curve(
    approx: &PropagationResult,
    reference: &PropagationResult,
    observable: (usize, usize),
) -> Result<Vec<(f64, f64)>> {
    if !same_grid(&approx.times, &reference.times) {
        return Err(Error::GridMismatch);
    }
    let (i, j) = observable;
    approx
        .times
        .iter()
        .zip(approx.samples.iter().zip(&reference.samples))
        .map(|(&t, (ua, ur))| {
            let pa = crate::propagator::transition_probability(ua, i, j)?;
            let pr = crate::propagator::transition_probability(ur, i, j)?;
            Ok((t, (pa - pr).abs()))
        })
        .collect()
}

/// Largest error of an [`error_curve`].
pub fn max_error(curve: &[(f64, f64)]) -> f64 {
    curve.iter().map(|&(_, e)| e).fold(0.0, f64::max)
}
