//! Root finding for the coded structural points of the parameter plane:
//! poles of the map, pre-pole parameters (virtual centers) and pre-zero
//! parameters (capture centers), plus the real-form fixed-point iteration
//! for the order-two pre-zeros.

use crate::classify::{classify, Classification, DEFAULT_BUDGET};
use crate::kernel::{eval_f, ExtendedValue};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

const MAX_NEWTON_STEPS: usize = 60;
const SEED_ITERATIONS: usize = 60;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("Newton did not reach the tolerance in {MAX_NEWTON_STEPS} steps")]
    Diverged,
    #[error("the orbit of λi hit a pole before the targeted step")]
    HitSingularity,
    #[error("the root classifies as a shell parameter, not capture")]
    WrongBasin,
    #[error("fixed-point formulas hit a vanishing denominator")]
    DomainError,
    #[error("component code is malformed: {0}")]
    BadCode(&'static str),
}

/// Kind of structural point a code names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeKind {
    PreZero,
    PrePole,
}

/// Integer itinerary naming a capture center (PreZero) or a virtual center
/// (PrePole). `base_index` selects the target on the real (k > 0) or
/// imaginary (k < 0) skeleton; `branch_indices` are the arctangent branches
/// of the intermediate inverse steps, innermost first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentCode {
    pub base_index: i32,
    pub branch_indices: Vec<i32>,
    pub kind: CodeKind,
    pub tract: Option<u8>,
}

impl ComponentCode {
    pub fn pre_zero(base_index: i32, branch_indices: &[i32]) -> Self {
        ComponentCode {
            base_index,
            branch_indices: branch_indices.to_vec(),
            kind: CodeKind::PreZero,
            tract: None,
        }
    }

    pub fn pre_pole(base_index: i32, branch_indices: &[i32]) -> Self {
        ComponentCode {
            base_index,
            branch_indices: branch_indices.to_vec(),
            kind: CodeKind::PrePole,
            tract: None,
        }
    }

    /// Order of the coded point: one base target plus one index per branch.
    pub fn order(&self) -> usize {
        1 + self.branch_indices.len()
    }
}

/// A verified root with its defining residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub root: Complex64,
    pub residual: f64,
    pub iterations: usize,
    pub seed: Complex64,
}

/// s_j = √((2j+1)π/2), the nonnegative real pole of tan z² with index j.
pub fn pole_value(j: usize) -> f64 {
    ((2 * j + 1) as f64 * PI / 2.0).sqrt()
}

/// The poles of every map in the family: {±s_j, ±i·s_j : 0 ≤ j ≤ max_index}.
pub fn poles(max_index: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(4 * (max_index + 1));
    for j in 0..=max_index {
        let s = pole_value(j);
        out.push(Complex64::new(s, 0.0));
        out.push(Complex64::new(-s, 0.0));
        out.push(Complex64::new(0.0, s));
        out.push(Complex64::new(0.0, -s));
    }
    out
}

/// Order-one pre-pole parameters: λ with f_λ(λi) = ∞ exactly, i.e. the
/// parameters {±s_k, ±i·s_k} for 0 ≤ k ≤ max_index.
pub fn prepole_parameters_order1(max_index: usize) -> Vec<Complex64> {
    poles(max_index)
}

/// G(λ) = f_λ^n(λi). Err(()) marks a pole strictly before step n.
fn singular_iterate(lambda: Complex64, n: usize) -> Result<ExtendedValue, ()> {
    let mut z = lambda * Complex64::i();
    for step in 0..n {
        match eval_f(lambda, z) {
            ExtendedValue::Finite(next) => z = next,
            ExtendedValue::Infinity => {
                if step + 1 == n {
                    return Ok(ExtendedValue::Infinity);
                }
                return Err(());
            }
        }
    }
    Ok(ExtendedValue::Finite(z))
}

/// Newton's method on G(λ) − target, or on 1/G(λ) when the target is ∞.
/// The derivative is a central finite difference with step 1e−7·(1+|λ|).
pub fn newton_param(
    n: usize,
    target: ExtendedValue,
    seed: Complex64,
    tol: f64,
) -> Result<SolveReport, SolveError> {
    let objective = |lam: Complex64| -> Result<Complex64, SolveError> {
        match (singular_iterate(lam, n), target) {
            (Err(()), _) => Err(SolveError::HitSingularity),
            (Ok(ExtendedValue::Finite(v)), ExtendedValue::Finite(t)) => Ok(v - t),
            (Ok(ExtendedValue::Infinity), ExtendedValue::Finite(_)) => {
                Err(SolveError::HitSingularity)
            }
            (Ok(ExtendedValue::Finite(v)), ExtendedValue::Infinity) => {
                Ok(Complex64::new(1.0, 0.0) / v)
            }
            (Ok(ExtendedValue::Infinity), ExtendedValue::Infinity) => Ok(Complex64::new(0.0, 0.0)),
        }
    };
    let mut lam = seed;
    for it in 0..MAX_NEWTON_STEPS {
        let g = objective(lam)?;
        if g.norm() < tol {
            return Ok(SolveReport {
                root: lam,
                residual: g.norm(),
                iterations: it,
                seed,
            });
        }
        let h = 1e-7 * (1.0 + lam.norm());
        let gp = objective(lam + Complex64::new(h, 0.0))?;
        let gm = objective(lam - Complex64::new(h, 0.0))?;
        let dg = (gp - gm) / (2.0 * h);
        if dg.norm_sqr() == 0.0 {
            return Err(SolveError::Diverged);
        }
        let step = g / dg;
        if !step.re.is_finite() || !step.im.is_finite() {
            return Err(SolveError::Diverged);
        }
        lam -= step;
    }
    Err(SolveError::Diverged)
}

/// One step of the real-form fixed-point iteration for f_λ(λi) = p_k:
///
///   X_{k,j} = ½·arctan(−2x·p_k / (x²+y²−p_k²)) + jπ
///   Y_k     = ½·ln( √(4x²y² + (p_k²+x²−y²)²) / (x² + (p_k+y)²) )
///
/// recombined as the square root λ_{m+1} = √(X + iY). The arctangent is
/// taken quadrant-aware so the branch stays usable for |λ| < p_k; every
/// limit is validated downstream by the forward residual of f_λ(λi) − p_k.
pub fn fixed_point_iteration_step(
    lambda_m: Complex64,
    p_k: f64,
    j: i32,
) -> Result<Complex64, SolveError> {
    let (x, y) = (lambda_m.re, lambda_m.im);
    let num = -2.0 * x * p_k;
    let den = x * x + y * y - p_k * p_k;
    if num == 0.0 && den == 0.0 {
        return Err(SolveError::DomainError);
    }
    let log_den = x * x + (p_k + y) * (p_k + y);
    if log_den == 0.0 {
        return Err(SolveError::DomainError);
    }
    let big_x = 0.5 * num.atan2(den) + j as f64 * PI;
    // Y = ½·ln(√inner / log_den) = ¼·ln(inner) − ½·ln(log_den)
    let inner = 4.0 * x * x * y * y + (p_k * p_k + x * x - y * y).powi(2);
    let big_y = 0.25 * inner.ln() - 0.5 * log_den.ln();
    let r = big_x.hypot(big_y);
    let re = ((big_x + r).max(0.0) / 2.0).sqrt();
    let im = ((r - big_x).max(0.0) / 2.0).sqrt().copysign(big_y);
    Ok(Complex64::new(re, im))
}

/// Iterate `fixed_point_iteration_step` until the forward residual of
/// f_λ(λi) = p_k settles. The literal iteration alternates between a root
/// and its conjugate (both solve the equation), so convergence is judged on
/// the two-step subsequence and on the residual itself.
pub fn fixed_point_solution(
    seed: Complex64,
    p_k: f64,
    j: i32,
    iterations: usize,
) -> Result<Complex64, SolveError> {
    let mut lam = seed;
    for _ in 0..iterations {
        lam = fixed_point_iteration_step(lam, p_k, j)?;
    }
    Ok(lam)
}

/// Residual of the order-n pre-zero/pre-target equation f_λ^n(λi) = target.
pub fn forward_residual(lambda: Complex64, n: usize, target: Complex64) -> f64 {
    match singular_iterate(lambda, n) {
        Ok(ExtendedValue::Finite(v)) => (v - target).norm(),
        _ => f64::INFINITY,
    }
}

/// The b₁ skeleton: target of a base index, √(kπ) on the real axis for
/// k > 0 and i·√(|k|π) on the imaginary axis for k < 0.
fn pre_zero_target(k: i32) -> Result<Complex64, SolveError> {
    if k == 0 {
        return Err(SolveError::BadCode("base index must be nonzero"));
    }
    let v = ((k.unsigned_abs() as f64) * PI).sqrt();
    Ok(if k > 0 {
        Complex64::new(v, 0.0)
    } else {
        Complex64::new(0.0, v)
    })
}

/// Seed for λ with f_λ^{n}(λi) = target, built by pulling the target back
/// through the coded inverse branches and closing the λ-equation
/// λ² = Arctan(−w/λ) + jπ as a fixed-point iteration.
fn compose_seed(target: Complex64, branches: &[i32], start: Complex64) -> Complex64 {
    let mut lam = start;
    let (z_branches, lam_branch) = branches.split_at(branches.len() - 1);
    for _ in 0..SEED_ITERATIONS {
        let mut w = target;
        // z-plane pullbacks, innermost first
        for &b in z_branches {
            match crate::kernel::inverse_branch(lam, w, b, 1) {
                Ok(z) => w = z,
                Err(_) => return lam,
            }
        }
        let a = (-w / lam).atan() + Complex64::new(lam_branch[0] as f64 * PI, 0.0);
        let next = a.sqrt();
        if !next.re.is_finite() || !next.im.is_finite() || next.norm_sqr() == 0.0 {
            return lam;
        }
        lam = next;
    }
    lam
}

/// Solve the capture-center equation f_λ^p(λi) = 0 for a PreZero code of
/// order p, seeded from the pre-pole skeleton, and check the verdict.
pub fn capture_center(code: &ComponentCode) -> Result<SolveReport, SolveError> {
    if code.kind != CodeKind::PreZero {
        return Err(SolveError::BadCode("capture_center needs a PreZero code"));
    }
    let p = code.order();
    let target = pre_zero_target(code.base_index)?;
    let report = if p == 1 {
        // centers of depth one: the skeleton itself, polished by Newton
        let nudge = if code.base_index > 0 {
            Complex64::new(0.05, 0.0)
        } else {
            Complex64::new(0.0, 0.05)
        };
        let seed = target + nudge;
        newton_param(1, ExtendedValue::Finite(Complex64::new(0.0, 0.0)), seed, 1e-12)?
    } else {
        // f^{p-1}(λi) = ±√(kπ) implies f^p(λi) = 0 exactly
        let last = *code.branch_indices.last().unwrap();
        let start = Complex64::new(pole_value(last.unsigned_abs() as usize), 0.1);
        let seed = compose_seed(target, &code.branch_indices, start);
        newton_param(p - 1, ExtendedValue::Finite(target), seed, 1e-12)?
    };
    match classify(report.root, DEFAULT_BUDGET) {
        Classification::CaptureDepth(_) => Ok(report),
        Classification::Shell { .. } => Err(SolveError::WrongBasin),
        Classification::Unresolved(_) => Ok(report),
    }
}

/// The coded z-plane pole: unit·s_{|k|−1}, real for k > 0, imaginary for k < 0.
fn coded_pole(k: i32) -> Result<Complex64, SolveError> {
    if k == 0 {
        return Err(SolveError::BadCode("pole index must be nonzero"));
    }
    let s = pole_value((k.unsigned_abs() - 1) as usize);
    Ok(if k > 0 {
        Complex64::new(s, 0.0)
    } else {
        Complex64::new(0.0, s)
    })
}

/// Virtual center of a period-p quadruplet: λ* with f_{λ*}^{p−1}(λ*i) = ∞.
///
/// For p = 2 the centers are the order-one pre-pole parameters in closed
/// form; for p ≥ 3 the coded pole is reached by Newton on
/// f^{p−2}(λi) = s_coded with an inverse-branch seed.
pub fn virtual_center(code: &ComponentCode, p: usize) -> Result<SolveReport, SolveError> {
    if code.kind != CodeKind::PrePole {
        return Err(SolveError::BadCode("virtual_center needs a PrePole code"));
    }
    if code.order() != p - 1 {
        return Err(SolveError::BadCode("code length must be p−1"));
    }
    if p == 2 {
        let base = coded_pole(code.base_index)?;
        let rot = match code.tract {
            None | Some(1) => Complex64::new(1.0, 0.0),
            Some(2) => Complex64::i(),
            Some(3) => Complex64::new(-1.0, 0.0),
            Some(4) => -Complex64::i(),
            Some(_) => return Err(SolveError::BadCode("tract must be 1..4")),
        };
        let root = rot * base;
        let residual = match singular_iterate(root, 1) {
            Ok(ExtendedValue::Infinity) => 0.0,
            Ok(ExtendedValue::Finite(v)) => 1.0 / v.norm(),
            Err(()) => f64::INFINITY,
        };
        return Ok(SolveReport {
            root,
            residual,
            iterations: 0,
            seed: root,
        });
    }
    let target = coded_pole(code.base_index)?;
    let last = *code.branch_indices.last().unwrap();
    let start = Complex64::new(pole_value(last.unsigned_abs() as usize), 0.1);
    let seed = compose_seed(target, &code.branch_indices, start);
    newton_param(p - 2, ExtendedValue::Finite(target), seed, 1e-10)
}
