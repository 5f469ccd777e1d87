use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::dyson::dyson_terms;
use super::series::{Diagnostics, ExpansionSeries, Picture};
use super::steps::{fm_step, ld_step, magnus_step, qa_step, rm_step, StepReport};
use super::system::SystemSpec;
use super::{ExpandOptions, Method};
use crate::error::{Error, Result};
use crate::exp_poly::ExpPolyMatrix;
use crate::linalg::{eig, BernoulliTable, ComplexMatrix, EigDecomposition};

/// Largest supported truncation order.
pub const MAX_ORDER: usize = BernoulliTable::MAX_INDEX;

/// `W_n^(k)`, `G_n`, `V_n` and the order-`n` right-hand sides of the recursion.
struct RecursionWorkspace {
    bernoulli: BernoulliTable,
    /// `w[n - 1][k]` holds `W_n^(k)`.
    w: Vec<Vec<ExpPolyMatrix>>,
}

impl RecursionWorkspace {
    fn new(order: usize) -> Self {
        RecursionWorkspace {
            bernoulli: BernoulliTable::new(order),
            w: Vec::with_capacity(order),
        }
    }

    /// Builds `W_n^(k)` for `k = 1..n-1` and returns `G_n`.
    #[allow(clippy::needless_range_loop)]
    fn ladder(&mut self, n: usize, omegas: &[ExpPolyMatrix], zero: &ExpPolyMatrix) -> Result<ExpPolyMatrix> {
        let mut row = vec![zero.clone(); n];
        let mut g = zero.clone();
        for k in 1..n {
            let mut acc = zero.clone();
            for m in 1..=n - k {
                let prev = &self.w[n - m - 1][k - 1];
                if prev.is_empty() || omegas[m - 1].is_empty() {
                    continue;
                }
                acc = acc.add(&omegas[m - 1].commutator(prev)?)?;
            }
            let b = self.bernoulli.over_factorial(k);
            if b != 0.0 && !acc.is_empty() {
                g = ExpPolyMatrix::linear_combination(Complex64::new(1.0, 0.0), &g, Complex64::new(b, 0.0), &acc)?;
            }
            row[k] = acc;
        }
        self.w.push(row);
        Ok(g)
    }

    fn set_base(&mut self, n: usize, w0: ExpPolyMatrix) {
        self.w[n - 1][0] = w0;
    }
}

fn merge_report(diag: &mut Diagnostics, report: &StepReport, n: usize) {
    if let Some(m) = report.resonance_margin {
        diag.resonance_margin = Some(diag.resonance_margin.map_or(m, |x| x.min(m)));
    }
    if let Some(d) = report.min_divisor {
        diag.min_divisor = Some(diag.min_divisor.map_or(d, |x| x.min(d)));
    }
    if report.secular {
        diag.secular_orders.push(n);
    }
}

fn well_conditioned_eig(a0: &ComplexMatrix) -> Result<EigDecomposition> {
    eig(a0)?.require_well_conditioned()
}

/// Runs the expansion to order `order` with default options.
pub fn expand(sys: &SystemSpec, method: Method, order: usize) -> Result<ExpansionSeries> {
    expand_with(sys, method, order, &ExpandOptions::default())
}

/// Runs the recursion
///
/// ```text
/// W_n^(0) = A_n - F_n,  W_n^(k) = sum_{m=1}^{n-k} [Omega_m, W_{n-m}^(k-1)]
/// G_n = sum_{k=1}^{n-1} B_k/k! W_n^(k),  V_n = sum_{k=1}^{n-1} [Omega_k, F_{n-k}]
/// Omega_n' + [Omega_n, A0] = A_n + G_n - V_n - F_n
/// ```
///
/// and lets `method` choose `F_n`. Magnus and Floquet–Magnus with `A0 != 0` are run in the
/// interaction picture; the series records this for reassembly.
pub fn expand_with(
    sys: &SystemSpec,
    method: Method,
    order: usize,
    opts: &ExpandOptions,
) -> Result<ExpansionSeries> {
    if order == 0 {
        return Err(Error::invalid("expansion order must be at least 1"));
    }
    if order > MAX_ORDER {
        return Err(Error::InvalidInput(alloc::format!(
            "expansion order {order} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    let dim = sys.dim();
    let dio = opts.diophantine.unwrap_or_else(|| sys.basis().diophantine());

    if method == Method::StandardPerturbation {
        let d = dyson_terms(sys, order)?;
        let diagnostics = Diagnostics {
            term_counts: d.p.iter().map(|p| p.len()).collect(),
            ..Diagnostics::default()
        };
        return Ok(ExpansionSeries {
            method,
            order,
            picture: Picture::Direct,
            skew_hermitian: sys.is_skew_hermitian(),
            a0: sys.a0().clone(),
            omegas: d.p,
            f_terms: vec![ExpPolyMatrix::constant(sys.a0().clone(), sys.basis().clone())],
            generators: Vec::new(),
            particular: Vec::new(),
            dyson: d.g,
            diagnostics,
        });
    }

    let lift = matches!(method, Method::Magnus | Method::FloquetMagnus) && !sys.a0().is_zero();
    let (a0, picture, terms) = if lift {
        let e = well_conditioned_eig(sys.a0())?;
        let lifted = sys
            .terms()
            .iter()
            .map(|a| a.conjugate_exp(&e, 1))
            .collect::<Result<Vec<_>>>()?;
        (
            ComplexMatrix::zeros(dim),
            Picture::Interaction { a0: sys.a0().clone() },
            lifted,
        )
    } else {
        (sys.a0().clone(), Picture::Direct, sys.terms().to_vec())
    };
    let basis = terms
        .iter()
        .map(|t| t.basis().clone())
        .max_by_key(|b| b.rank())
        .unwrap_or_else(|| sys.basis().clone());
    let zero = ExpPolyMatrix::zero(dim, basis.clone());
    let eig_w = match method {
        Method::RemovePerturbation | Method::LieDeprit | Method::QuantumAveraging => {
            Some(well_conditioned_eig(&a0)?)
        }
        _ => None,
    };

    let mut ws = RecursionWorkspace::new(order);
    let mut omegas: Vec<ExpPolyMatrix> = Vec::with_capacity(order);
    let mut f_terms = vec![ExpPolyMatrix::constant(a0.clone(), basis.clone())];
    let mut generators = Vec::with_capacity(order);
    let mut particular = Vec::new();
    let mut diagnostics = Diagnostics::default();

    for n in 1..=order {
        let mut run = || -> Result<()> {
            let a_n = terms.get(n - 1).cloned().unwrap_or_else(|| zero.clone());
            let g = ws.ladder(n, &omegas, &zero)?;
            let mut v = zero.clone();
            for k in 1..n {
                let f = &f_terms[n - k];
                if !f.is_empty() && !omegas[k - 1].is_empty() {
                    v = v.add(&omegas[k - 1].commutator(f)?)?;
                }
            }
            let rhs = a_n.add(&g)?.sub(&v)?;
            let basis = rhs.basis().clone();
            let eig_w = || eig_w.as_ref().expect("eigendecomposition computed");
            let (f_n, omega_n) = match method {
                Method::Magnus => {
                    let (f, om) = magnus_step(&rhs);
                    (ExpPolyMatrix::constant(f, basis), om)
                }
                Method::FloquetMagnus => {
                    let (f, om) = fm_step(&rhs)?;
                    (ExpPolyMatrix::constant(f, basis), om)
                }
                Method::RemovePerturbation => (ExpPolyMatrix::zero(dim, basis), rm_step(&rhs, eig_w())?),
                Method::LieDeprit => {
                    let (f, om, report) = ld_step(&rhs, eig_w(), &dio, opts.resonance)?;
                    merge_report(&mut diagnostics, &report, n);
                    (ExpPolyMatrix::constant(f, basis), om)
                }
                Method::QuantumAveraging => {
                    let (q, report) = qa_step(&rhs, eig_w(), &dio)?;
                    merge_report(&mut diagnostics, &report, n);
                    particular.push(q.particular);
                    (q.f, q.omega)
                }
                Method::StandardPerturbation => unreachable!("handled above"),
            };
            ws.set_base(n, a_n.sub(&f_n)?);
            diagnostics.term_counts.push(omega_n.len());
            omegas.push(omega_n);
            f_terms.push(f_n);
            generators.push(rhs);
            Ok(())
        };
        run().map_err(|e| e.at_order(n))?;
    }

    Ok(ExpansionSeries {
        method,
        order,
        picture,
        skew_hermitian: sys.is_skew_hermitian(),
        a0,
        omegas,
        f_terms,
        generators,
        particular,
        dyson: Vec::new(),
        diagnostics,
    })
}
