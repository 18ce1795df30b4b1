//! Order-by-order extraction of ep-expansion coefficients from an
//! ep-dependent recurrence.
//!
//! Writing the unknown as F = sum_j F_j ep^j, the lowest surviving order
//! of the equation constrains F_lambda through the ep^0 part of the
//! operator alone.  That constraint is an exact recurrence over the
//! nested-sum class; once solved, the found coefficient is pushed back
//! through the full operator, the right-hand side is updated, and the
//! next order repeats the step.

use crate::algebra::{Polynomial, Var};
use crate::constants::ConstExpr;
use crate::operators::RecOperator;
use crate::series::EpsSeries;
use crate::solver::{solve_rec, SolveError};
use crate::sums::SumExpression;

#[derive(Debug, thiserror::Error)]
pub enum EpsError {
    #[error("inputs truncated too early: {0}")]
    Truncation(String),
    #[error("need {0} initial-value series, got {1}")]
    InitialValues(usize, usize),
    #[error("initial value at {0} has a non-constant coefficient at order {1}")]
    BadInitial(i64, i64),
    #[error("order {order} is not solvable; constraint: {constraint}")]
    Order {
        order: i64,
        constraint: String,
        #[source]
        source: SolveError,
        /// Coefficients found before the failing order.
        partial: Box<EpsSeries>,
    },
}

/// Divides the equation by the highest common power of ep and settles
/// the starting order of the expansion from the data: the minimum over
/// the (divided) right-hand side and the initial-value series.
pub fn normalize_leading(
    op: &RecOperator,
    rhs: &EpsSeries,
    ivs: &[EpsSeries],
) -> (RecOperator, EpsSeries, i64) {
    let s = op.eps_valuation();
    let (op, rhs) = if s == 0 {
        (op.clone(), rhs.clone())
    } else {
        let ep_pow = Polynomial::var(Var::Ep).pow(s);
        let mut coeffs = vec![Polynomial::zero(); op.offset() as usize];
        for i in 0..=op.order() {
            coeffs.push(op.coeff(i).divide_exact(&ep_pow).expect("valuation divides"));
        }
        (RecOperator::new_raw(coeffs, op.var()), rhs.div_eps(s))
    };
    let lam = std::iter::once(&rhs)
        .chain(ivs.iter())
        .filter_map(EpsSeries::effective_start)
        .min()
        .unwrap_or(0);
    (op, rhs, lam)
}

/// Running state of the bootstrap: the normalized equation, the orders
/// already solved, and the right-hand side with their images removed.
pub struct EpsBootstrapState {
    pub op: RecOperator,
    pub rhs: EpsSeries,
    pub found: Vec<(i64, SumExpression)>,
    pub remaining_rhs: EpsSeries,
    pub iv_series: Vec<EpsSeries>,
    op_zero: RecOperator,
    next_order: i64,
}

impl EpsBootstrapState {
    pub fn new(
        op: &RecOperator,
        rhs: &EpsSeries,
        ivs: &[EpsSeries],
    ) -> Result<EpsBootstrapState, EpsError> {
        let d = op.order();
        if ivs.len() != d {
            return Err(EpsError::InitialValues(d, ivs.len()));
        }
        let (op, rhs, lam) = normalize_leading(op, rhs, ivs);
        let mut zero_coeffs = vec![Polynomial::zero(); op.offset() as usize];
        zero_coeffs.extend(op.specialize_eps(0));
        let op_zero = RecOperator::new_raw(zero_coeffs, op.var());
        Ok(EpsBootstrapState {
            remaining_rhs: rhs.clone(),
            rhs,
            found: Vec::new(),
            iv_series: ivs.to_vec(),
            op_zero,
            next_order: lam,
            op,
        })
    }

    pub fn next_order(&self) -> i64 {
        self.next_order
    }

    /// The ep^0-constraint operator.
    pub fn constraint_op(&self) -> &RecOperator {
        &self.op_zero
    }

    /// Solves one order and advances.  The constraint right-hand side is
    /// the current coefficient of the remaining inhomogeneous part; the
    /// initial values are the matching coefficients of the value series.
    pub fn step(&mut self) -> Result<SumExpression, EpsError> {
        let var = self.op.var();
        let j = self.next_order;
        let rhs_j = self
            .remaining_rhs
            .coeff(j)
            .unwrap_or_else(|| SumExpression::zero(var));
        let mut ivs_j: Vec<(i64, ConstExpr)> = Vec::with_capacity(self.iv_series.len());
        for (k, iv) in self.iv_series.iter().enumerate() {
            let n = k as i64 + 1;
            let value = match iv.coeff(j) {
                Some(c) => c
                    .as_const_expr()
                    .ok_or(EpsError::BadInitial(n, j))?,
                None => ConstExpr::zero(),
            };
            ivs_j.push((n, value));
        }
        let f_j = solve_rec(&self.op_zero, &rhs_j, &ivs_j).map_err(|e| EpsError::Order {
            order: j,
            constraint: format!("{} = {}", self.op_zero, rhs_j),
            source: e,
            partial: Box::new(self.series(j)),
        })?;
        let image = self.op.apply_to_series(&EpsSeries::from_expr(f_j.clone(), j));
        self.remaining_rhs = self.remaining_rhs.sub(&image);
        debug_assert!(
            self.remaining_rhs.coeff(j).map_or(true, |c| c.is_zero()),
            "order {j} must cancel after substitution"
        );
        self.found.push((j, f_j.clone()));
        self.next_order = j + 1;
        Ok(f_j)
    }

    /// The found coefficients as a series truncated at `trunc`.
    pub fn series(&self, trunc: i64) -> EpsSeries {
        let var = self.op.var();
        let Some((lam, _)) = self.found.first() else {
            return EpsSeries::zero_truncated(trunc - 1, trunc, var);
        };
        let coeffs = self.found.iter().map(|(_, f)| f.clone()).collect();
        EpsSeries::new_truncated(*lam, coeffs, var).truncate(trunc)
    }
}

/// Expands the solution of `op(F) = rhs` through `orders` consecutive
/// ep-orders starting at the leading one.  `ivs[k]` is the expansion of
/// F(k+1), for k up to the operator order.  Inputs must be truncated
/// late enough to pin every requested order.
pub fn bootstrap_expansion(
    op: &RecOperator,
    rhs: &EpsSeries,
    ivs: &[EpsSeries],
    orders: usize,
) -> Result<EpsSeries, EpsError> {
    let mut state = EpsBootstrapState::new(op, rhs, ivs)?;
    let top = state.next_order() + orders as i64;
    state
        .rhs
        .require_through(top - 1)
        .map_err(|e| EpsError::Truncation(format!("right-hand side: {e}")))?;
    for (k, iv) in state.iv_series.iter().enumerate() {
        iv.require_through(top - 1)
            .map_err(|e| EpsError::Truncation(format!("initial value at {}: {e}", k + 1)))?;
    }
    for _ in 0..orders {
        state.step()?;
    }
    Ok(state.series(top))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qi};
    use crate::constants::FormalConstant;
    use crate::operators::rec_oracle;
    use crate::parse::{parse, to_poly, to_ratfun, to_sum_expr};
    use crate::sums::SSum;
    use num_traits::Signed;

    fn poly(s: &str) -> Polynomial {
        to_poly(&parse(s).unwrap()).unwrap()
    }

    fn rf(s: &str) -> crate::algebra::RationalFunction {
        to_ratfun(&parse(s).unwrap()).unwrap()
    }

    fn expr(s: &str) -> SumExpression {
        to_sum_expr(&parse(s).unwrap(), Var::N).unwrap()
    }

    fn op_of(coeffs: &[&str]) -> RecOperator {
        RecOperator::new(coeffs.iter().map(|s| poly(s)).collect(), Var::N)
    }

    fn s1() -> SumExpression {
        SumExpression::from_ssum(SSum::harmonic(&[1], Var::N))
    }

    fn s2() -> SumExpression {
        SumExpression::from_ssum(SSum::harmonic(&[2], Var::N))
    }

    fn zeta2() -> ConstExpr {
        ConstExpr::from_symbol(FormalConstant::zeta(2))
    }

    fn const_series(start: i64, values: &[ConstExpr], trunc: i64) -> EpsSeries {
        let coeffs = values
            .iter()
            .map(|c| SumExpression::from_const_expr(Var::N, c))
            .collect();
        EpsSeries::new_truncated(start, coeffs, Var::N).truncate(trunc)
    }

    fn ce(n: i64, d: i64) -> ConstExpr {
        ConstExpr::from_q(q(n, d))
    }

    #[test]
    fn common_eps_factors_are_divided_out() {
        // raw construction: the canonical one would strip the content ep
        let op = RecOperator::new_raw(vec![poly("ep*(N+1)"), poly("-2*ep")], Var::N);
        let rhs = EpsSeries::from_expr(expr("1"), -1).truncate(2);
        let ivs = [const_series(-1, &[ce(1, 1)], 2)];
        let (op2, rhs2, lam) = normalize_leading(&op, &rhs, &ivs);
        assert!(op2.is_eps_free());
        assert_eq!(rhs2.effective_start(), Some(-2));
        assert_eq!(lam, -2);
        //normalization is idempotent
        let (op3, rhs3, lam3) = normalize_leading(&op2, &rhs2, &ivs);
        assert_eq!(op3.coeff(0), op2.coeff(0));
        assert_eq!(rhs3, rhs2);
        assert_eq!(lam3, lam);
    }

    #[test]
    fn the_starting_order_comes_from_the_data() {
        let op = op_of(&["-1", "1"]);
        let rhs = EpsSeries::from_expr(expr("1"), -2).truncate(1);
        let ivs = [const_series(-3, &[ce(1, 1)], 1)];
        let (_, _, lam) = normalize_leading(&op, &rhs, &ivs);
        assert_eq!(lam, -3);
    }

    #[test]
    fn a_single_pole_coefficient_bootstraps_to_the_harmonic_sum() {
        let op = op_of(&["-1", "1"]);
        let rhs = EpsSeries::from_expr(expr("1/(N+1)"), -1).truncate(0);
        let ivs = [const_series(-1, &[ce(1, 1)], 0)];
        let out = bootstrap_expansion(&op, &rhs, &ivs, 1).unwrap();
        assert_eq!(out.coeff(-1).unwrap(), s1());
        assert_eq!(out.trunc(), Some(0));

        let err = bootstrap_expansion(&op, &rhs, &ivs, 2).unwrap_err();
        assert!(matches!(err, EpsError::Truncation(_)));
    }

    #[test]
    fn a_homogeneous_equation_with_zero_values_stays_zero() {
        let op = op_of(&["-2", "1"]);
        let rhs = EpsSeries::zero(Var::N);
        let ivs = [EpsSeries::zero_truncated(0, 5, Var::N)];
        let out = bootstrap_expansion(&op, &rhs, &ivs, 3).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn an_unsolvable_order_reports_the_partial_expansion() {
        let op = op_of(&["-1", "1"]);
        let coeffs = vec![expr("1/(N+1)"), expr("1/(N^2+1)")];
        let rhs = EpsSeries::new_truncated(0, coeffs, Var::N);
        let ivs = [const_series(0, &[ce(1, 1), ce(0, 1)], 2)];
        let err = bootstrap_expansion(&op, &rhs, &ivs, 2).unwrap_err();
        match err {
            EpsError::Order { order, partial, .. } => {
                assert_eq!(order, 1);
                assert_eq!(partial.coeff(0).unwrap(), s1());
            }
            other => panic!("unexpected error {other}"),
        }
    }

    fn printed_second_order_instance() -> (RecOperator, EpsSeries, [EpsSeries; 2]) {
        let op = op_of(&[
            "2*(N+1)^2",
            "3*ep^2+3*ep*N+9*ep-4*N^2-12*N-8",
            "-(2*ep-N-1)*(ep+2*N+6)",
        ]);
        let rhs = const_series(
            -3,
            &[
                ConstExpr::zero(),
                ce(-16, 3),
                ce(40, 3),
                ce(68, 3).sub(&zeta2().scale(&qi(2))),
            ],
            1,
        );
        let iv1 = const_series(
            -3,
            &[
                ce(2, 3),
                ce(-11, 6),
                ce(79, 24).add(&zeta2().scale(&q(1, 4))),
            ],
            0,
        );
        let iv2 = const_series(
            -3,
            &[
                ce(8, 9),
                ce(-73, 27),
                ce(1415, 324).add(&zeta2().scale(&q(1, 3))),
            ],
            0,
        );
        (op, rhs, [iv1, iv2])
    }

    fn printed_second_order_expansion() -> [SumExpression; 3] {
        let f3 = expr("4*N/(3*(N+1))");
        let f2 = s1()
            .scale(&rf("2*(2*N+1)/(3*(N+1))"))
            .add(&expr("2*N*(2*N+3)/(3*(N+1)^2)"))
            .neg();
        let f1 = s1()
            .mul(&s1())
            .scale(&rf("(1-4*N)/(6*(N+1))"))
            .add(&expr("-N*(N^2-2)/(3*(N+1)^3)"))
            .add(&s1().scale(&rf("(3*N+2)*(4*N+5)/(3*(N+1)^2)")))
            .add(&s2().scale(&rf("(1-4*N)/(6*(N+1))")))
            .add(&expr("N/(2*(N+1))").scale_const(&zeta2()));
        [f3, f2, f1]
    }

    #[test]
    fn the_printed_eps_dependent_equation_expands_to_three_orders() {
        let (op, rhs, ivs) = printed_second_order_instance();
        let (_, _, lam) = normalize_leading(&op, &rhs, &ivs);
        assert_eq!(lam, -3);

        let out = bootstrap_expansion(&op, &rhs, &ivs, 3).unwrap();
        let [f3, f2, f1] = printed_second_order_expansion();
        assert_eq!(out.coeff(-3).unwrap(), f3);
        assert_eq!(out.coeff(-2).unwrap(), f2);
        assert_eq!(out.coeff(-1).unwrap(), f1);

        // residual certification through the requested window
        let residual = op.apply_to_series(&out).sub(&rhs);
        for j in -3..0 {
            assert!(residual.coeff(j).unwrap().is_zero(), "residual at {j}");
        }

        // order-by-order agreement with the value series
        for (k, iv) in ivs.iter().enumerate() {
            let n = k as i64 + 1;
            for j in -3..0 {
                let want = iv.coeff(j).unwrap().as_const_expr().unwrap();
                let got = out.coeff(j).unwrap().eval_exact(n).unwrap();
                assert_eq!(got, want, "order {j} at N = {n}");
            }
        }
    }

    #[test]
    fn the_truncated_expansion_tracks_the_exact_fiber_numerically() {
        let (op, rhs, ivs) = printed_second_order_instance();
        let out = bootstrap_expansion(&op, &rhs, &ivs, 3).unwrap();
        let digits = 40;
        // truncation enters through the seeds, the right-hand side and
        // the expansion itself, all at relative order eps^3; the constant
        // is the size of the first dropped coefficient, measured at most
        // 16.91 on this window, frozen with margin; two epsilons pin the
        // cubic scaling
        for eps in [q(1, 1000), q(1, 10000)] {
            let seed = vec![
                ivs[0].eval_window(1, &eps, digits).unwrap(),
                ivs[1].eval_window(2, &eps, digits).unwrap(),
            ];
            let rhs_n = rhs.clone();
            let eps_rhs = eps.clone();
            let oracle = rec_oracle(
                &op,
                Some(&eps),
                move |n| Ok(rhs_n.eval_window(n, &eps_rhs, digits).unwrap()),
                1,
                seed,
            )
            .unwrap();
            let tol = q(25, 1) * &(eps.clone() * &eps * &eps);
            for n in 1..=12 {
                let exact = oracle.value(n).unwrap();
                let approx = out.eval_window(n, &eps, digits).unwrap();
                let dev = (&exact - &approx).abs() / exact.abs();
                assert!(dev < tol, "N = {n}, eps = {eps}: relative deviation {dev}");
            }
        }
    }
}
