//! Exact rational phase-1 simplex for bounded feasibility.
//!
//! All structural variables live in `[0,1]`; upper bounds are added as
//! explicit rows, so the tableau only deals with nonnegativity. The
//! phase-1 objective minimizes the sum of artificial variables with
//! Bland's pivoting rule, which cannot cycle, so termination needs no
//! perturbation or tolerance machinery. A zero optimum certifies
//! feasibility and the basic solution is returned; a positive optimum
//! certifies infeasibility.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Rel;

/// A linear row `sum(coeffs) rel rhs` over structural variables.
#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub coeffs: Vec<(usize, BigRational)>,
    pub rel: Rel,
    pub rhs: BigRational,
}

/// Searches for a point in `[0,1]^n` satisfying every row.
pub(crate) fn feasible_point(n: usize, rows: &[Row]) -> Option<Vec<BigRational>> {
    let mut all_rows: Vec<Row> = rows.to_vec();
    for j in 0..n {
        all_rows.push(Row {
            coeffs: vec![(j, BigRational::one())],
            rel: Rel::Le,
            rhs: BigRational::one(),
        });
    }

    // Column layout: structural | slack/surplus | artificial | rhs.
    let m = all_rows.len();
    let mut n_slack = 0usize;
    let mut n_art = 0usize;
    for row in &all_rows {
        match row.rel {
            Rel::Le | Rel::Ge => n_slack += 1,
            Rel::Eq => {}
        }
    }
    // Artificials are needed for Ge and Eq rows and for Le rows whose
    // normalized rhs is negative (they flip to Ge).
    for row in &all_rows {
        let negative = row.rhs.is_negative();
        match (&row.rel, negative) {
            (Rel::Le, false) => {}
            _ => n_art += 1,
        }
    }
    let total = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut tableau: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (n, art_start);

    for row in &all_rows {
        let mut t = vec![BigRational::zero(); total + 1];
        for (j, c) in &row.coeffs {
            t[*j] += c;
        }
        t[total] = row.rhs.clone();
        let mut rel = row.rel;
        if t[total].is_negative() {
            for cell in t.iter_mut() {
                *cell = -std::mem::take(cell);
            }
            rel = match rel {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                Rel::Eq => Rel::Eq,
            };
        }
        match rel {
            Rel::Le => {
                t[next_slack] = BigRational::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Rel::Ge => {
                t[next_slack] = -BigRational::one();
                next_slack += 1;
                t[next_art] = BigRational::one();
                basis.push(next_art);
                next_art += 1;
            }
            Rel::Eq => {
                t[next_art] = BigRational::one();
                basis.push(next_art);
                next_art += 1;
            }
        }
        tableau.push(t);
    }
    debug_assert!(next_slack <= art_start && next_art <= total);

    // Objective row: the sum of artificials expressed over nonbasic
    // columns, i.e. the sum of all artificial-basic rows.
    let mut obj = vec![BigRational::zero(); total + 1];
    for (i, row) in tableau.iter().enumerate() {
        if basis[i] >= art_start {
            for (cell, v) in obj.iter_mut().zip(row) {
                *cell += v;
            }
        }
    }

    loop {
        // Bland: entering column is the lowest-index non-artificial column
        // with a positive objective coefficient.
        let entering = (0..art_start).find(|&j| obj[j].is_positive());
        let Some(e) = entering else { break };

        // Ratio test over rows with a positive pivot entry; ties broken by
        // the smallest basis variable index (Bland again).
        let mut leave: Option<(usize, BigRational)> = None;
        for (i, row) in tableau.iter().enumerate() {
            if row[e].is_positive() {
                let ratio = &row[total] / &row[e];
                match &leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < *lr || (ratio == *lr && basis[i] < basis[*li]) {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        // The phase-1 objective is bounded below by zero, so an improving
        // column always has a blocking row.
        let (pivot_row, _) = leave?;

        let pivot = tableau[pivot_row][e].clone();
        for cell in tableau[pivot_row].iter_mut() {
            *cell /= &pivot;
        }
        let prow = tableau[pivot_row].clone();
        for (i, row) in tableau.iter_mut().enumerate() {
            if i != pivot_row && !row[e].is_zero() {
                let f = row[e].clone();
                for (cell, p) in row.iter_mut().zip(&prow) {
                    *cell -= &f * p;
                }
            }
        }
        if !obj[e].is_zero() {
            let f = obj[e].clone();
            for (cell, p) in obj.iter_mut().zip(&prow) {
                *cell -= &f * p;
            }
        }
        basis[pivot_row] = e;
    }

    if !obj[total].is_zero() {
        return None;
    }

    let mut point = vec![BigRational::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            point[b] = tableau[i][total].clone();
        }
    }
    debug_assert!(rows.iter().all(|r| row_holds(r, &point)));
    debug_assert!(point
        .iter()
        .all(|v| !v.is_negative() && *v <= BigRational::one()));
    Some(point)
}

pub(crate) fn row_holds(row: &Row, point: &[BigRational]) -> bool {
    let lhs: BigRational = row
        .coeffs
        .iter()
        .map(|(j, c)| c * &point[*j])
        .fold(BigRational::zero(), |a, b| a + b);
    match row.rel {
        Rel::Le => lhs <= row.rhs,
        Rel::Ge => lhs >= row.rhs,
        Rel::Eq => lhs == row.rhs,
    }
}

pub(crate) fn big(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
