//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues with unit-norm eigenvectors (columns of `vectors`).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    pub vectors: DMatrix<Complex64>,
    /// 2-norm condition number of `vectors`.
    pub cond: f64,
}

const CLUSTER_TOL: f64 = 1e-7;
const NULLSPACE_TOL: f64 = 1e-6;

pub fn to_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Largest over smallest singular value.
pub fn cond2<T: nalgebra::ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Full eigendecomposition of a real square matrix.
///
/// Eigenvalues come from the real Schur form; eigenvectors are right singular
/// vectors of `A - μI` for each eigenvalue cluster, which handles semisimple
/// repeated eigenvalues. Defective clusters are reported as `DefectiveMatrix`.
pub fn eig(a: &DMatrix<f64>) -> Result<EigenDecomposition> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::WrongShape(format!("matrix is {}x{}", a.nrows(), a.ncols())));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::DomainError("matrix has non-finite entries".into()));
    }
    let raw: Vec<Complex64> = a.clone().complex_eigenvalues().iter().cloned().collect();
    let scale = a.norm().max(1.0);

    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    let mut assigned = vec![false; n];
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let mut members = vec![i];
        assigned[i] = true;
        for j in i + 1..n {
            if !assigned[j] && (raw[j] - raw[i]).norm() < CLUSTER_TOL * scale {
                members.push(j);
                assigned[j] = true;
            }
        }
        let mean = members.iter().map(|&k| raw[k]).sum::<Complex64>() / members.len() as f64;
        clusters.push((mean, members.len()));
    }

    let ac = to_complex(a);
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    let mut col = 0;
    for (mu, mult) in clusters {
        let shifted = &ac - DMatrix::<Complex64>::identity(n, n) * mu;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
        for &k in idx.iter().take(mult) {
            if svd.singular_values[k] > NULLSPACE_TOL * scale {
                return Err(Error::DefectiveMatrix { cond: f64::INFINITY });
            }
            let v: DVector<Complex64> = v_t.row(k).transpose().map(|c| c.conj());
            let v = normalize_phase(v);
            vectors.set_column(col, &v);
            values.push(mu);
            col += 1;
        }
    }
    let cond = cond2(&vectors);
    Ok(EigenDecomposition { values, vectors, cond })
}

/// Unit-normalize and rotate so the largest-modulus entry is real positive.
fn normalize_phase(v: DVector<Complex64>) -> DVector<Complex64> {
    let (imax, _) = v
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, c)| if c.norm() > acc.1 + 1e-12 { (i, c.norm()) } else { acc });
    let ph = v[imax] / v[imax].norm();
    let v = v.map(|c| c / ph);
    let nrm = v.norm();
    v / Complex64::new(nrm, 0.0)
}

/// Least-squares solution of `a x ≈ b` (column by column) via
/// column-pivoted Householder QR. Requires `a` to have full column rank.
pub fn lstsq_colpiv(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    assert!(m >= n, "least squares needs at least as many rows as columns");
    let qr = a.clone().col_piv_qr();
    let mut rhs = b.clone();
    qr.q_tr_mul(&mut rhs);
    let r = qr.r();
    let r = r.view((0, 0), (n, n)).into_owned();
    let mut top = rhs.rows(0, n).into_owned();
    for c in 0..top.ncols() {
        let mut col = top.column(c).into_owned();
        r.solve_upper_triangular_mut(&mut col);
        top.set_column(c, &col);
    }
    qr.p().inv_permute_rows(&mut top);
    top
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eig_of_rotation_generator() {
        let a = DMatrix::from_row_slice(2, 2, &[-0.1, 2.0, -2.0, -0.1]);
        let e = eig(&a).unwrap();
        let ac = to_complex(&a);
        for (k, lam) in e.values.iter().enumerate() {
            let v = e.vectors.column(k);
            let res = (&ac * v - v * *lam).norm();
            assert!(res < 1e-12);
        }
        assert!(e.values.iter().any(|l| (l.im - 2.0).abs() < 1e-12));
    }

    #[test]
    fn eig_semisimple_repeated() {
        let a = DMatrix::<f64>::identity(3, 3) * 0.5;
        let e = eig(&a).unwrap();
        assert_eq!(e.values.len(), 3);
        assert_relative_eq!(e.cond, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn eig_defective_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -1.0]);
        assert!(matches!(eig(&a), Err(Error::DefectiveMatrix { .. })));
    }

    #[test]
    fn lstsq_matches_exact_solution() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let x = DMatrix::from_row_slice(2, 1, &[0.5, -2.0]);
        let b = &a * &x;
        let sol = lstsq_colpiv(&a, &b);
        assert_relative_eq!(sol, x, epsilon = 1e-12);
    }
}
