//! Small dense linear solvers: exact Gaussian elimination over the
//! rationals, and a floating-point least-squares solve used only for
//! heuristic fitting (results are always re-verified exactly downstream).

use num_traits::Zero;

use crate::poly::Rat;

/// Solve `A x = b` exactly. Returns `None` when `A` is singular.
pub fn solve_rational(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = a.len();
    assert!(a.iter().all(|row| row.len() == n) && b.len() == n);
    let mut m: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for entry in m[col].iter_mut() {
            *entry = &*entry / &p;
        }
        for row in 0..n {
            if row != col && !m[row][col].is_zero() {
                let factor = m[row][col].clone();
                for k in col..=n {
                    let delta = &factor * &m[col][k];
                    m[row][k] = &m[row][k] - delta;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

/// Least-squares solution of an overdetermined `A x ~ b` via the normal
/// equations. Returns `None` on a (numerically) singular system.
pub fn least_squares_f64(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let rows = a.len();
    if rows == 0 {
        return None;
    }
    let cols = a[0].len();
    assert!(a.iter().all(|r| r.len() == cols) && b.len() == rows);
    // A^T A and A^T b
    let mut ata = vec![vec![0.0f64; cols]; cols];
    let mut atb = vec![0.0f64; cols];
    for r in 0..rows {
        for i in 0..cols {
            atb[i] += a[r][i] * b[r];
            for j in 0..cols {
                ata[i][j] += a[r][i] * a[r][j];
            }
        }
    }
    solve_f64(&mut ata, &mut atb)
}

fn solve_f64(m: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| {
            m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap()
        })?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        rhs[col] /= p;
        for row in 0..n {
            if row != col {
                let f = m[row][col];
                if f != 0.0 {
                    for k in col..n {
                        let delta = f * m[col][k];
                        m[row][k] -= delta;
                    }
                    rhs[row] -= f * rhs[col];
                }
            }
        }
    }
    Some(rhs.to_vec())
}

/// Round a float to a nearby rational by continued fractions, with the
/// denominator capped.
pub fn rationalize(x: f64, max_denominator: u64) -> Rat {
    use num_bigint::BigInt;
    if !x.is_finite() {
        return Rat::zero();
    }
    let negative = x < 0.0;
    let mut v = x.abs();
    // convergents p/q of the continued fraction of |x|
    let (mut p0, mut q0, mut p1, mut q1) = (1i128, 0i128, v.floor() as i128, 1i128);
    v -= v.floor();
    while v > 1e-12 {
        v = 1.0 / v;
        let a = v.floor() as i128;
        let p2 = a * p1 + p0;
        let q2 = a * q1 + q0;
        if q2 > max_denominator as i128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        v -= v.floor();
    }
    let mut r = Rat::new(BigInt::from(p1), BigInt::from(q1));
    if negative {
        r = -r;
    }
    r
}
