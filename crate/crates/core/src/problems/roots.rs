//! Roots of small monic polynomials via the companion matrix.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 8;

/// Evaluates `coeffs[0] z^n + ... + coeffs[n]` by Horner's rule.
pub fn eval_poly(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of the monic polynomial `coeffs = [1, c_1, ..., c_n]`.
///
/// Complex roots come in exactly conjugate pairs. Output is sorted by real
/// part, then imaginary part.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    if coeffs.len() < 2 {
        return Err(Error::domain("polynomial must have degree at least 1"));
    }
    if coeffs[0] != 1.0 {
        return Err(Error::domain(format!(
            "polynomial must be monic, leading coefficient is {}",
            coeffs[0]
        )));
    }
    let n = coeffs.len() - 1;
    if n > MAX_DEGREE {
        return Err(Error::domain(format!(
            "degree {n} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::domain("polynomial coefficients must be finite"));
    }

    // companion matrix in upper Hessenberg form, 1-based
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    for j in 1..=n {
        a[1][j] = -coeffs[j];
    }
    for i in 2..=n {
        a[i][i - 1] = 1.0;
    }
    balance(&mut a, n);
    let (wr, wi) = hqr(&mut a, n)?;

    let mut roots = Vec::with_capacity(n);
    for i in 1..=n {
        if wi[i] < 0.0 {
            continue;
        }
        let z = polish(coeffs, Complex64::new(wr[i], wi[i]));
        if wi[i] == 0.0 {
            roots.push(Complex64::new(z.re, 0.0));
        } else {
            roots.push(z);
            roots.push(z.conj());
        }
    }
    if roots.len() != n {
        return Err(Error::numerical(format!(
            "eigenvalue pairing produced {} roots for degree {n}",
            roots.len()
        )));
    }
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(roots)
}

/// A few Newton steps, kept only while the residual shrinks.
fn polish(coeffs: &[f64], mut z: Complex64) -> Complex64 {
    let mut best = eval_poly(coeffs, z).norm();
    for _ in 0..4 {
        let (p, dp) = eval_with_derivative(coeffs, z);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let r = eval_poly(coeffs, cand).norm();
        if !(r < best) {
            break;
        }
        z = cand;
        best = r;
    }
    z
}

fn balance(a: &mut [Vec<f64>], n: usize) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        a[i][j] *= g;
                    }
                    for j in 1..=n {
                        a[j][i] *= f;
                    }
                }
            }
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of an upper Hessenberg matrix by the Francis double-shift QR
/// iteration. Arrays are 1-based; `a` is destroyed.
#[allow(clippy::many_single_char_names)]
fn hqr(a: &mut [Vec<f64>], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    let (mut p, mut q, mut r);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
            } else {
                y = a[nn - 1][nn - 1];
                w = a[nn][nn - 1] * a[nn - 1][nn];
                if l == nn - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != 0.0 {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = 0.0;
                        wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn -= 2;
                } else {
                    if its == 60 {
                        return Err(Error::numerical("QR iteration did not converge"));
                    }
                    if its % 10 == 0 && its > 0 {
                        // exceptional shift
                        t += x;
                        for i in 1..=nn {
                            a[i][i] -= x;
                        }
                        let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let mut m = nn - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        let s0 = y - z;
                        p = (r * s0 - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s0;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a[i][i - 2] = 0.0;
                        if i != m + 2 {
                            a[i][i - 3] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = 0.0;
                            if k != nn - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nn - 1 {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k != nn - 1 {
                                    p += z * a[i][k + 2];
                                    a[i][k + 2] -= p * r;
                                }
                                a[i][k + 1] -= p * q;
                                a[i][k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }
    Ok((wr, wi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-9
    }

    #[test]
    fn reference_quartic() {
        let r = polynomial_roots(&[1.0, 8.0, 32.0, 48.0, 36.0]).unwrap();
        let expected = [
            Complex64::new(-3.0, -3.0),
            Complex64::new(-3.0, 3.0),
            Complex64::new(-1.0, -1.0),
            Complex64::new(-1.0, 1.0),
        ];
        for (a, b) in r.iter().zip(&expected) {
            assert!(close(*a, *b), "{r:?}");
        }
    }

    #[test]
    fn simple_cases() {
        let r = polynomial_roots(&[1.0, 0.0, -1.0]).unwrap();
        assert!(close(r[0], Complex64::new(-1.0, 0.0)) && close(r[1], Complex64::new(1.0, 0.0)));
        let r = polynomial_roots(&[1.0, 2.5]).unwrap();
        assert_eq!(r, vec![Complex64::new(-2.5, 0.0)]);
        assert!(polynomial_roots(&[2.0, 1.0]).is_err());
        assert!(polynomial_roots(&[1.0]).is_err());
        assert!(polynomial_roots(&[1.0; 10]).is_err());
    }

    #[test]
    fn repeated_root() {
        // (s + 2)^4
        let r = polynomial_roots(&[1.0, 8.0, 24.0, 32.0, 16.0]).unwrap();
        for z in r {
            assert!((z - Complex64::new(-2.0, 0.0)).norm() < 1e-3);
        }
    }

    #[test]
    fn random_polynomials_have_small_residuals() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        for _ in 0..500 {
            let deg = rng.random_range(1..=MAX_DEGREE);
            let mut c = vec![1.0];
            c.extend((0..deg).map(|_| rng.random_range(-50.0..50.0)));
            let roots = polynomial_roots(&c).unwrap();
            assert_eq!(roots.len(), deg);
            let scale = 1.0 + c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for z in &roots {
                let res = eval_poly(&c, *z).norm();
                let tol = 1e-8 * scale * (1.0 + z.norm()).powi(deg as i32);
                assert!(res <= tol.max(1e-8 * scale), "{c:?} {z} {res}");
                if z.im != 0.0 {
                    assert!(roots.contains(&z.conj()));
                }
            }
        }
    }
}
