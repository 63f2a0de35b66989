//! Exact vectors and dense linear algebra over the integers and rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Int = BigInt;
pub type Rat = BigRational;
pub type ZVec = Vec<Int>;
pub type QVec = Vec<Rat>;

pub fn zi(x: i64) -> Int {
    Int::from(x)
}

pub fn zvec(xs: &[i64]) -> ZVec {
    xs.iter().map(|&x| Int::from(x)).collect()
}

pub fn qi(x: i64) -> Rat {
    Rat::from_integer(Int::from(x))
}

pub fn to_q(v: &[Int]) -> QVec {
    v.iter().map(|x| Rat::from_integer(x.clone())).collect()
}

/// Returns the vector when every entry is integral.
pub fn to_z(v: &[Rat]) -> Option<ZVec> {
    v.iter()
        .map(|x| if x.is_integer() { Some(x.to_integer()) } else { None })
        .collect()
}

pub fn dot(a: &[Int], b: &[Int]) -> Int {
    let mut s = Int::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

pub fn dot_q(a: &[Rat], b: &[Rat]) -> Rat {
    if a.iter().chain(b).all(|x| x.denom().is_one()) {
        let mut s = Int::zero();
        for (x, y) in a.iter().zip(b) {
            if !x.is_zero() && !y.is_zero() {
                s += x.numer() * y.numer();
            }
        }
        return Rat::from_integer(s);
    }
    let mut s = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

pub fn dot_zq(a: &[Int], b: &[Rat]) -> Rat {
    if b.iter().all(|x| x.denom().is_one()) {
        let mut s = Int::zero();
        for (x, y) in a.iter().zip(b) {
            if !x.is_zero() && !y.is_zero() {
                s += x * y.numer();
            }
        }
        return Rat::from_integer(s);
    }
    let mut s = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += y * x;
        }
    }
    s
}

pub fn add(a: &[Int], b: &[Int]) -> ZVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Int], b: &[Int]) -> ZVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(c: &Int, a: &[Int]) -> ZVec {
    a.iter().map(|x| c * x).collect()
}

pub fn neg(a: &[Int]) -> ZVec {
    a.iter().map(|x| -x).collect()
}

pub fn add_q(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_q(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_q(c: &Rat, a: &[Rat]) -> QVec {
    a.iter().map(|x| c * x).collect()
}

pub fn is_zero(a: &[Int]) -> bool {
    a.iter().all(|x| x.is_zero())
}

pub fn gcd_all(a: &[Int]) -> Int {
    let mut g = Int::zero();
    for x in a {
        if !x.is_zero() {
            g = g.gcd(x);
            if g.is_one() {
                break;
            }
        }
    }
    g
}

/// Divides out the content; the zero vector is returned unchanged.
pub fn primitive(mut v: ZVec) -> ZVec {
    let g = gcd_all(&v);
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
    v
}

/// Smallest positive integer multiple of `v`, made primitive.
pub fn primitive_q(v: &[Rat]) -> ZVec {
    let mut l = Int::one();
    for x in v {
        l = l.lcm(x.denom());
    }
    primitive(v.iter().map(|x| (x * Rat::from_integer(l.clone())).to_integer()).collect())
}

/// Common denominator form: returns `(d, w)` with `v = w / d` and `d > 0`.
pub fn homogenize(v: &[Rat]) -> (Int, ZVec) {
    let mut l = Int::one();
    for x in v {
        l = l.lcm(x.denom());
    }
    let w = v.iter().map(|x| (x * Rat::from_integer(l.clone())).to_integer()).collect();
    (l, w)
}

/// Reduced row echelon form; returns the nonzero rows and pivot columns.
pub fn rref(rows: &[QVec], ncols: usize) -> (Vec<QVec>, Vec<usize>) {
    let mut m: Vec<QVec> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..ncols {
                    if !m[r][j].is_zero() {
                        let t = &m[r][j] * &f;
                        m[i][j] -= t;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank_q(rows: &[QVec], ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

/// Rank of an integer matrix by fraction-free elimination.
pub fn rank(rows: &[ZVec]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut m: Vec<ZVec> = rows.iter().filter(|r| !is_zero(r)).cloned().collect();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let piv = m[r][c].clone();
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            let row: ZVec = (0..ncols).map(|j| &m[i][j] * &piv - &m[r][j] * &f).collect();
            m[i] = primitive(row);
        }
        r += 1;
    }
    r
}

/// Basis of the right kernel `{x : rows * x = 0}`.
pub fn nullspace(rows: &[QVec], ncols: usize) -> Vec<QVec> {
    let (m, pivots) = rref(rows, ncols);
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivots.contains(&free) {
            continue;
        }
        let mut x = vec![Rat::zero(); ncols];
        x[free] = Rat::one();
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = -m[i][free].clone();
        }
        basis.push(x);
    }
    basis
}

/// Integral primitive basis of the rational kernel.
pub fn nullspace_z(rows: &[ZVec], ncols: usize) -> Vec<ZVec> {
    let q: Vec<QVec> = rows.iter().map(|r| to_q(r)).collect();
    nullspace(&q, ncols).iter().map(|v| primitive_q(v)).collect()
}

/// Some solution of `A x = b` where `a` lists the rows of `A`.
pub fn solve(a: &[QVec], b: &[Rat], ncols: usize) -> Option<QVec> {
    let aug: Vec<QVec> = a
        .iter()
        .zip(b)
        .map(|(r, y)| {
            let mut r = r.clone();
            r.push(y.clone());
            r
        })
        .collect();
    let (m, pivots) = rref(&aug, ncols + 1);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Rat::zero(); ncols];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = m[i][ncols].clone();
    }
    Some(x)
}

pub fn det_q(m: &[QVec]) -> Rat {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rat::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let inv = a[c][c].recip();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let t = &a[c][j] * &f;
                a[i][j] -= t;
            }
        }
    }
    d
}

pub fn det(m: &[ZVec]) -> Int {
    let q: Vec<QVec> = m.iter().map(|r| to_q(r)).collect();
    det_q(&q).to_integer()
}

pub fn transpose<T: Clone>(m: &[Vec<T>], ncols: usize) -> Vec<Vec<T>> {
    (0..ncols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mat_vec(m: &[ZVec], v: &[Int]) -> ZVec {
    m.iter().map(|r| dot(r, v)).collect()
}

pub fn mat_mul(a: &[ZVec], b: &[ZVec]) -> Vec<ZVec> {
    let bt = transpose(b, b.first().map_or(0, |r| r.len()));
    a.iter().map(|r| bt.iter().map(|c| dot(r, c)).collect()).collect()
}

pub fn identity(n: usize) -> Vec<ZVec> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
        .collect()
}

/// Inverse of a square rational matrix.
pub fn inverse_q(m: &[QVec]) -> Option<Vec<QVec>> {
    let n = m.len();
    let aug: Vec<QVec> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    let (red, piv) = rref(&aug, 2 * n);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    Some(red.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn lex_cmp(a: &[Int], b: &[Int]) -> std::cmp::Ordering {
    a.cmp(b)
}

pub fn sign(x: &Int) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

pub fn fmt_rat(x: &Rat) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rat(s: &str) -> Option<Rat> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: Int = n.trim().parse().ok()?;
            let d: Int = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rat::new(n, d))
            }
        }
        None => Some(Rat::from_integer(s.trim().parse().ok()?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_divides_content() {
        assert_eq!(primitive(zvec(&[4, -6, 0])), zvec(&[2, -3, 0]));
        assert_eq!(primitive(zvec(&[0, 0])), zvec(&[0, 0]));
    }

    #[test]
    fn nullspace_of_plane() {
        let ns = nullspace_z(&[zvec(&[1, 1, 1])], 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(dot(&v, &zvec(&[1, 1, 1])).is_zero());
        }
    }

    #[test]
    fn det_and_rank() {
        let m = vec![zvec(&[2, 1]), zvec(&[1, 1])];
        assert_eq!(det(&m), zi(1));
        assert_eq!(rank(&[zvec(&[1, 2]), zvec(&[2, 4])]), 1);
    }

    #[test]
    fn parse_fraction() {
        assert_eq!(parse_rat("3/6"), Some(Rat::new(zi(1), zi(2))));
        assert_eq!(parse_rat("x"), None);
    }
}
