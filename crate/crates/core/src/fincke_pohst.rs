//! Exact ellipsoid enumeration for `f(z) = zᵀGz + 2hᵀz + c` over `z ∈ Zⁿ`.
//!
//! Every pruning decision is an integer comparison. After `k` Bareiss steps
//! on the homogenised matrix `[[G, h], [hᵀ, c]]` the trailing block equals
//! `M_k` times the Schur complement, where `M_k` is the k-th leading minor.
//! Evaluating that block on the fixed tail coordinates gives `M_k` times the
//! continuous minimum of `f` over the free leading coordinates, which is the
//! lower bound used to cut a branch.
//!
//! The common content `g` of `G` and `h` is divided out first, so the search
//! runs on `(f - c) / g` with a correspondingly rounded bound.
//!
//! Coordinates are reordered first with a greedy pivoted floating LDLᵀ
//! (smallest Schur pivot innermost). The order only affects speed.

use crate::error::{Error, Result};

#[inline]
fn ck(v: Option<i128>) -> Result<i128> {
    v.ok_or(Error::Overflow)
}

#[derive(Debug, Clone)]
pub struct Enumerator {
    n: usize,
    /// `perm[internal] = original coordinate`
    perm: Vec<usize>,
    /// `stages[k]` is the `(n+1) x (n+1)` matrix after `k` Bareiss steps.
    stages: Vec<Vec<i128>>,
    /// `minors[k] = M_k`, with `M_0 = 1`.
    minors: Vec<i128>,
    gram: Vec<i128>,
    linear: Vec<i128>,
    constant: i128,
    /// `f = scale * f0 + constant` with `f0` the polynomial searched.
    scale: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i128
}

impl Enumerator {
    /// `gram` must be positive definite (checked exactly).
    pub fn new(n: usize, gram: &[i128], linear: &[i128], constant: i128) -> Result<Self> {
        if gram.len() != n * n || linear.len() != n {
            return Err(Error::Dimension { expected: n, found: linear.len() });
        }
        let perm = pivot_order(n, gram);
        let scale = gram.iter().chain(linear).fold(0, |g, &v| gcd(g, v)).max(1);
        let w = n + 1;
        let mut hom = vec![0i128; w * w];
        for i in 0..n {
            for j in 0..n {
                hom[i * w + j] = gram[perm[i] * n + perm[j]] / scale;
            }
            hom[i * w + n] = linear[perm[i]] / scale;
            hom[n * w + i] = linear[perm[i]] / scale;
        }

        let mut stages = vec![hom];
        let mut minors = vec![1i128];
        for k in 0..n {
            let prev = &stages[k];
            let pivot = prev[k * w + k];
            if pivot <= 0 {
                return Err(Error::Definiteness("positive definite"));
            }
            let mut next = prev.clone();
            for i in k + 1..w {
                for j in k + 1..w {
                    let a = ck(pivot.checked_mul(prev[i * w + j]))?;
                    let b = ck(prev[i * w + k].checked_mul(prev[k * w + j]))?;
                    next[i * w + j] = ck(a.checked_sub(b))? / minors[k];
                }
            }
            minors.push(pivot);
            stages.push(next);
        }
        Ok(Self {
            n,
            perm,
            stages,
            minors,
            gram: gram.to_vec(),
            linear: linear.to_vec(),
            constant,
            scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Exact `f(z)` in original coordinates.
    pub fn value(&self, z: &[i128]) -> Result<i128> {
        let n = self.n;
        let mut s = self.constant;
        for i in 0..n {
            let mut row: i128 = 2 * self.linear[i];
            for j in 0..n {
                row = ck(row.checked_add(ck(self.gram[i * n + j].checked_mul(z[j]))?))?;
            }
            s = ck(s.checked_add(ck(row.checked_mul(z[i]))?))?;
        }
        Ok(s)
    }

    /// Visits every `z` with `f(z) <= bound`, in original coordinates.
    ///
    /// The visitor may return `Some(b)` to lower the bound to `b`; points with
    /// value equal to the current bound are still visited.
    pub fn search<F>(&self, bound: i128, mut visit: F) -> Result<()>
    where
        F: FnMut(&[i128], i128) -> Option<i128>,
    {
        let mut x = vec![0i128; self.n + 1];
        x[self.n] = 1;
        let mut out = vec![0i128; self.n];
        if self.n == 0 {
            if self.constant <= bound {
                visit(&out, self.constant);
            }
            return Ok(());
        }
        let (scale, constant) = (self.scale, self.constant);
        let mut reduced = ck(bound.checked_sub(constant))?.div_euclid(scale);
        // visited points satisfy f(z) <= bound, so the rescaled value fits
        let mut inner = |z: &[i128], v: i128| visit(z, v * scale + constant).map(|nb| nb.saturating_sub(constant).div_euclid(scale));
        self.level(self.n - 1, &mut x, &mut reduced, &mut out, &mut inner)
    }

    fn level<F>(
        &self,
        k: usize,
        x: &mut [i128],
        bound: &mut i128,
        out: &mut [i128],
        visit: &mut F,
    ) -> Result<()>
    where
        F: FnMut(&[i128], i128) -> Option<i128>,
    {
        let w = self.n + 1;
        let b_k = &self.stages[k];
        let a = b_k[k * w + k];
        let mut b: i128 = 0;
        for j in k + 1..w {
            b = ck(b.checked_add(ck(b_k[k * w + j].checked_mul(x[j]))?))?;
        }
        let mut c: i128 = 0;
        for i in k + 1..w {
            let mut row: i128 = 0;
            for j in k + 1..w {
                row = ck(row.checked_add(ck(b_k[i * w + j].checked_mul(x[j]))?))?;
            }
            c = ck(c.checked_add(ck(row.checked_mul(x[i]))?))?;
        }
        let m_k = self.minors[k];
        // q(t) = a t² + 2 b t + c, compared against bound * M_k
        let q = |t: i128| -> Result<i128> {
            let at = ck(a.checked_mul(t))?;
            let inner = ck(at.checked_add(ck(b.checked_mul(2))?))?;
            ck(ck(inner.checked_mul(t))?.checked_add(c))
        };
        let centre = (-b).div_euclid(a);
        let mut down = centre;
        let mut up = centre + 1;
        let mut q_down = Some(q(down)?);
        let mut q_up = Some(q(up)?);
        loop {
            let lim = ck(bound.checked_mul(m_k))?;
            if q_down.is_some_and(|v| v > lim) {
                q_down = None;
            }
            if q_up.is_some_and(|v| v > lim) {
                q_up = None;
            }
            let take_down = match (q_down, q_up) {
                (None, None) => break,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some(d), Some(u)) => d <= u,
            };
            let (t, val) = if take_down {
                let r = (down, q_down.unwrap());
                down -= 1;
                q_down = Some(q(down)?);
                r
            } else {
                let r = (up, q_up.unwrap());
                up += 1;
                q_up = Some(q(up)?);
                r
            };
            x[k] = t;
            if k == 0 {
                for i in 0..self.n {
                    out[self.perm[i]] = x[i];
                }
                if let Some(nb) = visit(out, val) {
                    *bound = (*bound).min(nb);
                }
            } else {
                self.level(k - 1, x, bound, out, visit)?;
            }
        }
        x[k] = 0;
        Ok(())
    }

    /// Collects every `z` with `f(z) <= bound`.
    pub fn all_within(&self, bound: i128) -> Result<Vec<(Vec<i128>, i128)>> {
        let mut found = Vec::new();
        self.search(bound, |z, v| {
            found.push((z.to_vec(), v));
            None
        })?;
        Ok(found)
    }
}

fn pivot_order(n: usize, gram: &[i128]) -> Vec<usize> {
    let mut a: Vec<f64> = gram.iter().map(|&v| v as f64).collect();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    while !remaining.is_empty() {
        let (pos, &p) = remaining
            .iter()
            .enumerate()
            .min_by(|(_, &i), (_, &j)| a[i * n + i].total_cmp(&a[j * n + j]).then(i.cmp(&j)))
            .unwrap();
        remaining.remove(pos);
        order.push(p);
        let piv = a[p * n + p];
        if piv.abs() < f64::EPSILON {
            continue;
        }
        for &i in &remaining {
            for &j in &remaining {
                a[i * n + j] -= a[i * n + p] * a[p * n + j] / piv;
            }
        }
    }
    order
}
