//! Quadrature rules on simplices in barycentric form. Weights sum to one;
//! multiply by the simplex measure.

#[derive(Debug, Clone)]
pub struct SimplexRule<const V: usize> {
    pub points: Vec<[f64; V]>,
    pub weights: Vec<f64>,
}

impl<const V: usize> SimplexRule<V> {
    /// Symmetric `V`-point rule exact for polynomials of degree two.
    pub fn degree2() -> Self {
        let n = (V - 1) as f64;
        let root = (n + 2.0).sqrt();
        let a = (n + 2.0 - root) / ((n + 1.0) * (n + 2.0));
        let b = (n + 2.0 + n * root) / ((n + 1.0) * (n + 2.0));
        let points = (0..V)
            .map(|i| std::array::from_fn(|j| if i == j { b } else { a }))
            .collect();
        Self {
            points,
            weights: vec![1.0 / V as f64; V],
        }
    }

    /// Grundmann-Moeller rule of degree `2s + 1`.
    pub fn grundmann_moeller(s: usize) -> Self {
        let n = V - 1;
        let d = 2 * s + 1;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let fact = |k: usize| (1..=k).fold(1.0f64, |a, b| a * b as f64);
        for i in 0..=s {
            let denom = (d + n - 2 * i) as f64;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let w = sign * 2f64.powi(-(2 * s as i32)) * denom.powi(d as i32)
                / (fact(i) * fact(d + n - i));
            for beta in compositions::<V>(s - i) {
                points.push(beta.map(|b| (2 * b + 1) as f64 / denom));
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; V], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

/// All `beta` in `N^V` with `|beta| = total`.
fn compositions<const V: usize>(total: usize) -> Vec<[usize; V]> {
    fn rec<const V: usize>(pos: usize, left: usize, cur: &mut [usize; V], out: &mut Vec<[usize; V]>) {
        if pos == V - 1 {
            cur[pos] = left;
            out.push(*cur);
            return;
        }
        for k in 0..=left {
            cur[pos] = k;
            rec(pos + 1, left - k, cur, out);
        }
    }
    let mut out = Vec::new();
    rec(0, total, &mut [0; V], &mut out);
    out
}
