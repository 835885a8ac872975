/// Least squares via modified Gram–Schmidt QR with re-orthogonalization.
///
/// Columns are processed in order; a column that is numerically dependent on
/// the columns before it is dropped and its coefficient reported as 0, so an
/// intercept listed first always wins over later constant columns.
#[derive(Debug, Clone)]
pub struct Lstsq {
    /// One coefficient per input column; dropped columns get 0.
    pub coef: Vec<f64>,
    /// Number of retained (independent) columns.
    pub rank: usize,
    /// Which columns were dropped as dependent.
    pub dropped: Vec<bool>,
    /// X·coef on the unweighted design.
    pub fitted: Vec<f64>,
    /// Σ wᵢ (yᵢ − fittedᵢ)²; unweighted when all wᵢ = 1.
    pub rss: f64,
}

/// Columns whose residual norm falls below this fraction of their original
/// norm are treated as linearly dependent.
const DEP_TOL: f64 = 1e-10;

pub fn lstsq(cols: &[Vec<f64>], y: &[f64]) -> Lstsq {
    lstsq_weighted(cols, y, None)
}

pub fn lstsq_weighted(cols: &[Vec<f64>], y: &[f64], weights: Option<&[f64]>) -> Lstsq {
    let n = y.len();
    let p = cols.len();
    let sqrt_w: Option<Vec<f64>> = weights.map(|w| w.iter().map(|v| v.sqrt()).collect());
    let scaled = |col: &[f64]| -> Vec<f64> {
        match &sqrt_w {
            Some(sw) => col.iter().zip(sw).map(|(v, s)| v * s).collect(),
            None => col.to_vec(),
        }
    };

    let mut q: Vec<Vec<f64>> = Vec::with_capacity(p);
    // r[j] holds column j of R restricted to retained rows, last entry diagonal
    let mut r: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut retained: Vec<usize> = Vec::with_capacity(p);
    let mut dropped = vec![false; p];

    for (j, col) in cols.iter().enumerate() {
        let mut v = scaled(col);
        let norm0 = norm2(&v);
        let mut rj = Vec::with_capacity(q.len());
        for qi in &q {
            let c = dot(qi, &v);
            axpy(-c, qi, &mut v);
            rj.push(c);
        }
        // second orthogonalization pass recovers accuracy lost to cancellation
        for (qi, rji) in q.iter().zip(rj.iter_mut()) {
            let c = dot(qi, &v);
            axpy(-c, qi, &mut v);
            *rji += c;
        }
        let norm = norm2(&v);
        if norm <= DEP_TOL * norm0 || norm == 0.0 {
            dropped[j] = true;
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        rj.push(norm);
        q.push(v);
        r.push(rj);
        retained.push(j);
    }

    let rank = retained.len();
    let yw = scaled(y);
    let qty: Vec<f64> = q.iter().map(|qi| dot(qi, &yw)).collect();

    // back substitution on the retained upper-triangular system
    let mut beta_r = vec![0.0; rank];
    for i in (0..rank).rev() {
        let mut s = qty[i];
        for k in (i + 1)..rank {
            s -= r[k][i] * beta_r[k];
        }
        beta_r[i] = s / r[i][i];
    }

    let mut coef = vec![0.0; p];
    for (bi, &j) in beta_r.iter().zip(&retained) {
        coef[j] = *bi;
    }

    let mut fitted = vec![0.0; n];
    for (j, col) in cols.iter().enumerate() {
        if coef[j] != 0.0 {
            axpy(coef[j], col, &mut fitted);
        }
    }
    let rss = y
        .iter()
        .zip(&fitted)
        .enumerate()
        .map(|(i, (yi, fi))| {
            let w = weights.map_or(1.0, |w| w[i]);
            w * (yi - fi) * (yi - fi)
        })
        .sum();

    Lstsq { coef, rank, dropped, fitted, rss }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
