use crate::error::{Error, Result};

/// 7-point Gauss / 15-point Kronrod pair on [-1, 1]. Positive abscissae only;
/// nodes are mirrored. Odd positions (1, 3, 5, 7 counting from 0) are the
/// embedded Gauss nodes.
const XK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

const MAX_SEGMENTS: usize = 2000;

/// ln Σ exp(vᵢ), stable under large shifts.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m; // all -inf (empty sum) or a +inf dominates
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    /// ln of the Kronrod estimate of ∫ exp(f) over [a, b].
    log_val: f64,
    /// ln |Kronrod − Gauss|.
    log_err: f64,
}

/// Integrate exp(log_f) over [a, b] and return the logarithm of the result,
/// adaptively bisecting until the summed Kronrod−Gauss discrepancy is below
/// `rel_tol` of the integral. Works entirely in log space, so integrands may
/// peak at exp(±thousands).
pub fn log_integrate(log_f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    assert!(b > a, "empty integration interval");
    let eval = |a: f64, b: f64| -> Segment {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut logs = [f64::NEG_INFINITY; 15];
        let mut idx = 0;
        for (i, &x) in XK.iter().enumerate() {
            if i == 7 {
                logs[idx] = log_f(c);
                idx += 1;
            } else {
                logs[idx] = log_f(c - h * x);
                logs[idx + 1] = log_f(c + h * x);
                idx += 2;
            }
        }
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return Segment { a, b, log_val: f64::NEG_INFINITY, log_err: f64::NEG_INFINITY };
        }
        // Shift by the max before exponentiating; sums stay in range.
        let mut sk = 0.0;
        let mut sg = 0.0;
        let mut idx = 0;
        for i in 0..8 {
            let pair = if i == 7 {
                let v = (logs[idx] - m).exp();
                idx += 1;
                v
            } else {
                let v = (logs[idx] - m).exp() + (logs[idx + 1] - m).exp();
                idx += 2;
                v
            };
            sk += WK[i] * pair;
            // Gauss nodes sit at positions 1, 3, 5 and the center 7.
            if i % 2 == 1 {
                sg += WG[i / 2] * pair;
            }
        }
        let log_val = if sk > 0.0 { m + (sk * h).ln() } else { f64::NEG_INFINITY };
        let diff = (sk - sg).abs();
        let log_err = if diff > 0.0 { m + (diff * h).ln() } else { f64::NEG_INFINITY };
        Segment { a, b, log_val, log_err }
    };

    let mut segments = vec![eval(a, b)];
    loop {
        let log_total = log_sum_exp(&segments.iter().map(|s| s.log_val).collect::<Vec<_>>());
        let log_err = log_sum_exp(&segments.iter().map(|s| s.log_err).collect::<Vec<_>>());
        if log_total == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        if log_err == f64::NEG_INFINITY || log_err - log_total <= rel_tol.ln() {
            return Ok(log_total);
        }
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::QuadratureNotConverged((log_err - log_total).exp()));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.log_err.total_cmp(&b.1.log_err))
            .map(|(i, _)| i)
            .expect("non-empty segment list");
        let Segment { a, b, .. } = segments.swap_remove(worst);
        let mid = 0.5 * (a + b);
        segments.push(eval(a, mid));
        segments.push(eval(mid, b));
    }
}
