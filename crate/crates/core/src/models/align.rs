//! Map free-form decoder output back onto source positions.

const MATCH_BONUS: f64 = 4.0;
const EMPTY_PENALTY: f64 = -4.0;
const EXTRA_TOKEN_PENALTY: f64 = -1.0;
const ATTENTION_FLOOR: f64 = 1e-4;

/// Restrict framed attention rows (`<s>`, content, `</s>`) to the `n`
/// content positions and renormalize.
pub fn content_attention(framed: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    framed
        .iter()
        .map(|row| {
            let mut r: Vec<f64> = (0..n).map(|k| row.get(k + 1).copied().unwrap_or(0.0)).collect();
            let s: f64 = r.iter().sum();
            if s > 0.0 {
                r.iter_mut().for_each(|v| *v /= s);
            } else if n > 0 {
                r.iter_mut().for_each(|v| *v = 1.0 / n as f64);
            }
            r
        })
        .collect()
}

/// Split `output` into `source.len()` contiguous, monotone, possibly empty
/// spans. Equal lengths align positionally; otherwise a dynamic program
/// maximizes attention mass plus exact-match bonuses.
///
/// `attention[j][k]` is the weight of source `k` when emitting output `j`.
pub fn align_output(source: &[String], output: &[String], attention: &[Vec<f64>]) -> Vec<Vec<String>> {
    let (n, m) = (source.len(), output.len());
    if n == 0 {
        return Vec::new();
    }
    if n == m {
        return output.iter().map(|t| vec![t.clone()]).collect();
    }
    let lp = |j: usize, k: usize| {
        let a = attention.get(j).and_then(|r| r.get(k)).copied().unwrap_or(0.0);
        let bonus = if output[j] == source[k] { MATCH_BONUS } else { 0.0 };
        (a + ATTENTION_FLOOR).ln() + bonus
    };
    // prefix[k][j] = sum of lp(i, k) for i < j
    let prefix: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let mut p = vec![0.0; m + 1];
            for j in 0..m {
                p[j + 1] = p[j] + lp(j, k);
            }
            p
        })
        .collect();
    let span = |k: usize, a: usize, b: usize| {
        if a == b {
            EMPTY_PENALTY
        } else {
            prefix[k][b] - prefix[k][a] + EXTRA_TOKEN_PENALTY * (b - a - 1) as f64
        }
    };
    let mut dp = vec![vec![f64::NEG_INFINITY; m + 1]; n + 1];
    let mut back = vec![vec![0usize; m + 1]; n + 1];
    dp[0][0] = 0.0;
    for k in 0..n {
        for b in 0..=m {
            for a in 0..=b {
                if dp[k][a] == f64::NEG_INFINITY {
                    continue;
                }
                let s = dp[k][a] + span(k, a, b);
                if s > dp[k + 1][b] {
                    dp[k + 1][b] = s;
                    back[k + 1][b] = a;
                }
            }
        }
    }
    let mut spans = vec![(0, 0); n];
    let mut b = m;
    for k in (0..n).rev() {
        let a = back[k + 1][b];
        spans[k] = (a, b);
        b = a;
    }
    spans.into_iter().map(|(a, b)| output[a..b].to_vec()).collect()
}
