//! Independent oracles and fixtures shared by the integration suites.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde_json::{json, Value};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub const SAMPLE_LEXICON: &[(&str, f64)] = &[
    ("laughter", 8.50),
    ("food", 7.44),
    ("reunion", 6.96),
    ("the", 4.98),
    ("of", 4.94),
    ("vanity", 4.30),
    ("hate", 2.34),
    ("funeral", 2.10),
    ("terrorist", 1.30),
];

/// β, residual variance and standard errors via the normal equations,
/// inverting XᵀX by Gauss–Jordan elimination with partial pivoting.
pub struct NormalEquations {
    pub beta: Vec<f64>,
    pub s2: f64,
    pub se: Vec<f64>,
}

pub fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> NormalEquations {
    let (n, p) = (x.len(), x[0].len());
    let mut aug = vec![vec![0.0; 2 * p]; p];
    for i in 0..p {
        for j in 0..p {
            aug[i][j] = (0..n).map(|r| x[r][i] * x[r][j]).sum();
        }
        aug[i][p + i] = 1.0;
    }
    for c in 0..p {
        let piv = (c..p)
            .max_by(|&a, &b| aug[a][c].abs().total_cmp(&aug[b][c].abs()))
            .unwrap();
        aug.swap(c, piv);
        let d = aug[c][c];
        aug[c].iter_mut().for_each(|v| *v /= d);
        for r in 0..p {
            if r != c {
                let f = aug[r][c];
                let row_c = aug[c].clone();
                aug[r].iter_mut().zip(&row_c).for_each(|(v, w)| *v -= f * w);
            }
        }
    }
    let inv: Vec<Vec<f64>> = aug.iter().map(|row| row[p..].to_vec()).collect();
    let xty: Vec<f64> = (0..p).map(|j| (0..n).map(|r| x[r][j] * y[r]).sum()).collect();
    let beta: Vec<f64> = (0..p).map(|i| (0..p).map(|j| inv[i][j] * xty[j]).sum()).collect();
    let ssr: f64 = (0..n)
        .map(|r| {
            let fit: f64 = (0..p).map(|j| x[r][j] * beta[j]).sum();
            (y[r] - fit).powi(2)
        })
        .sum();
    let s2 = ssr / (n - p) as f64;
    let se = (0..p).map(|i| (s2 * inv[i][i]).sqrt()).collect();
    NormalEquations { beta, s2, se }
}

/// Γ((ν+1)/2) / Γ(ν/2) for integer ν from the exact two-step recurrence.
fn gamma_ratio(df: u64) -> f64 {
    let mut r = if df % 2 == 1 {
        1.0 / std::f64::consts::PI.sqrt()
    } else {
        std::f64::consts::PI.sqrt() / 2.0
    };
    let mut k = if df % 2 == 1 { 1 } else { 2 };
    while k < df {
        r *= (k as f64 + 1.0) / k as f64;
        k += 2;
    }
    r
}

fn t_density(x: f64, df: u64) -> f64 {
    let nu = df as f64;
    gamma_ratio(df) / (nu * std::f64::consts::PI).sqrt() * (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0)
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// P(T > t) by adaptive Simpson quadrature of the density over [0, |t|].
pub fn t_sf_quadrature(t: f64, df: u64) -> f64 {
    let f = |x: f64| t_density(x, df);
    let mass = integrate(&f, 0.0, t.abs(), 1e-14);
    if t >= 0.0 {
        0.5 - mass
    } else {
        0.5 + mass
    }
}

/// Rank by counting, then textbook Pearson.
pub fn spearman_brute(xs: &[f64], ys: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|&a| {
                let below = v.iter().filter(|&&b| b < a).count() as f64;
                let equal = v.iter().filter(|&&b| b == a).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (rank(xs), rank(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Minimal HTTP sentiment endpoint. Scores a text as the fraction of its
/// bytes in `a..=m`; answers 503 to the first `fail_first` requests.
pub struct MockServer {
    pub url: String,
    pub requests: Arc<AtomicUsize>,
}

pub fn mock_score(text: &str) -> f64 {
    if text.is_empty() {
        return 0.5;
    }
    let hits = text.bytes().filter(|b| (b'a'..=b'm').contains(b)).count();
    hits as f64 / text.len() as f64
}

impl MockServer {
    pub fn start(fail_first: usize) -> Self {
        Self::with_handler(move |n, body| {
            if n < fail_first {
                return (503, json!({"error": "busy"}));
            }
            let docs: Vec<Value> = body["documents"]
                .as_array()
                .unwrap()
                .iter()
                .map(|d| json!({"id": d["id"], "score": mock_score(d["text"].as_str().unwrap())}))
                .collect();
            (200, json!({ "documents": docs }))
        })
    }

    pub fn with_handler<F>(handler: F) -> Self
    where
        F: Fn(usize, &Value) -> (u16, Value) + Send + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/sentiment", listener.local_addr().unwrap());
        let requests = Arc::new(AtomicUsize::new(0));
        let counter = Arc::clone(&requests);
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 {
                        break;
                    }
                    let line = line.trim_end();
                    if line.is_empty() {
                        break;
                    }
                    if let Some((k, v)) = line.split_once(':') {
                        if k.eq_ignore_ascii_case("content-length") {
                            len = v.trim().parse().unwrap_or(0);
                        }
                    }
                }
                let mut body = vec![0u8; len];
                if reader.read_exact(&mut body).is_err() {
                    continue;
                }
                let n = counter.fetch_add(1, Ordering::SeqCst);
                let value: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
                let (status, reply) = handler(n, &value);
                let text = reply.to_string();
                let _ = write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
                    text.len()
                );
                let _ = stream.flush();
            }
        });
        Self { url, requests }
    }

    pub fn count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}
