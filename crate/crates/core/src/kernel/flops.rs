//! Analytic flop counts of the reference kernels.

use super::registry::lookup_signature;
use super::request::SamplingRequest;
use super::KernelError;

fn unit_scale(alpha: f64) -> bool {
    alpha == 1.0 || alpha == -1.0
}

fn sum_sq(n: u64) -> u64 {
    // sum_{k<n} k^2
    if n == 0 {
        0
    } else {
        (n - 1) * n * (2 * n - 1) / 6
    }
}

fn sum_lin(n: u64) -> u64 {
    // sum_{k<n} k
    n * n.saturating_sub(1) / 2
}

/// Exact number of additions, multiplications and divisions the reference
/// kernel performs for `request`. Polynomial of total degree at most three
/// in the size arguments for every fixed choice of discrete and scalar
/// arguments.
pub fn flop_count(request: &SamplingRequest) -> Result<u64, KernelError> {
    lookup_signature(&request.routine)?;
    let r = request;
    let count = match r.routine.as_str() {
        "dgemm" => {
            let (m, n, k) = (r.int(2) as u64, r.int(3) as u64, r.int(4) as u64);
            let alpha = if unit_scale(r.real(5)) { 0 } else { 2 };
            let beta = r.real(10);
            let scale_c = if beta == 0.0 || beta == 1.0 { 0 } else { 1 };
            m * n * (2 * k + alpha + scale_c)
        }
        "dtrsm" | "dtrmm" => {
            let (m, n) = (r.int(4) as u64, r.int(5) as u64);
            let unit = r.code(3) == 'U';
            let (tri, other) = if r.code(0) == 'L' { (m, n) } else { (n, m) };
            let per = tri * tri - if unit { tri } else { 0 };
            let alpha = if unit_scale(r.real(6)) { 0 } else { m * n };
            other * per + alpha
        }
        "dtrinv_unb" => {
            let n = r.int(1) as u64;
            if r.code(0) == 'U' {
                sum_sq(n) - sum_lin(n)
            } else {
                n + sum_sq(n) + sum_lin(n)
            }
        }
        "dgetrf_unb" => {
            let n = r.int(0) as u64;
            sum_lin(n) + 2 * sum_sq(n)
        }
        "dsylv_unb" => {
            let (m, n) = (r.int(0) as u64, r.int(1) as u64);
            m * n * (m + n)
        }
        other => return Err(KernelError::UnknownRoutine(other.to_string())),
    };
    Ok(count)
}
