//! Reference kernels. Plain column-major loop nests operating on a shared
//! arena; correctness over speed.
//!
//! Every arithmetic operation is reported to a [`Tally`]. With [`NoTally`]
//! the reports compile away; with [`FlopTally`] the kernels become the
//! instrumented oracle for the analytic counts in [`super::flops`].
//!
//! Flop conventions: a multiply-add is two flops, a division one flop,
//! negation is free. Scaling by `alpha` costs one multiply per element
//! unless `alpha` is `1` or `-1`. For `dgemm`, `beta = 0` and `beta = 1`
//! skip the scaling of `C`.

use super::request::SamplingRequest;
use super::KernelError;

pub trait Tally {
    fn add(&mut self, flops: u64);
}

#[derive(Debug, Default, Clone, Copy)]
pub struct NoTally;

impl Tally for NoTally {
    #[inline(always)]
    fn add(&mut self, _: u64) {}
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct FlopTally(pub u64);

impl Tally for FlopTally {
    #[inline(always)]
    fn add(&mut self, flops: u64) {
        self.0 += flops;
    }
}

/// Column-major view description: element offset and leading dimension.
#[derive(Debug, Clone, Copy)]
struct View {
    off: usize,
    ld: usize,
}

impl View {
    #[inline(always)]
    fn at(self, i: usize, j: usize) -> usize {
        self.off + i + j * self.ld
    }
}

fn view(
    arena_len: usize,
    routine: &str,
    off: usize,
    ld: usize,
    rows: usize,
    cols: usize,
) -> Result<View, KernelError> {
    if rows > 0 && cols > 0 {
        let end = off + ld * (cols - 1) + rows;
        if end > arena_len {
            return Err(KernelError::OutOfArena {
                routine: routine.to_string(),
                end,
                len: arena_len,
            });
        }
    }
    Ok(View { off, ld })
}

/// Applies the reference kernel of `request` to `arena` in place.
///
/// `offsets` holds the element offset of each matrix argument, in
/// signature order. The request must already be valid for its signature.
pub fn execute_kernel(
    request: &SamplingRequest,
    arena: &mut [f64],
    offsets: &[usize],
) -> Result<(), KernelError> {
    execute_kernel_with(request, arena, offsets, &mut NoTally)
}

/// Like [`execute_kernel`] but returns the number of floating-point
/// operations actually performed.
pub fn execute_kernel_counted(
    request: &SamplingRequest,
    arena: &mut [f64],
    offsets: &[usize],
) -> Result<u64, KernelError> {
    let mut t = FlopTally(0);
    execute_kernel_with(request, arena, offsets, &mut t)?;
    Ok(t.0)
}

pub fn execute_kernel_with<T: Tally>(
    r: &SamplingRequest,
    arena: &mut [f64],
    offsets: &[usize],
    t: &mut T,
) -> Result<(), KernelError> {
    let len = arena.len();
    let name = r.routine.as_str();
    let need = |n: usize| -> Result<(), KernelError> {
        if offsets.len() != n {
            Err(KernelError::OperandCount {
                routine: name.to_string(),
                expected: n,
                found: offsets.len(),
            })
        } else {
            Ok(())
        }
    };
    match name {
        "dgemm" => {
            need(3)?;
            let (ta, tb) = (r.code(0) == 'T', r.code(1) == 'T');
            let (m, n, k) = (r.int(2), r.int(3), r.int(4));
            let (ar, ac) = if ta { (k, m) } else { (m, k) };
            let (br, bc) = if tb { (n, k) } else { (k, n) };
            let a = view(len, name, offsets[0], r.int(7), ar, ac)?;
            let b = view(len, name, offsets[1], r.int(9), br, bc)?;
            let c = view(len, name, offsets[2], r.int(12), m, n)?;
            gemm(arena, t, ta, tb, m, n, k, r.real(5), a, b, r.real(10), c);
        }
        "dtrsm" | "dtrmm" => {
            need(2)?;
            let left = r.code(0) == 'L';
            let (m, n) = (r.int(4), r.int(5));
            let ta = if left { m } else { n };
            let tri = Tri {
                lower: (r.code(1) == 'L') != (r.code(2) == 'T'),
                trans: r.code(2) == 'T',
                unit: r.code(3) == 'U',
                a: view(len, name, offsets[0], r.int(8), ta, ta)?,
            };
            let b = view(len, name, offsets[1], r.int(10), m, n)?;
            if name == "dtrsm" {
                trsm(arena, t, left, tri, m, n, r.real(6), b);
            } else {
                trmm(arena, t, left, tri, m, n, r.real(6), b);
            }
        }
        "dtrinv_unb" => {
            need(1)?;
            let n = r.int(1);
            let a = view(len, name, offsets[0], r.int(3), n, n)?;
            trinv_lower(arena, t, r.code(0) == 'U', n, a);
        }
        "dgetrf_unb" => {
            need(1)?;
            let n = r.int(0);
            let a = view(len, name, offsets[0], r.int(2), n, n)?;
            getrf_nopiv(arena, t, n, a);
        }
        "dsylv_unb" => {
            need(3)?;
            let (m, n) = (r.int(0), r.int(1));
            let l = view(len, name, offsets[0], r.int(3), m, m)?;
            let u = view(len, name, offsets[1], r.int(5), n, n)?;
            let c = view(len, name, offsets[2], r.int(7), m, n)?;
            sylv(arena, t, m, n, l, u, c);
        }
        other => return Err(KernelError::UnknownRoutine(other.to_string())),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn gemm<T: Tally>(
    x: &mut [f64],
    t: &mut T,
    ta: bool,
    tb: bool,
    m: usize,
    n: usize,
    k: usize,
    alpha: f64,
    a: View,
    b: View,
    beta: f64,
    c: View,
) {
    let opa = |i: usize, l: usize| if ta { a.at(l, i) } else { a.at(i, l) };
    let opb = |l: usize, j: usize| if tb { b.at(j, l) } else { b.at(l, j) };
    for j in 0..n {
        for i in 0..m {
            let ci = c.at(i, j);
            let mut acc = if beta == 0.0 {
                0.0
            } else if beta == 1.0 {
                x[ci]
            } else {
                t.add(1);
                beta * x[ci]
            };
            if alpha == 1.0 {
                for l in 0..k {
                    acc += x[opa(i, l)] * x[opb(l, j)];
                }
                t.add(2 * k as u64);
            } else if alpha == -1.0 {
                for l in 0..k {
                    acc -= x[opa(i, l)] * x[opb(l, j)];
                }
                t.add(2 * k as u64);
            } else {
                let mut s = 0.0;
                for l in 0..k {
                    s += x[opa(i, l)] * x[opb(l, j)];
                }
                acc += alpha * s;
                t.add(2 * k as u64 + 2);
            }
            x[ci] = acc;
        }
    }
}

/// A triangular operand as seen through `op()`.
#[derive(Clone, Copy)]
struct Tri {
    /// Whether `op(A)` is lower triangular.
    lower: bool,
    trans: bool,
    unit: bool,
    a: View,
}

impl Tri {
    /// Index of `op(A)(i, j)`.
    #[inline(always)]
    fn at(self, i: usize, j: usize) -> usize {
        if self.trans {
            self.a.at(j, i)
        } else {
            self.a.at(i, j)
        }
    }
}

fn scale<T: Tally>(x: &mut [f64], t: &mut T, m: usize, n: usize, alpha: f64, b: View) {
    if alpha == 1.0 {
        return;
    }
    for j in 0..n {
        for i in 0..m {
            let bi = b.at(i, j);
            if alpha == -1.0 {
                x[bi] = -x[bi];
            } else {
                x[bi] *= alpha;
            }
        }
    }
    if alpha != -1.0 {
        t.add((m * n) as u64);
    }
}

/// `B := alpha op(A)^-1 B` (left) or `B := alpha B op(A)^-1` (right).
#[allow(clippy::too_many_arguments)]
fn trsm<T: Tally>(
    x: &mut [f64],
    t: &mut T,
    left: bool,
    tri: Tri,
    m: usize,
    n: usize,
    alpha: f64,
    b: View,
) {
    scale(x, t, m, n, alpha, b);
    if left {
        for j in 0..n {
            if tri.lower {
                for i in 0..m {
                    let mut v = x[b.at(i, j)];
                    for l in 0..i {
                        v -= x[tri.at(i, l)] * x[b.at(l, j)];
                    }
                    t.add(2 * i as u64);
                    if !tri.unit {
                        v /= x[tri.at(i, i)];
                        t.add(1);
                    }
                    x[b.at(i, j)] = v;
                }
            } else {
                for i in (0..m).rev() {
                    let mut v = x[b.at(i, j)];
                    for l in i + 1..m {
                        v -= x[tri.at(i, l)] * x[b.at(l, j)];
                    }
                    t.add(2 * (m - i - 1) as u64);
                    if !tri.unit {
                        v /= x[tri.at(i, i)];
                        t.add(1);
                    }
                    x[b.at(i, j)] = v;
                }
            }
        }
    } else {
        for i in 0..m {
            if tri.lower {
                for j in (0..n).rev() {
                    let mut v = x[b.at(i, j)];
                    for l in j + 1..n {
                        v -= x[b.at(i, l)] * x[tri.at(l, j)];
                    }
                    t.add(2 * (n - j - 1) as u64);
                    if !tri.unit {
                        v /= x[tri.at(j, j)];
                        t.add(1);
                    }
                    x[b.at(i, j)] = v;
                }
            } else {
                for j in 0..n {
                    let mut v = x[b.at(i, j)];
                    for l in 0..j {
                        v -= x[b.at(i, l)] * x[tri.at(l, j)];
                    }
                    t.add(2 * j as u64);
                    if !tri.unit {
                        v /= x[tri.at(j, j)];
                        t.add(1);
                    }
                    x[b.at(i, j)] = v;
                }
            }
        }
    }
}

/// `B := alpha op(A) B` (left) or `B := alpha B op(A)` (right).
#[allow(clippy::too_many_arguments)]
fn trmm<T: Tally>(
    x: &mut [f64],
    t: &mut T,
    left: bool,
    tri: Tri,
    m: usize,
    n: usize,
    alpha: f64,
    b: View,
) {
    let diag = |x: &[f64], t: &mut T, v: f64, d: usize| {
        if tri.unit {
            v
        } else {
            t.add(1);
            x[d] * v
        }
    };
    if left {
        for j in 0..n {
            if tri.lower {
                for i in (0..m).rev() {
                    let mut v = diag(x, t, x[b.at(i, j)], tri.at(i, i));
                    for l in 0..i {
                        v += x[tri.at(i, l)] * x[b.at(l, j)];
                    }
                    t.add(2 * i as u64);
                    x[b.at(i, j)] = v;
                }
            } else {
                for i in 0..m {
                    let mut v = diag(x, t, x[b.at(i, j)], tri.at(i, i));
                    for l in i + 1..m {
                        v += x[tri.at(i, l)] * x[b.at(l, j)];
                    }
                    t.add(2 * (m - i - 1) as u64);
                    x[b.at(i, j)] = v;
                }
            }
        }
    } else {
        for i in 0..m {
            if tri.lower {
                for j in 0..n {
                    let mut v = diag(x, t, x[b.at(i, j)], tri.at(j, j));
                    for l in j + 1..n {
                        v += x[b.at(i, l)] * x[tri.at(l, j)];
                    }
                    t.add(2 * (n - j - 1) as u64);
                    x[b.at(i, j)] = v;
                }
            } else {
                for j in (0..n).rev() {
                    let mut v = diag(x, t, x[b.at(i, j)], tri.at(j, j));
                    for l in 0..j {
                        v += x[b.at(i, l)] * x[tri.at(l, j)];
                    }
                    t.add(2 * j as u64);
                    x[b.at(i, j)] = v;
                }
            }
        }
    }
    scale(x, t, m, n, alpha, b);
}

/// In-place inverse of a lower triangular matrix, column by column from
/// the right (the classic unblocked `trti2` scheme).
fn trinv_lower<T: Tally>(x: &mut [f64], t: &mut T, unit: bool, n: usize, a: View) {
    for j in (0..n).rev() {
        let ajj = if unit {
            -1.0
        } else {
            let d = a.at(j, j);
            x[d] = 1.0 / x[d];
            t.add(1);
            -x[d]
        };
        // x := T x with T = A[j+1.., j+1..] (already inverted), x = A[j+1.., j].
        for i in (j + 1..n).rev() {
            let mut v = if unit {
                x[a.at(i, j)]
            } else {
                t.add(1);
                x[a.at(i, i)] * x[a.at(i, j)]
            };
            for l in j + 1..i {
                v += x[a.at(i, l)] * x[a.at(l, j)];
            }
            t.add(2 * (i - j - 1) as u64);
            x[a.at(i, j)] = v;
        }
        for i in j + 1..n {
            let e = a.at(i, j);
            if unit {
                x[e] = -x[e];
            } else {
                x[e] *= ajj;
                t.add(1);
            }
        }
    }
}

/// In-place LU factorization without pivoting; `L` is unit lower
/// triangular and stored below the diagonal.
fn getrf_nopiv<T: Tally>(x: &mut [f64], t: &mut T, n: usize, a: View) {
    for kk in 0..n {
        let piv = x[a.at(kk, kk)];
        for i in kk + 1..n {
            x[a.at(i, kk)] /= piv;
        }
        t.add((n - kk - 1) as u64);
        for j in kk + 1..n {
            let akj = x[a.at(kk, j)];
            for i in kk + 1..n {
                x[a.at(i, j)] -= x[a.at(i, kk)] * akj;
            }
        }
        t.add(2 * ((n - kk - 1) * (n - kk - 1)) as u64);
    }
}

/// Solves `L X + X U = C` for `X`, overwriting `C`, with `L` lower and `U`
/// upper triangular.
fn sylv<T: Tally>(x: &mut [f64], t: &mut T, m: usize, n: usize, l: View, u: View, c: View) {
    for j in 0..n {
        for i in 0..m {
            let mut v = x[c.at(i, j)];
            for p in 0..i {
                v -= x[l.at(i, p)] * x[c.at(p, j)];
            }
            for p in 0..j {
                v -= x[c.at(i, p)] * x[u.at(p, j)];
            }
            v /= x[l.at(i, i)] + x[u.at(j, j)];
            t.add(2 * (i + j) as u64 + 2);
            x[c.at(i, j)] = v;
        }
    }
}
