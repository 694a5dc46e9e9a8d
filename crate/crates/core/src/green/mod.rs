//! The torus Green function F: Delta F = 2 pi (delta - 1), zero mean.
//!
//! `GreenTable` stores grid samples of the smooth remainder
//! Ftilde = F - chi(|x|) log|x| (chi a C^2 bump supported inside the cell)
//! together with its gradient, and evaluates both through periodic bicubic
//! B-spline interpolation plus the analytic chi log|x| correction.
//!
//! The build splits F Ewald-style: a band-limited k-space part
//! -(1/2pi) sum e^{-sigma|k|^2} cos(2 pi k.x)/|k|^2 synthesized by one
//! spectral solve on the table grid, plus the exactly known real-space
//! remainder sigma/2pi - (1/2) sum_n E1(pi^2 |x-n|^2 / sigma). Both parts
//! are analytic, so the samples are accurate to rounding; interpolation is
//! the only error source (~1e-9 for F at n = 1024).

pub mod oracle;

use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::exec;
use crate::special::exp1;
use crate::spectral::{wavenumber, Fft2};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Gaussian factors below e^-45 are dropped (double precision floor).
const EXP_CUT: f64 = 45.0;
const MAGIC: &[u8; 4] = b"TGF1";

/// Smooth cutoff chi(r) = (1 - (r/rc)^2)^3 for r < rc, else 0.
#[inline]
pub fn chi(r: f64, rc: f64) -> f64 {
    if r >= rc {
        0.0
    } else {
        let u = (r / rc) * (r / rc);
        let v = 1.0 - u;
        v * v * v
    }
}

#[inline]
fn chi_prime(r: f64, rc: f64) -> f64 {
    if r >= rc {
        0.0
    } else {
        let u = (r / rc) * (r / rc);
        let v = 1.0 - u;
        -6.0 * r / (rc * rc) * v * v
    }
}

/// Mean of chi(|x|) log|x| over the cell, in closed form.
fn chi_log_mean(rc: f64) -> f64 {
    std::f64::consts::TAU * rc * rc * (rc.ln() / 8.0 - 25.0 / 192.0)
}

/// Precomputed samples of Ftilde = F - chi log r and grad Ftilde on a
/// uniform n x n grid, with B-spline coefficients for evaluation.
pub struct GreenTable {
    n_table: usize,
    cutoff_radius: f64,
    mean_shift: f64,
    /// Ftilde(0,0) = lim_{x->0} (F(x) - log|x|), the core constant.
    core_constant: f64,
    f_coeff: Vec<f64>,
    gx_coeff: Vec<f64>,
    gy_coeff: Vec<f64>,
}

fn validate_dims(n_table: usize, cutoff_radius: f64) -> Result<()> {
    if n_table < 256 || !n_table.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "n_table must be a power of two >= 256, got {n_table}"
        )));
    }
    if !(cutoff_radius > 0.0 && cutoff_radius <= 0.25) {
        return Err(Error::BadCutoff(cutoff_radius));
    }
    Ok(())
}

impl GreenTable {
    /// Build the table at resolution `n_table` with log-subtraction cutoff
    /// `cutoff_radius`.
    pub fn build(n_table: usize, cutoff_radius: f64) -> Result<Self> {
        validate_dims(n_table, cutoff_radius)?;
        let n = n_table;
        let rc = cutoff_radius;
        let half = (n / 2) as f64;
        let sigma = EXP_CUT / (half * half);
        let fft = Fft2::new(n);

        // band-limited k-space part and its gradient, one spectral solve
        let mut cf = vec![Complex64::default(); n * n];
        let mut cgx = vec![Complex64::default(); n * n];
        let mut cgy = vec![Complex64::default(); n * n];
        exec::for_each_row(&mut cf, n, |i, row| {
            let k1 = wavenumber(i, n) as f64;
            for (j, v) in row.iter_mut().enumerate() {
                let k2 = wavenumber(j, n) as f64;
                let k2n = k1 * k1 + k2 * k2;
                if k2n > 0.0 {
                    let w = -(-sigma * k2n).exp() / (std::f64::consts::TAU * k2n);
                    *v = Complex64::new(w, 0.0);
                }
            }
        });
        exec::for_each_row2(&mut cgx, &mut cgy, n, |i, rx, ry| {
            let k1 = wavenumber(i, n) as f64;
            for j in 0..n {
                let k2 = wavenumber(j, n) as f64;
                let k2n = k1 * k1 + k2 * k2;
                if k2n > 0.0 {
                    let w = -(-sigma * k2n).exp() / (std::f64::consts::TAU * k2n);
                    rx[j] = Complex64::new(0.0, std::f64::consts::TAU * k1 * w);
                    ry[j] = Complex64::new(0.0, std::f64::consts::TAU * k2 * w);
                }
            }
        });
        fft.synthesize(&mut cf);
        fft.synthesize(&mut cgx);
        fft.synthesize(&mut cgy);

        let mut f_s: Vec<f64> = cf.iter().map(|z| z.re).collect();
        let mut gx_s: Vec<f64> = cgx.iter().map(|z| z.re).collect();
        let mut gy_s: Vec<f64> = cgy.iter().map(|z| z.re).collect();
        drop(cf);
        drop(cgx);
        drop(cgy);
        let kpart00 = f_s[0];

        // real-space Ewald remainder and chi log r subtraction, per point
        let h = 1.0 / n as f64;
        let rcut2 = EXP_CUT * sigma / (std::f64::consts::PI * std::f64::consts::PI);
        exec::for_each_row(&mut f_s, n, |i, frow| {
            let x = i as f64 * h;
            for (j, fv) in frow.iter_mut().enumerate() {
                let y = j as f64 * h;
                *fv += sigma / std::f64::consts::TAU;
                for nx in -1i32..=2 {
                    for ny in -1i32..=2 {
                        let dx = x - nx as f64;
                        let dy = y - ny as f64;
                        let r2 = dx * dx + dy * dy;
                        if r2 > 0.0 && r2 < rcut2 {
                            let z = std::f64::consts::PI * std::f64::consts::PI * r2 / sigma;
                            *fv -= 0.5 * exp1(z);
                        }
                    }
                }
                // subtract chi log r at the minimum image
                let sx = if x <= 0.5 { x } else { x - 1.0 };
                let sy = if y <= 0.5 { y } else { y - 1.0 };
                let r = sx.hypot(sy);
                if r > 0.0 && r < rc {
                    *fv -= chi(r, rc) * r.ln();
                }
            }
        });
        exec::for_each_row2(&mut gx_s, &mut gy_s, n, |i, rx, ry| {
            let x = i as f64 * h;
            for j in 0..n {
                let y = j as f64 * h;
                for nx in -1i32..=2 {
                    for ny in -1i32..=2 {
                        let dx = x - nx as f64;
                        let dy = y - ny as f64;
                        let r2 = dx * dx + dy * dy;
                        if r2 > 0.0 && r2 < rcut2 {
                            let z = std::f64::consts::PI * std::f64::consts::PI * r2 / sigma;
                            let e = (-z).exp() / r2;
                            rx[j] += dx * e;
                            ry[j] += dy * e;
                        }
                    }
                }
                let sx = if x <= 0.5 { x } else { x - 1.0 };
                let sy = if y <= 0.5 { y } else { y - 1.0 };
                let r = sx.hypot(sy);
                if r > 0.0 && r < rc {
                    let fac = (chi_prime(r, rc) * r.ln() + chi(r, rc) / r) / r;
                    rx[j] -= fac * sx;
                    ry[j] -= fac * sy;
                }
            }
        });

        // origin sample: the finite limit of F - log r
        let mut other = 0.0;
        for nx in -1i32..=2 {
            for ny in -1i32..=2 {
                if nx == 0 && ny == 0 {
                    continue;
                }
                let r2 = (nx * nx + ny * ny) as f64;
                let z = std::f64::consts::PI * std::f64::consts::PI * r2 / sigma;
                if z < EXP_CUT {
                    other += exp1(z);
                }
            }
        }
        f_s[0] = kpart00
            + sigma / std::f64::consts::TAU
            + 0.5 * (EULER_GAMMA + (std::f64::consts::PI * std::f64::consts::PI / sigma).ln())
            - 0.5 * other;
        gx_s[0] = 0.0;
        gy_s[0] = 0.0;

        // zero mean of the reconstruction: mean(Ftilde) + mean(chi log r) = 0
        let mean: f64 = exec::sum_over(n, |i| f_s[i * n..(i + 1) * n].iter().sum::<f64>())
            / (n * n) as f64;
        let mean_shift = -(mean + chi_log_mean(rc));
        for v in f_s.iter_mut() {
            *v += mean_shift;
        }

        // enforce the dihedral symmetry group of F exactly on the samples
        symmetrize(&mut f_s, &mut gx_s, &mut gy_s, n);
        let core_constant = f_s[0];

        let (f_coeff, gx_coeff, gy_coeff) = prefilter_all(&fft, &f_s, &gx_s, &gy_s, n);
        Ok(Self {
            n_table: n,
            cutoff_radius: rc,
            mean_shift,
            core_constant,
            f_coeff,
            gx_coeff,
            gy_coeff,
        })
    }

    pub fn n_table(&self) -> usize {
        self.n_table
    }

    pub fn cutoff_radius(&self) -> f64 {
        self.cutoff_radius
    }

    /// Constant added to the raw samples to enforce the zero-mean condition.
    pub fn mean_shift(&self) -> f64 {
        self.mean_shift
    }

    /// lim_{x->0} (F(x) - log|x|); enters the ring-energy expansion.
    pub fn core_constant(&self) -> f64 {
        self.core_constant
    }

    /// Reconstructed smooth-part samples (Ftilde), row-major.
    pub fn f_samples(&self) -> Vec<f64> {
        unfilter(&self.f_coeff, self.n_table)
    }

    /// F at displacement `d` (fully periodic; any representative works).
    pub fn eval_f(&self, d: [f64; 2]) -> Result<f64> {
        let (x, y, _, _, r) = self.reduce(d)?;
        let mut v = spline_eval(&self.f_coeff, self.n_table, x, y);
        if r < self.cutoff_radius {
            v += chi(r, self.cutoff_radius) * r.ln();
        }
        Ok(v)
    }

    /// grad F at displacement `d`; odd under d -> -d.
    pub fn eval_grad_f(&self, d: [f64; 2]) -> Result<[f64; 2]> {
        let (x, y, sx, sy, r) = self.reduce(d)?;
        let (mut gx, mut gy) = spline_eval2(&self.gx_coeff, &self.gy_coeff, self.n_table, x, y);
        if r < self.cutoff_radius {
            let rc = self.cutoff_radius;
            let fac = (chi_prime(r, rc) * r.ln() + chi(r, rc) / r) / r;
            gx += fac * sx;
            gy += fac * sy;
        }
        Ok([gx, gy])
    }

    #[inline]
    fn reduce(&self, d: [f64; 2]) -> Result<(f64, f64, f64, f64, f64)> {
        let mut x = d[0].rem_euclid(1.0);
        if x >= 1.0 {
            x = 0.0;
        }
        let mut y = d[1].rem_euclid(1.0);
        if y >= 1.0 {
            y = 0.0;
        }
        let sx = if x <= 0.5 { x } else { x - 1.0 };
        let sy = if y <= 0.5 { y } else { y - 1.0 };
        let r = sx.hypot(sy);
        if r < 1e-12 {
            return Err(Error::SingularPoint);
        }
        Ok((x, y, sx, sy, r))
    }

    /// Binary cache: magic "TGF1", n_table (u32 LE), cutoff_radius (f64 LE),
    /// then row-major f64 LE samples of Ftilde, grad_x Ftilde, grad_y Ftilde.
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let n = self.n_table;
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&(n as u32).to_le_bytes())?;
        w.write_all(&self.cutoff_radius.to_le_bytes())?;
        for arr in [&self.f_coeff, &self.gx_coeff, &self.gy_coeff] {
            let samples = unfilter(arr, n);
            for v in samples {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|_| Error::BadCache("truncated header".into()))?;
        if &magic != MAGIC {
            return Err(Error::BadCache("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)
            .map_err(|_| Error::BadCache("truncated header".into()))?;
        let n = u32::from_le_bytes(b4) as usize;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)
            .map_err(|_| Error::BadCache("truncated header".into()))?;
        let rc = f64::from_le_bytes(b8);
        validate_dims(n, rc).map_err(|e| Error::BadCache(e.to_string()))?;
        let mut arrays = Vec::with_capacity(3);
        for _ in 0..3 {
            let mut a = vec![0.0f64; n * n];
            for v in a.iter_mut() {
                r.read_exact(&mut b8)
                    .map_err(|_| Error::BadCache("truncated samples".into()))?;
                *v = f64::from_le_bytes(b8);
                if !v.is_finite() {
                    return Err(Error::BadCache("non-finite sample".into()));
                }
            }
            arrays.push(a);
        }
        let gy_s = arrays.pop().unwrap();
        let gx_s = arrays.pop().unwrap();
        let f_s = arrays.pop().unwrap();
        let core_constant = f_s[0];
        let fft = Fft2::new(n);
        let (f_coeff, gx_coeff, gy_coeff) = prefilter_all(&fft, &f_s, &gx_s, &gy_s, n);
        Ok(Self {
            n_table: n,
            cutoff_radius: rc,
            mean_shift: 0.0, // already folded into the cached samples
            core_constant,
            f_coeff,
            gx_coeff,
            gy_coeff,
        })
    }
}

/// Average samples over the symmetry group of F: reflections in both axes
/// and the diagonal swap. Gradients transform with the group element.
fn symmetrize(f: &mut [f64], gx: &mut [f64], gy: &mut [f64], n: usize) {
    // (m11, m12, m21, m22) acting on coordinates; all entries in {-1,0,1}
    const GROUP: [(i64, i64, i64, i64); 8] = [
        (1, 0, 0, 1),
        (-1, 0, 0, 1),
        (1, 0, 0, -1),
        (-1, 0, 0, -1),
        (0, 1, 1, 0),
        (0, -1, 1, 0),
        (0, 1, -1, 0),
        (0, -1, -1, 0),
    ];
    let old_f = f.to_vec();
    let old_gx = gx.to_vec();
    let old_gy = gy.to_vec();
    let nn = n as i64;
    let idx = |a: i64, b: i64| -> usize {
        (a.rem_euclid(nn) * nn + b.rem_euclid(nn)) as usize
    };
    exec::for_each_row(f, n, |i, row| {
        let ii = i as i64;
        for (j, v) in row.iter_mut().enumerate() {
            let jj = j as i64;
            let mut acc = 0.0;
            for (m11, m12, m21, m22) in GROUP {
                acc += old_f[idx(m11 * ii + m12 * jj, m21 * ii + m22 * jj)];
            }
            *v = acc / 8.0;
        }
    });
    exec::for_each_row2(gx, gy, n, |i, rx, ry| {
        let ii = i as i64;
        for j in 0..n {
            let jj = j as i64;
            let (mut ax, mut ay) = (0.0, 0.0);
            for (m11, m12, m21, m22) in GROUP {
                let p = idx(m11 * ii + m12 * jj, m21 * ii + m22 * jj);
                let (vx, vy) = (old_gx[p], old_gy[p]);
                // grad F(p) = M^T grad F(M p)
                ax += m11 as f64 * vx + m21 as f64 * vy;
                ay += m12 as f64 * vx + m22 as f64 * vy;
            }
            rx[j] = ax / 8.0;
            ry[j] = ay / 8.0;
        }
    });
}

/// Periodic cubic B-spline prefilter: divide the DFT by the spline symbol
/// (2 + cos(2 pi k / n)) / 3 in each dimension.
fn prefilter(fft: &Fft2, samples: &[f64], n: usize) -> Vec<f64> {
    let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.forward(&mut data);
    let sym: Vec<f64> = (0..n)
        .map(|i| (2.0 + (std::f64::consts::TAU * i as f64 / n as f64).cos()) / 3.0)
        .collect();
    exec::for_each_row(&mut data, n, |i, row| {
        let si = sym[i];
        for (j, v) in row.iter_mut().enumerate() {
            *v /= si * sym[j];
        }
    });
    fft.inverse(&mut data);
    data.iter().map(|z| z.re).collect()
}

fn prefilter_all(
    fft: &Fft2,
    f_s: &[f64],
    gx_s: &[f64],
    gy_s: &[f64],
    n: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    (
        prefilter(fft, f_s, n),
        prefilter(fft, gx_s, n),
        prefilter(fft, gy_s, n),
    )
}

/// Inverse of `prefilter`: reconstruct samples from coefficients with the
/// local (1/6, 4/6, 1/6) mask in each dimension.
fn unfilter(coeff: &[f64], n: usize) -> Vec<f64> {
    let w = [1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0];
    let mut out = vec![0.0f64; n * n];
    exec::for_each_row(&mut out, n, |i, row| {
        for (j, v) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (a, wa) in w.iter().enumerate() {
                let ia = (i + n + a - 1) % n;
                for (b, wb) in w.iter().enumerate() {
                    let jb = (j + n + b - 1) % n;
                    acc += wa * wb * coeff[ia * n + jb];
                }
            }
            *v = acc;
        }
    });
    out
}

#[inline]
fn bspline_weights(u: f64) -> [f64; 4] {
    let u2 = u * u;
    let u3 = u2 * u;
    [
        (1.0 - u) * (1.0 - u) * (1.0 - u) / 6.0,
        (3.0 * u3 - 6.0 * u2 + 4.0) / 6.0,
        (-3.0 * u3 + 3.0 * u2 + 3.0 * u + 1.0) / 6.0,
        u3 / 6.0,
    ]
}

#[inline]
fn spline_eval(coeff: &[f64], n: usize, x: f64, y: f64) -> f64 {
    let fx = x * n as f64;
    let fy = y * n as f64;
    let ix = fx.floor() as usize % n;
    let iy = fy.floor() as usize % n;
    let wx = bspline_weights(fx - fx.floor());
    let wy = bspline_weights(fy - fy.floor());
    let mut acc = 0.0;
    for (a, wa) in wx.iter().enumerate() {
        let ia = (ix + n + a - 1) % n;
        let row = &coeff[ia * n..ia * n + n];
        let mut r = 0.0;
        for (b, wb) in wy.iter().enumerate() {
            let jb = (iy + n + b - 1) % n;
            r += wb * row[jb];
        }
        acc += wa * r;
    }
    acc
}

#[inline]
fn spline_eval2(ca: &[f64], cb: &[f64], n: usize, x: f64, y: f64) -> (f64, f64) {
    let fx = x * n as f64;
    let fy = y * n as f64;
    let ix = fx.floor() as usize % n;
    let iy = fy.floor() as usize % n;
    let wx = bspline_weights(fx - fx.floor());
    let wy = bspline_weights(fy - fy.floor());
    let (mut va, mut vb) = (0.0, 0.0);
    for (a, wa) in wx.iter().enumerate() {
        let ia = (ix + n + a - 1) % n;
        let (ra, rb) = (&ca[ia * n..ia * n + n], &cb[ia * n..ia * n + n]);
        let (mut sa, mut sb) = (0.0, 0.0);
        for (b, wb) in wy.iter().enumerate() {
            let jb = (iy + n + b - 1) % n;
            sa += wb * ra[jb];
            sb += wb * rb[jb];
        }
        va += wa * sa;
        vb += wa * sb;
    }
    (va, vb)
}
