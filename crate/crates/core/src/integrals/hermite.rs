//! McMurchie–Davidson Hermite expansion coefficients and Coulomb R integrals.

use super::boys::boys;

/// `E^{ij}_t` for one Cartesian direction, with `i ≤ imax`, `j ≤ jmax`.
pub struct HermiteE {
    jmax: usize,
    tmax: usize,
    data: Vec<f64>,
}

impl HermiteE {
    /// `a`, `b` are the exponents; `qx = A_x − B_x`.
    pub fn new(imax: usize, jmax: usize, a: f64, b: f64, qx: f64) -> Self {
        let p = a + b;
        let mu = a * b / p;
        let tmax = imax + jmax;
        let stride_t = tmax + 1;
        let mut data = vec![0.0; (imax + 1) * (jmax + 1) * stride_t];
        let idx = |i: usize, j: usize, t: usize| (i * (jmax + 1) + j) * stride_t + t;
        data[idx(0, 0, 0)] = (-mu * qx * qx).exp();
        let get = |d: &Vec<f64>, i: usize, j: usize, t: isize| -> f64 {
            if t < 0 || t as usize > i + j {
                0.0
            } else {
                d[idx(i, j, t as usize)]
            }
        };
        // raise i along j = 0
        for i in 0..imax {
            for t in 0..=(i + 1) {
                let ti = t as isize;
                let v = get(&data, i, 0, ti - 1) / (2.0 * p)
                    - mu * qx / a * get(&data, i, 0, ti)
                    + (t + 1) as f64 * get(&data, i, 0, ti + 1);
                data[idx(i + 1, 0, t)] = v;
            }
        }
        // raise j for every i
        for i in 0..=imax {
            for j in 0..jmax {
                for t in 0..=(i + j + 1) {
                    let ti = t as isize;
                    let v = get(&data, i, j, ti - 1) / (2.0 * p)
                        + mu * qx / b * get(&data, i, j, ti)
                        + (t + 1) as f64 * get(&data, i, j, ti + 1);
                    data[idx(i, j + 1, t)] = v;
                }
            }
        }
        HermiteE { jmax, tmax, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, t: usize) -> f64 {
        if t > i + j {
            return 0.0;
        }
        self.data[(i * (self.jmax + 1) + j) * (self.tmax + 1) + t]
    }
}

/// `R_{tuv}(p, PC)` for all `t + u + v ≤ lmax`.
pub struct HermiteR {
    lmax: usize,
    data: Vec<f64>,
}

impl HermiteR {
    pub fn new(lmax: usize, p: f64, pc: [f64; 3]) -> Self {
        let r2 = pc[0] * pc[0] + pc[1] * pc[1] + pc[2] * pc[2];
        let f = boys(lmax, p * r2);
        let s = lmax + 1;
        let idx = |n: usize, t: usize, u: usize, v: usize| ((n * s + t) * s + u) * s + v;
        let mut data = vec![0.0; s * s * s * s];
        let mut pow = 1.0;
        for n in 0..=lmax {
            data[idx(n, 0, 0, 0)] = pow * f[n];
            pow *= -2.0 * p;
        }
        // R^n_{tuv} only needs order n+1 with total degree one lower, so fill
        // by increasing total degree L = t+u+v for n ≤ lmax − L
        for l in 1..=lmax {
            for n in 0..=(lmax - l) {
                for t in 0..=l {
                    for u in 0..=(l - t) {
                        let v = l - t - u;
                        let val = if t > 0 {
                            let a = if t > 1 {
                                (t - 1) as f64 * data[idx(n + 1, t - 2, u, v)]
                            } else {
                                0.0
                            };
                            a + pc[0] * data[idx(n + 1, t - 1, u, v)]
                        } else if u > 0 {
                            let a = if u > 1 {
                                (u - 1) as f64 * data[idx(n + 1, t, u - 2, v)]
                            } else {
                                0.0
                            };
                            a + pc[1] * data[idx(n + 1, t, u - 1, v)]
                        } else {
                            let a = if v > 1 {
                                (v - 1) as f64 * data[idx(n + 1, t, u, v - 2)]
                            } else {
                                0.0
                            };
                            a + pc[2] * data[idx(n + 1, t, u, v - 1)]
                        };
                        data[idx(n, t, u, v)] = val;
                    }
                }
            }
        }
        HermiteR { lmax, data }
    }

    #[inline]
    pub fn get(&self, t: usize, u: usize, v: usize) -> f64 {
        let s = self.lmax + 1;
        self.data[(t * s + u) * s + v]
    }
}
