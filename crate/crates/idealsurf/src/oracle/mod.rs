//! Closed-form parametric surfaces with exact chart-level differential
//! geometry, used as ground truth for every discrete operator.
//!
//! All quantities are evaluated through order-6 Taylor jets, so sixth-order
//! expressions like the bilaplacian of the mean curvature come out exact at
//! the sample point. The unit normal is `-(f_u x f_v)/|f_u x f_v|` for every
//! family, which makes the sphere's mean curvature `+2/r`; the discrete
//! pipeline follows the same convention.

pub mod jet;
mod poly;

pub use poly::GraphPoly;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::meshgen;
use jet::Jet;

#[derive(Clone, Debug)]
pub enum Domain {
    Rect { u: (f64, f64), v: (f64, f64) },
    Disk { radius: f64 },
}

impl Domain {
    pub fn contains(&self, u: f64, v: f64) -> bool {
        match self {
            Domain::Rect { u: (u0, u1), v: (v0, v1) } => {
                u >= *u0 && u <= *u1 && v >= *v0 && v <= *v1
            }
            Domain::Disk { radius } => u * u + v * v <= radius * radius * (1.0 + 1e-12),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Family {
    Plane,
    Sphere { r: f64 },
    Cylinder { r: f64 },
    Graph(GraphPoly),
}

#[derive(Clone, Debug)]
pub struct ParametricSurface {
    pub family: Family,
    pub domain: Domain,
}

/// Exact pointwise curvature data of a chart sample.
#[derive(Clone, Debug)]
pub struct CurvatureSample {
    pub point: Vector3<f64>,
    pub h: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub a_norm2: f64,
    pub a0_norm2: f64,
    pub grad_h: Vector3<f64>,
    pub grad_h_norm2: f64,
    pub lap_h: f64,
    pub bilap_h: f64,
    pub el_residual: f64,
}

impl ParametricSurface {
    pub fn plane(domain: Domain) -> Self {
        ParametricSurface { family: Family::Plane, domain }
    }

    pub fn plane_disk(radius: f64) -> Self {
        Self::plane(Domain::Disk { radius })
    }

    pub fn sphere(r: f64) -> Self {
        ParametricSurface {
            family: Family::Sphere { r },
            // The colatitude/longitude chart is singular at the poles; keep
            // the domain clear of them so chart-level derivative quantities
            // (Simons residual in particular) stay free of 1/sin blowup.
            domain: Domain::Rect {
                u: (0.15, std::f64::consts::PI - 0.15),
                v: (0.0, 2.0 * std::f64::consts::PI),
            },
        }
    }

    pub fn cylinder(r: f64) -> Self {
        ParametricSurface {
            family: Family::Cylinder { r },
            domain: Domain::Rect { u: (-1.0, 1.0), v: (0.0, 2.0) },
        }
    }

    pub fn graph(poly: GraphPoly, domain: Domain) -> Self {
        ParametricSurface { family: Family::Graph(poly), domain }
    }

    pub fn graph_disk(expr: &str, radius: f64) -> Result<Self> {
        Ok(Self::graph(GraphPoly::parse(expr)?, Domain::Disk { radius }))
    }

    /// Chart map as order-6 jets at `(u, v)`.
    fn chart_jets(&self, u: f64, v: f64) -> [Jet; 3] {
        let uj = Jet::var_u(u);
        let vj = Jet::var_v(v);
        match &self.family {
            Family::Plane => [uj, vj, Jet::zero()],
            Family::Sphere { r } => [
                (uj.sin() * vj.cos()).scale(*r),
                (uj.sin() * vj.sin()).scale(*r),
                uj.cos().scale(*r),
            ],
            Family::Cylinder { r } => [uj.cos().scale(*r), uj.sin().scale(*r), vj],
            Family::Graph(p) => [uj, vj, p.eval_jet(&uj, &vj)],
        }
    }

    /// Chart point in ambient space.
    pub fn point(&self, u: f64, v: f64) -> Vector3<f64> {
        let f = self.chart_jets(u, v);
        Vector3::new(f[0].val(), f[1].val(), f[2].val())
    }

    fn chart(&self, u: f64, v: f64) -> Result<Chart> {
        if !self.domain.contains(u, v) {
            return Err(Error::OutsideDomain { u, v });
        }
        Chart::new(self.chart_jets(u, v), u, v)
    }

    /// Exact curvature sample, including the sixth-order Euler-Lagrange
    /// residual `lap^2 H + |A|^2 lap H - (A0)^{ij} grad_i H grad_j H`.
    ///
    /// The rigid families have textbook closed-form curvature fields, which
    /// are returned directly: on small spheres, jet roundoff through the two
    /// composed Laplacians otherwise pollutes `bilap_h` at the 1e-9 level.
    /// The jet path serves the graph family, where it is cross-checked
    /// against finite differences.
    pub fn exact_curvature(&self, u: f64, v: f64) -> Result<CurvatureSample> {
        if !self.domain.contains(u, v) {
            return Err(Error::OutsideDomain { u, v });
        }
        let point = self.point(u, v);
        match &self.family {
            Family::Plane => Ok(flat_sample(point)),
            Family::Sphere { r } => Ok(sphere_sample(*r, point)),
            Family::Cylinder { r } => Ok(cylinder_sample(*r, point)),
            Family::Graph(_) => Ok(self.chart(u, v)?.sample()),
        }
    }

    /// Norm of the Simons identity defect
    /// `lap h_ij - cov_i cov_j H - H h_im h^m_j + |A|^2 h_ij`,
    /// which vanishes on every smooth immersion.
    pub fn simons_residual(&self, u: f64, v: f64) -> Result<f64> {
        let c = self.chart(u, v)?;
        Ok(c.simons_residual())
    }

    /// Exact `(|grad H|, |grad A|, |grad A0|)` with full covariant tensor
    /// norms.
    pub fn grad_a_norms(&self, u: f64, v: f64) -> Result<(f64, f64, f64)> {
        let c = self.chart(u, v)?;
        Ok(c.grad_a_norms())
    }

    /// Triangulated chart sample with per-vertex exact curvature attached.
    ///
    /// The sphere family produces a closed latitude/longitude mesh; the other
    /// families triangulate their rectangle or disk domain with the domain
    /// boundary mapping to mesh boundary loops. Faces are wound
    /// counterclockwise in `(u, v)`, so mesh vertex normals oppose the
    /// oracle's normal convention, which is what the discrete sign rule
    /// expects.
    pub fn sample_mesh(&self, resolution: usize) -> Result<(Mesh, Vec<CurvatureSample>)> {
        if resolution < 2 {
            return Err(Error::Resolution(resolution));
        }
        if let Family::Sphere { r } = self.family {
            let (uv, faces) = meshgen::latlong_layout(resolution);
            let positions: Vec<Vector3<f64>> =
                uv.iter().map(|&(u, v)| sphere_point(r, u, v)).collect();
            let samples: Vec<CurvatureSample> = positions
                .iter()
                .map(|p| sphere_sample(r, *p))
                .collect();
            let mesh = Mesh::new(positions, faces)?;
            return Ok((mesh, samples));
        }
        let (uv, faces) = match &self.domain {
            Domain::Rect { u, v } => meshgen::rect_layout(resolution, *u, *v),
            Domain::Disk { radius } => {
                let (unit, faces) = meshgen::disk_grid_layout(resolution);
                (
                    unit.iter().map(|&(a, b)| (a * radius, b * radius)).collect(),
                    faces,
                )
            }
        };
        let mut positions = Vec::with_capacity(uv.len());
        let mut samples = Vec::with_capacity(uv.len());
        for &(u, v) in &uv {
            let c = self.chart(u, v)?;
            let s = c.sample();
            positions.push(s.point);
            samples.push(s);
        }
        let mesh = Mesh::new(positions, faces)?;
        Ok((mesh, samples))
    }

    /// Midpoint-rule chart quadrature of the energy `int |grad H|^2 dmu`.
    pub fn energy_quadrature(&self, resolution: usize) -> Result<f64> {
        let mut total = 0.0;
        match self.domain {
            Domain::Rect { u: (u0, u1), v: (v0, v1) } => {
                let n = resolution;
                let (du, dv) = ((u1 - u0) / n as f64, (v1 - v0) / n as f64);
                for i in 0..n {
                    for j in 0..n {
                        let u = u0 + (i as f64 + 0.5) * du;
                        let v = v0 + (j as f64 + 0.5) * dv;
                        let c = self.chart(u, v)?;
                        total += c.grad_h_norm2() * c.sqrtg.val() * du * dv;
                    }
                }
            }
            Domain::Disk { radius } => {
                let nr = resolution;
                let nth = resolution;
                let dr = radius / nr as f64;
                let dth = 2.0 * std::f64::consts::PI / nth as f64;
                for i in 0..nr {
                    let rho = (i as f64 + 0.5) * dr;
                    for j in 0..nth {
                        let th = (j as f64 + 0.5) * dth;
                        let (u, v) = (rho * th.cos(), rho * th.sin());
                        let c = self.chart(u, v)?;
                        total += c.grad_h_norm2() * c.sqrtg.val() * rho * dr * dth;
                    }
                }
            }
        }
        Ok(total)
    }
}

fn sphere_point(r: f64, u: f64, v: f64) -> Vector3<f64> {
    Vector3::new(r * u.sin() * v.cos(), r * u.sin() * v.sin(), r * u.cos())
}

fn flat_sample(point: Vector3<f64>) -> CurvatureSample {
    CurvatureSample {
        point,
        h: 0.0,
        kappa1: 0.0,
        kappa2: 0.0,
        a_norm2: 0.0,
        a0_norm2: 0.0,
        grad_h: Vector3::zeros(),
        grad_h_norm2: 0.0,
        lap_h: 0.0,
        bilap_h: 0.0,
        el_residual: 0.0,
    }
}

fn cylinder_sample(r: f64, point: Vector3<f64>) -> CurvatureSample {
    CurvatureSample {
        point,
        h: 1.0 / r,
        kappa1: 1.0 / r,
        kappa2: 0.0,
        a_norm2: 1.0 / (r * r),
        a0_norm2: 0.5 / (r * r),
        grad_h: Vector3::zeros(),
        grad_h_norm2: 0.0,
        lap_h: 0.0,
        bilap_h: 0.0,
        el_residual: 0.0,
    }
}

fn sphere_sample(r: f64, point: Vector3<f64>) -> CurvatureSample {
    CurvatureSample {
        point,
        h: 2.0 / r,
        kappa1: 1.0 / r,
        kappa2: 1.0 / r,
        a_norm2: 2.0 / (r * r),
        a0_norm2: 0.0,
        grad_h: Vector3::zeros(),
        grad_h_norm2: 0.0,
        lap_h: 0.0,
        bilap_h: 0.0,
        el_residual: 0.0,
    }
}

/// All chart-level jets needed by the oracle operations.
struct Chart {
    f: [Jet; 3],
    fu: [Jet; 3],
    fv: [Jet; 3],
    g: [[Jet; 2]; 2],
    ginv: [[Jet; 2]; 2],
    sqrtg: Jet,
    h: [[Jet; 2]; 2],
    big_h: Jet,
    a_norm2: Jet,
}

fn dot3(a: &[Jet; 3], b: &[Jet; 3]) -> Jet {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: &[Jet; 3], b: &[Jet; 3]) -> [Jet; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn d3(f: &[Jet; 3], along_u: bool) -> [Jet; 3] {
    if along_u {
        [f[0].du(), f[1].du(), f[2].du()]
    } else {
        [f[0].dv(), f[1].dv(), f[2].dv()]
    }
}

impl Chart {
    fn new(f: [Jet; 3], u: f64, v: f64) -> Result<Chart> {
        let fu = d3(&f, true);
        let fv = d3(&f, false);
        let e = dot3(&fu, &fu);
        let ff = dot3(&fu, &fv);
        let g2 = dot3(&fv, &fv);
        let det = e * g2 - ff * ff;
        if !(det.val() > 1e-14) || !det.val().is_finite() {
            return Err(Error::DegenerateMetric { u, v });
        }
        let idet = det.recip();
        let ginv = [[g2 * idet, -ff * idet], [-ff * idet, e * idet]];
        let sqrtg = det.sqrt();

        // nu = -(fu x fv)/|fu x fv|; the sphere then has H = +2/r.
        let n = cross3(&fu, &fv);
        let inv_norm = sqrtg.recip();
        let nu = [
            -(n[0] * inv_norm),
            -(n[1] * inv_norm),
            -(n[2] * inv_norm),
        ];

        let fuu = d3(&fu, true);
        let fuv = d3(&fu, false);
        let fvv = d3(&fv, false);
        let h = [
            [dot3(&fuu, &nu), dot3(&fuv, &nu)],
            [dot3(&fuv, &nu), dot3(&fvv, &nu)],
        ];

        let mut big_h = Jet::zero();
        for i in 0..2 {
            for j in 0..2 {
                big_h = big_h + ginv[i][j] * h[i][j];
            }
        }
        let mut a_norm2 = Jet::zero();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        a_norm2 = a_norm2 + ginv[i][k] * ginv[j][l] * h[i][j] * h[k][l];
                    }
                }
            }
        }

        Ok(Chart { f, fu, fv, g: [[e, ff], [ff, g2]], ginv, sqrtg, h, big_h, a_norm2 })
    }

    /// Laplace-Beltrami of a scalar jet:
    /// `(1/sqrt g) d_i (sqrt g g^{ij} d_j s)`.
    fn laplace(&self, s: &Jet) -> Jet {
        let su = s.du();
        let sv = s.dv();
        let flux_u = self.sqrtg * (self.ginv[0][0] * su + self.ginv[0][1] * sv);
        let flux_v = self.sqrtg * (self.ginv[1][0] * su + self.ginv[1][1] * sv);
        (flux_u.du() + flux_v.dv()) * self.sqrtg.recip()
    }

    /// Christoffel symbols `gamma[k][i][j]` of the induced metric.
    fn christoffel(&self) -> [[[Jet; 2]; 2]; 2] {
        let dg = [
            [
                [self.g[0][0].du(), self.g[0][1].du()],
                [self.g[1][0].du(), self.g[1][1].du()],
            ],
            [
                [self.g[0][0].dv(), self.g[0][1].dv()],
                [self.g[1][0].dv(), self.g[1][1].dv()],
            ],
        ];
        let mut gamma = [[[Jet::zero(); 2]; 2]; 2];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut s = Jet::zero();
                    for l in 0..2 {
                        s = s + self.ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                    }
                    gamma[k][i][j] = s.scale(0.5);
                }
            }
        }
        gamma
    }

    fn grad_h_norm2(&self) -> f64 {
        let hu = self.big_h.du().val();
        let hv = self.big_h.dv().val();
        let gi = &self.ginv;
        gi[0][0].val() * hu * hu + 2.0 * gi[0][1].val() * hu * hv + gi[1][1].val() * hv * hv
    }

    fn sample(&self) -> CurvatureSample {
        let point = Vector3::new(self.f[0].val(), self.f[1].val(), self.f[2].val());
        let h_val = self.big_h.val();
        let det_h = (self.h[0][0] * self.h[1][1] - self.h[0][1] * self.h[0][1]).val();
        let det_g = (self.g[0][0] * self.g[1][1] - self.g[0][1] * self.g[0][1]).val();
        let gauss = det_h / det_g;
        let disc = (h_val * h_val / 4.0 - gauss).max(0.0).sqrt();
        let kappa1 = h_val / 2.0 + disc;
        let kappa2 = h_val / 2.0 - disc;

        let a_norm2 = self.a_norm2.val();
        let a0_norm2 = (a_norm2 - h_val * h_val / 2.0).max(0.0);

        // Ambient gradient of H: g^{ij} dH_j f_i.
        let hu = self.big_h.du().val();
        let hv = self.big_h.dv().val();
        let gi = &self.ginv;
        let cu = gi[0][0].val() * hu + gi[0][1].val() * hv;
        let cv = gi[1][0].val() * hu + gi[1][1].val() * hv;
        let fu = Vector3::new(self.fu[0].val(), self.fu[1].val(), self.fu[2].val());
        let fv = Vector3::new(self.fv[0].val(), self.fv[1].val(), self.fv[2].val());
        let grad_h = fu * cu + fv * cv;
        let grad_h_norm2 = self.grad_h_norm2();

        let lap = self.laplace(&self.big_h);
        let bilap = self.laplace(&lap);

        // (A0)^{ij} grad_i H grad_j H with raised indices.
        let dh = [hu, hv];
        let mut contraction = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut a0up = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        let a0kl = self.h[k][l].val() - 0.5 * h_val * self.g[k][l].val();
                        a0up += gi[i][k].val() * gi[j][l].val() * a0kl;
                    }
                }
                contraction += a0up * dh[i] * dh[j];
            }
        }

        let el = bilap.val() + a_norm2 * lap.val() - contraction;

        CurvatureSample {
            point,
            h: h_val,
            kappa1,
            kappa2,
            a_norm2,
            a0_norm2,
            grad_h,
            grad_h_norm2,
            lap_h: lap.val(),
            bilap_h: bilap.val(),
            el_residual: el,
        }
    }

    /// Covariant derivative of the second fundamental form,
    /// `T[k][i][j] = cov_k h_ij`, as jets.
    fn grad_h_tensor(&self, gamma: &[[[Jet; 2]; 2]; 2]) -> [[[Jet; 2]; 2]; 2] {
        let mut t = [[[Jet::zero(); 2]; 2]; 2];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let dh = if k == 0 { self.h[i][j].du() } else { self.h[i][j].dv() };
                    let mut s = dh;
                    for m in 0..2 {
                        s = s - gamma[m][k][i] * self.h[m][j] - gamma[m][k][j] * self.h[i][m];
                    }
                    t[k][i][j] = s;
                }
            }
        }
        t
    }

    fn grad_a_norms(&self) -> (f64, f64, f64) {
        let gamma = self.christoffel();
        let t = self.grad_h_tensor(&gamma);
        let dh = [self.big_h.du().val(), self.big_h.dv().val()];
        let gi = [
            [self.ginv[0][0].val(), self.ginv[0][1].val()],
            [self.ginv[1][0].val(), self.ginv[1][1].val()],
        ];
        let g = [
            [self.g[0][0].val(), self.g[0][1].val()],
            [self.g[1][0].val(), self.g[1][1].val()],
        ];
        let mut grad_h2 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                grad_h2 += gi[i][j] * dh[i] * dh[j];
            }
        }
        let mut tv = [[[0.0; 2]; 2]; 2];
        let mut t0 = [[[0.0; 2]; 2]; 2];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    tv[k][i][j] = t[k][i][j].val();
                    t0[k][i][j] = tv[k][i][j] - 0.5 * dh[k] * g[i][j];
                }
            }
        }
        let contract = |s: &[[[f64; 2]; 2]; 2]| {
            let mut total = 0.0;
            for k in 0..2 {
                for a in 0..2 {
                    for i in 0..2 {
                        for b in 0..2 {
                            for j in 0..2 {
                                for c in 0..2 {
                                    total +=
                                        gi[k][a] * gi[i][b] * gi[j][c] * s[k][i][j] * s[a][b][c];
                                }
                            }
                        }
                    }
                }
            }
            total
        };
        (
            grad_h2.max(0.0).sqrt(),
            contract(&tv).max(0.0).sqrt(),
            contract(&t0).max(0.0).sqrt(),
        )
    }

    fn simons_residual(&self) -> f64 {
        let gamma = self.christoffel();
        let t = self.grad_h_tensor(&gamma);

        // Second covariant derivative of h: s[l][k][i][j] = cov_l T_kij.
        let mut s = [[[[Jet::zero(); 2]; 2]; 2]; 2];
        for l in 0..2 {
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let dt = if l == 0 { t[k][i][j].du() } else { t[k][i][j].dv() };
                        let mut r = dt;
                        for m in 0..2 {
                            r = r
                                - gamma[m][l][k] * t[m][i][j]
                                - gamma[m][l][i] * t[k][m][j]
                                - gamma[m][l][j] * t[k][i][m];
                        }
                        s[l][k][i][j] = r;
                    }
                }
            }
        }

        // Rough Laplacian, covariant Hessian of H, and the Weingarten square.
        let h_val = self.big_h.val();
        let a2 = self.a_norm2.val();
        let gi = [
            [self.ginv[0][0].val(), self.ginv[0][1].val()],
            [self.ginv[1][0].val(), self.ginv[1][1].val()],
        ];
        let hu = self.big_h.du();
        let hv = self.big_h.dv();
        let dh = [hu, hv];
        let d2h = [[hu.du(), hu.dv()], [hv.du(), hv.dv()]];

        let mut resid = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut lap_h_ij = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        lap_h_ij += gi[k][l] * s[l][k][i][j].val();
                    }
                }
                let mut hess = d2h[i][j].val();
                for k in 0..2 {
                    hess -= gamma[k][i][j].val() * dh[k].val();
                }
                let mut hh = 0.0;
                for m in 0..2 {
                    for n in 0..2 {
                        hh += self.h[i][m].val() * gi[m][n] * self.h[n][j].val();
                    }
                }
                resid[i][j] =
                    lap_h_ij - hess - h_val * hh + a2 * self.h[i][j].val();
            }
        }
        let mut norm2 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        norm2 += gi[i][k] * gi[j][l] * resid[i][j] * resid[k][l];
                    }
                }
            }
        }
        norm2.max(0.0).sqrt()
    }
}
