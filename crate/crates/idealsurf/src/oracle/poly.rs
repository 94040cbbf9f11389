//! Polynomial height functions for graph surfaces, `phi(u, v)`.

use crate::error::{Error, Result};
use crate::oracle::jet::Jet;

/// Sparse bivariate polynomial given as `(u_power, v_power, coefficient)`
/// terms.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphPoly {
    pub terms: Vec<(u32, u32, f64)>,
}

impl GraphPoly {
    pub fn new(terms: Vec<(u32, u32, f64)>) -> Self {
        GraphPoly { terms }
    }

    /// Parses expressions like `u^3`, `0.25u^2 + 0.25v^2`, `u^2 + v^3`,
    /// or `2u v - 0.5v^2`. Multiplication is implicit, exponents are
    /// nonnegative integers.
    pub fn parse(expr: &str) -> Result<GraphPoly> {
        let cleaned: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(Error::PolyParse("empty expression".into()));
        }
        let mut terms = Vec::new();
        let bytes = cleaned.as_bytes();
        let mut pos = 0usize;
        while pos < bytes.len() {
            let mut sign = 1.0;
            while pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
                if bytes[pos] == b'-' {
                    sign = -sign;
                }
                pos += 1;
            }
            if pos >= bytes.len() {
                return Err(Error::PolyParse("dangling sign".into()));
            }
            let mut coeff = sign;
            let mut pu = 0u32;
            let mut pv = 0u32;
            let mut saw_factor = false;
            while pos < bytes.len() && bytes[pos] != b'+' && bytes[pos] != b'-' {
                match bytes[pos] {
                    b'*' => {
                        pos += 1;
                    }
                    b'u' | b'v' => {
                        let var = bytes[pos];
                        pos += 1;
                        let mut exp = 1u32;
                        if pos < bytes.len() && bytes[pos] == b'^' {
                            pos += 1;
                            let start = pos;
                            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                                pos += 1;
                            }
                            if start == pos {
                                return Err(Error::PolyParse("missing exponent".into()));
                            }
                            exp = cleaned[start..pos]
                                .parse()
                                .map_err(|_| Error::PolyParse("exponent overflow".into()))?;
                            if exp > 32 {
                                return Err(Error::PolyParse(format!("exponent {exp} too large")));
                            }
                        }
                        if var == b'u' {
                            pu = pu
                                .checked_add(exp)
                                .ok_or_else(|| Error::PolyParse("exponent overflow".into()))?;
                        } else {
                            pv = pv
                                .checked_add(exp)
                                .ok_or_else(|| Error::PolyParse("exponent overflow".into()))?;
                        }
                        saw_factor = true;
                    }
                    c if c.is_ascii_digit() || c == b'.' => {
                        let start = pos;
                        while pos < bytes.len()
                            && (bytes[pos].is_ascii_digit() || bytes[pos] == b'.')
                        {
                            pos += 1;
                        }
                        let num: f64 = cleaned[start..pos]
                            .parse()
                            .map_err(|_| Error::PolyParse(format!("bad number in {expr:?}")))?;
                        coeff *= num;
                        saw_factor = true;
                    }
                    other => {
                        return Err(Error::PolyParse(format!(
                            "unexpected character {:?}",
                            other as char
                        )));
                    }
                }
            }
            if !saw_factor {
                return Err(Error::PolyParse("empty term".into()));
            }
            if pu > 32 || pv > 32 {
                return Err(Error::PolyParse("degree too large".into()));
            }
            terms.push((pu, pv, coeff));
        }
        Ok(GraphPoly { terms })
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(i, j, c)| c * u.powi(i as i32) * v.powi(j as i32))
            .sum()
    }

    pub fn eval_jet(&self, u: &Jet, v: &Jet) -> Jet {
        let mut out = Jet::zero();
        for &(i, j, c) in &self.terms {
            out = out + (u.powi(i as usize) * v.powi(j as usize)).scale(c);
        }
        out
    }

    /// Canonical text form, for report echoing.
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for &(i, j, c) in &self.terms {
            let mut t = format!("{c}");
            if i > 0 {
                t.push_str(&format!("u^{i}"));
            }
            if j > 0 {
                t.push_str(&format!("v^{j}"));
            }
            parts.push(t);
        }
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_forms() {
        let p = GraphPoly::parse("u^3").unwrap();
        assert_eq!(p.terms, vec![(3, 0, 1.0)]);
        let p = GraphPoly::parse("0.25u^2 + 0.25v^2").unwrap();
        assert_eq!(p.terms, vec![(2, 0, 0.25), (0, 2, 0.25)]);
        let p = GraphPoly::parse("u^2 + v^3").unwrap();
        assert_eq!(p.eval(2.0, 1.0), 5.0);
        let p = GraphPoly::parse("-0.5uv + 2").unwrap();
        assert_eq!(p.eval(1.0, 1.0), 1.5);
        let p = GraphPoly::parse("2u*v^2").unwrap();
        assert_eq!(p.eval(3.0, 2.0), 24.0);
    }

    #[test]
    fn rejects_garbage() {
        assert!(GraphPoly::parse("").is_err());
        assert!(GraphPoly::parse("u^").is_err());
        assert!(GraphPoly::parse("u^999").is_err());
        assert!(GraphPoly::parse("x+y").is_err());
        assert!(GraphPoly::parse("+").is_err());
    }
}
