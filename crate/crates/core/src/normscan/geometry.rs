//! Position of a Hölder triple in the triangle `ABC` of barycentric points
//! `(1/p, 1/q, 1/r′)`, with `A = (1,0,0)`, `B = (0,1,0)`, `C = (0,0,1)`.
//! `B₁ = (1/2,0,1/2)` is the midpoint of `AC` and `C₁ = (1/2,1/2,0)` that of `AB`.

use serde::Serialize;

use crate::error::Result;
use crate::holder::HolderTriple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    /// `1/r′ = 0`.
    AB,
    /// `1/q = 0`.
    AC,
    /// `1/p = 0`.
    BC,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Vertex {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Interior,
    /// On an open side.
    Side(Side),
    Vertex(Vertex),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership {
    pub point: (f64, f64, f64),
    pub location: Location,
    /// In `Ω = int(△ABC) ∪ (AC) ∪ (AB)`.
    pub inside_omega: bool,
}

impl Membership {
    /// The open side holding the point, if any.
    pub fn boundary_segment(&self) -> Option<Side> {
        match self.location {
            Location::Side(s) => Some(s),
            _ => None,
        }
    }
}

const ZERO_TOL: f64 = 1e-12;

pub fn triangle_membership(triple: &HolderTriple) -> Result<Membership> {
    let t = HolderTriple::new(triple.p, triple.q, triple.r_dual)?;
    let point = t.reciprocals();
    let (a, b, c) = point;
    let zero = |v: f64| v.abs() <= ZERO_TOL;
    let location = match (zero(a), zero(b), zero(c)) {
        (false, false, false) => Location::Interior,
        (false, false, true) => Location::Side(Side::AB),
        (false, true, false) => Location::Side(Side::AC),
        (true, false, false) => Location::Side(Side::BC),
        (false, true, true) => Location::Vertex(Vertex::A),
        (true, false, true) => Location::Vertex(Vertex::B),
        (true, true, false) => Location::Vertex(Vertex::C),
        (true, true, true) => unreachable!("reciprocals sum to one"),
    };
    let inside_omega = matches!(location, Location::Interior | Location::Side(Side::AB) | Location::Side(Side::AC));
    Ok(Membership {
        point,
        location,
        inside_omega,
    })
}
