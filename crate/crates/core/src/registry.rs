//! Named strategies behind trait objects, chosen at run time.

use crate::dressing::dress_levels_refined;
use crate::error::{Error, Result};
use crate::marchenko::{sample_potential, BoundStateSet};
use crate::potential::{Method, SampledPotential};
use crate::semiclassical::{PrimeModel, SemiclassicalModel, ZetaModel};

/// A family of interchangeable implementations keyed by name.
pub struct Registry<T: ?Sized> {
    family: &'static str,
    entries: Vec<(&'static str, Box<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(family: &'static str) -> Self {
        Registry {
            family,
            entries: Vec::new(),
        }
    }

    /// Adds `strategy`, replacing any earlier one with the same name.
    pub fn register(&mut self, name: &'static str, strategy: Box<T>) {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, strategy));
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| s.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                family: self.family,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }
}

/// Turns a bound-state set into a sampled potential on `[−x_max, x_max]`.
pub trait PotentialBuilder: Send + Sync {
    fn method(&self) -> Method;
    fn build(&self, bound: &BoundStateSet, x_max: f64, dx: f64) -> Result<SampledPotential>;
}

/// Pointwise determinant route.
pub struct MarchenkoBuilder;

impl PotentialBuilder for MarchenkoBuilder {
    fn method(&self) -> Method {
        Method::Marchenko
    }

    fn build(&self, bound: &BoundStateSet, x_max: f64, dx: f64) -> Result<SampledPotential> {
        sample_potential(bound, x_max, dx)
    }
}

/// Level-by-level Darboux route, substepped on coarse grids.
pub struct DressingBuilder;

impl PotentialBuilder for DressingBuilder {
    fn method(&self) -> Method {
        Method::Dressing
    }

    fn build(&self, bound: &BoundStateSet, x_max: f64, dx: f64) -> Result<SampledPotential> {
        dress_levels_refined(&bound.kappa, x_max, dx)?.potential(bound.v_infinity)
    }
}

pub fn potential_builders() -> Registry<dyn PotentialBuilder> {
    let mut r: Registry<dyn PotentialBuilder> = Registry::new("construction method");
    r.register("marchenko", Box::new(MarchenkoBuilder));
    r.register("dressing", Box::new(DressingBuilder));
    r
}

pub fn wkb_models() -> Registry<dyn SemiclassicalModel> {
    let mut r: Registry<dyn SemiclassicalModel> = Registry::new("WKB model");
    r.register("primes", Box::new(PrimeModel::default()));
    r.register("primes-leading", Box::new(PrimeModel { m_max: Some(1) }));
    r.register("zeta", Box::new(ZetaModel));
    r
}
