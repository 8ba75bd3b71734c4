use std::collections::BTreeMap;

use thiserror::Error;

use super::Planner;
use crate::baselines::{ConvexLanePlanner, IndependentPlanner, SbmpPlanner};
use crate::planner::sigp::SigpPlanner;

pub type PlannerFactory = fn() -> Box<dyn Planner>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("unknown planner '{name}' (available: {})", available.join(", "))]
    Unknown { name: String, available: Vec<String> },
    #[error("planner '{0}' is already registered")]
    Duplicate(String),
}

/// Planners addressable by name, as used by the command line and scenarios.
pub struct PlannerRegistry {
    entries: BTreeMap<&'static str, PlannerFactory>,
}

impl PlannerRegistry {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    /// `sigp`, `independent`, `sbmp` and `convex_lane`.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register("sigp", || Box::new(SigpPlanner)).expect("fresh registry");
        r.register("independent", || Box::new(IndependentPlanner)).expect("fresh registry");
        r.register("sbmp", || Box::new(SbmpPlanner)).expect("fresh registry");
        r.register("convex_lane", || Box::new(ConvexLanePlanner)).expect("fresh registry");
        r
    }

    pub fn register(&mut self, name: &'static str, factory: PlannerFactory) -> Result<(), RegistryError> {
        if self.entries.contains_key(name) {
            return Err(RegistryError::Duplicate(name.to_string()));
        }
        self.entries.insert(name, factory);
        Ok(())
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn Planner>, RegistryError> {
        self.entries.get(name).map(|f| f()).ok_or_else(|| RegistryError::Unknown {
            name: name.to_string(),
            available: self.names().iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for PlannerRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}
