use super::{QubitId, RegisterMap, Role};
use crate::{Error, Result};

/// Hands out fresh qubit indices and records their roles and groups.
#[derive(Clone, Debug)]
pub struct QubitAllocator {
    roles: Vec<Role>,
    groups: Vec<(String, Vec<QubitId>, Role)>,
    cap: usize,
}

impl QubitAllocator {
    pub fn new(cap: usize) -> Self {
        QubitAllocator {
            roles: Vec::new(),
            groups: Vec::new(),
            cap,
        }
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn fresh(&mut self, role: Role) -> Result<QubitId> {
        if self.roles.len() >= self.cap {
            return Err(Error::ResourceLimit(format!(
                "more than {} qubits requested",
                self.cap
            )));
        }
        self.roles.push(role);
        Ok(QubitId(self.roles.len() - 1))
    }

    pub fn fresh_many(&mut self, count: usize, role: Role) -> Result<Vec<QubitId>> {
        (0..count).map(|_| self.fresh(role)).collect()
    }

    /// Allocates a named register group.
    pub fn group(&mut self, name: &str, count: usize, role: Role) -> Result<Vec<QubitId>> {
        let qs = self.fresh_many(count, role)?;
        self.groups.push((name.to_string(), qs.clone(), role));
        Ok(qs)
    }

    pub fn into_registers(self) -> Result<RegisterMap> {
        let mut map = RegisterMap::new(0, Role::Ancilla);
        map.roles = self.roles;
        for (name, qs, role) in &self.groups {
            map.add_group(name, qs, *role)?;
        }
        Ok(map)
    }
}
