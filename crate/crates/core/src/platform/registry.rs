use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::PlatformError;
use crate::anthro::{ChildProfile, Sex};
use crate::geostat::LatLon;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Child {
    pub id: String,
    pub sex: Sex,
    pub birth_date: NaiveDate,
    pub home: LatLon,
    pub chw_id: String,
}

impl Child {
    pub fn profile(&self) -> ChildProfile {
        ChildProfile { sex: self.sex, birth_date: self.birth_date }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chw {
    pub id: String,
    pub handle: String,
    pub home: LatLon,
    pub team_id: Option<String>,
    /// Hidden from the individual leaderboard.
    pub opt_out: bool,
}

/// Children, CHWs and their teams.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Registry {
    children: BTreeMap<String, Child>,
    chws: BTreeMap<String, Chw>,
}

impl Registry {
    /// Checks id uniqueness and that every child's CHW exists.
    pub fn new(children: Vec<Child>, chws: Vec<Chw>) -> Result<Self, PlatformError> {
        let mut reg = Registry::default();
        for w in chws {
            if w.id.is_empty() {
                return Err(PlatformError::Invalid("empty CHW id".into()));
            }
            if let Some(prev) = reg.chws.insert(w.id.clone(), w) {
                return Err(PlatformError::Invalid(format!("duplicate CHW id {}", prev.id)));
            }
        }
        for c in children {
            if c.id.is_empty() {
                return Err(PlatformError::Invalid("empty child id".into()));
            }
            if !reg.chws.contains_key(&c.chw_id) {
                return Err(PlatformError::Invalid(format!("child {} assigned to unknown CHW {}", c.id, c.chw_id)));
            }
            if let Some(prev) = reg.children.insert(c.id.clone(), c) {
                return Err(PlatformError::Invalid(format!("duplicate child id {}", prev.id)));
            }
        }
        Ok(reg)
    }

    pub fn child(&self, id: &str) -> Option<&Child> {
        self.children.get(id)
    }

    pub fn chw(&self, id: &str) -> Option<&Chw> {
        self.chws.get(id)
    }

    pub fn children(&self) -> impl Iterator<Item = &Child> {
        self.children.values()
    }

    pub fn chws(&self) -> impl Iterator<Item = &Chw> {
        self.chws.values()
    }

    pub fn children_of<'a>(&'a self, chw_id: &'a str) -> impl Iterator<Item = &'a Child> + 'a {
        self.children.values().filter(move |c| c.chw_id == chw_id)
    }

    pub fn teams(&self) -> BTreeMap<String, Vec<String>> {
        let mut teams: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for w in self.chws.values() {
            if let Some(t) = &w.team_id {
                teams.entry(t.clone()).or_default().push(w.id.clone());
            }
        }
        teams
    }

    pub fn assigned(&self, chw_id: &str) -> BTreeSet<String> {
        self.children_of(chw_id).map(|c| c.id.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chw(id: &str, team: Option<&str>) -> Chw {
        Chw {
            id: id.into(),
            handle: id.to_uppercase(),
            home: LatLon::new(18.5, 73.8),
            team_id: team.map(Into::into),
            opt_out: false,
        }
    }

    fn child(id: &str, chw: &str) -> Child {
        Child {
            id: id.into(),
            sex: Sex::F,
            birth_date: NaiveDate::from_ymd_opt(2022, 1, 1).unwrap(),
            home: LatLon::new(18.5, 73.8),
            chw_id: chw.into(),
        }
    }

    #[test]
    fn integrity_rules() {
        let r =
            Registry::new(vec![child("c1", "w1"), child("c2", "w2")], vec![chw("w1", Some("t")), chw("w2", Some("t"))])
                .unwrap();
        assert_eq!(r.teams()["t"], vec!["w1".to_string(), "w2".to_string()]);
        assert_eq!(r.assigned("w1").len(), 1);
        assert!(Registry::new(vec![child("c1", "nobody")], vec![chw("w1", None)]).is_err());
        assert!(Registry::new(vec![child("c1", "w1"), child("c1", "w1")], vec![chw("w1", None)]).is_err());
        assert!(Registry::new(vec![], vec![chw("w1", None), chw("w1", None)]).is_err());
    }
}
