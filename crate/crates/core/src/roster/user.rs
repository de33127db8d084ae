use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::RosterError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(String);

impl UserId {
    pub fn new(id: impl Into<String>) -> Self {
        UserId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for UserId {
    fn from(id: &str) -> Self {
        UserId::new(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Student,
    Teacher,
    Administrator,
    Developer,
    SystemAdministrator,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Student => "student",
            Role::Teacher => "teacher",
            Role::Administrator => "administrator",
            Role::Developer => "developer",
            Role::SystemAdministrator => "system_administrator",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = RosterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "student" => Role::Student,
            "teacher" => Role::Teacher,
            "administrator" => Role::Administrator,
            "developer" => Role::Developer,
            "system_administrator" => Role::SystemAdministrator,
            other => return Err(RosterError::InvalidRole(other.to_string())),
        })
    }
}

/// Salted SHA-256 of a credential, stored as `sha256$<salt>$<digest>` (hex).
#[derive(Clone, PartialEq, Eq, Default)]
pub struct CredentialHash(String);

impl CredentialHash {
    pub fn create(secret: &str) -> Self {
        let mut salt = [0u8; 16];
        rand::thread_rng().fill_bytes(&mut salt);
        Self::with_salt(secret, &salt)
    }

    fn with_salt(secret: &str, salt: &[u8]) -> Self {
        let digest = Sha256::new()
            .chain_update(salt)
            .chain_update(secret.as_bytes())
            .finalize();
        CredentialHash(format!("sha256${}${}", hex::encode(salt), hex::encode(digest)))
    }

    pub fn from_stored(stored: impl Into<String>) -> Self {
        CredentialHash(stored.into())
    }

    pub fn as_stored(&self) -> &str {
        &self.0
    }

    pub fn verify(&self, secret: &str) -> bool {
        let mut parts = self.0.split('$');
        let (Some("sha256"), Some(salt), Some(_), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return false;
        };
        let Ok(salt) = hex::decode(salt) else {
            return false;
        };
        let candidate = Self::with_salt(secret, &salt);
        // compare without early exit
        candidate.0.len() == self.0.len()
            && candidate
                .0
                .bytes()
                .zip(self.0.bytes())
                .fold(0u8, |acc, (a, b)| acc | (a ^ b))
                == 0
    }
}

impl fmt::Debug for CredentialHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CredentialHash(..)")
    }
}

/// A registered user. The credential hash is never serialized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub id: UserId,
    pub display_name: String,
    pub role: Role,
    #[serde(skip)]
    pub credential: CredentialHash,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teacher_id: Option<UserId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub school_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateUser {
    pub name: String,
    pub role: String,
    pub credential: String,
    #[serde(default)]
    pub teacher_id: Option<UserId>,
    #[serde(default)]
    pub school_id: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Roster {
    users: BTreeMap<UserId, User>,
    next_id: u64,
}

impl Roster {
    pub fn from_users(users: impl IntoIterator<Item = User>) -> Self {
        let mut roster = Roster::default();
        for u in users {
            if let Some(n) = u.id.as_str().strip_prefix("u-").and_then(|n| n.parse::<u64>().ok()) {
                roster.next_id = roster.next_id.max(n);
            }
            roster.users.insert(u.id.clone(), u);
        }
        roster
    }

    pub fn get(&self, id: &UserId) -> Option<&User> {
        self.users.get(id)
    }

    pub fn users(&self) -> impl Iterator<Item = &User> {
        self.users.values()
    }

    pub fn by_name<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a User> + 'a {
        self.users.values().filter(move |u| u.display_name == name)
    }

    /// Students registered under `teacher`, ordered by display name then id.
    pub fn students_of(&self, teacher: &UserId) -> Vec<&User> {
        let mut v: Vec<&User> = self
            .users
            .values()
            .filter(|u| u.role == Role::Student && u.teacher_id.as_ref() == Some(teacher))
            .collect();
        v.sort_by(|a, b| a.display_name.cmp(&b.display_name).then_with(|| a.id.cmp(&b.id)));
        v
    }

    /// Validates the request and registers the user under a fresh `u-<n>` id.
    ///
    /// A student registered under a teacher without an explicit school joins
    /// the teacher's school. Names are unique within a school.
    pub fn create_user(&mut self, req: CreateUser) -> Result<User, RosterError> {
        let role: Role = req.role.parse()?;
        if req.name.trim().is_empty() {
            return Err(RosterError::InvalidName);
        }
        let mut school_id = req.school_id;
        if let Some(tid) = &req.teacher_id {
            if role != Role::Student {
                return Err(RosterError::TeacherOnNonStudent);
            }
            let teacher = self
                .users
                .get(tid)
                .filter(|t| t.role == Role::Teacher)
                .ok_or_else(|| RosterError::UnknownTeacher(tid.clone()))?;
            if school_id.is_none() {
                school_id = teacher.school_id.clone();
            }
        }
        if self
            .users
            .values()
            .any(|u| u.display_name == req.name && u.school_id == school_id)
        {
            return Err(RosterError::DuplicateName(req.name));
        }
        self.next_id += 1;
        let user = User {
            id: UserId::new(format!("u-{}", self.next_id)),
            display_name: req.name,
            role,
            credential: CredentialHash::create(&req.credential),
            teacher_id: req.teacher_id,
            school_id,
        };
        self.users.insert(user.id.clone(), user.clone());
        Ok(user)
    }

    /// The user called `name` whose credential verifies, if any.
    pub fn authenticate(&self, name: &str, secret: &str) -> Option<&User> {
        self.users
            .values()
            .find(|u| u.display_name == name && u.credential.verify(secret))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(name: &str, role: &str, teacher: Option<&UserId>) -> CreateUser {
        CreateUser {
            name: name.into(),
            role: role.into(),
            credential: "pw".into(),
            teacher_id: teacher.cloned(),
            school_id: None,
        }
    }

    #[test]
    fn student_links_to_teacher() {
        let mut r = Roster::default();
        let t = r.create_user(req("Ms. Lee", "teacher", None)).unwrap();
        assert_eq!(t.teacher_id, None);
        let s = r.create_user(req("Ana", "student", Some(&t.id))).unwrap();
        assert_eq!(s.teacher_id.as_ref(), Some(&t.id));
        assert_eq!(r.students_of(&t.id).len(), 1);
    }

    #[test]
    fn create_user_errors() {
        let mut r = Roster::default();
        assert!(matches!(
            r.create_user(req("Ana", "student", Some(&"u-404".into()))),
            Err(RosterError::UnknownTeacher(_))
        ));
        assert!(matches!(r.create_user(req("Ana", "wizard", None)), Err(RosterError::InvalidRole(_))));
        let s = r.create_user(req("Ana", "student", None)).unwrap();
        assert!(matches!(r.create_user(req("Ana", "teacher", None)), Err(RosterError::DuplicateName(_))));
        // a student is not a teacher
        assert!(matches!(
            r.create_user(req("Ben", "student", Some(&s.id))),
            Err(RosterError::UnknownTeacher(_))
        ));
        let t = r.create_user(req("Mr. Ode", "teacher", None)).unwrap();
        assert!(matches!(
            r.create_user(req("Cy", "teacher", Some(&t.id))),
            Err(RosterError::TeacherOnNonStudent)
        ));
    }

    #[test]
    fn same_name_allowed_in_different_schools() {
        let mut r = Roster::default();
        let mut a = req("Ana", "student", None);
        a.school_id = Some("s-1".into());
        let mut b = req("Ana", "student", None);
        b.school_id = Some("s-2".into());
        r.create_user(a).unwrap();
        r.create_user(b).unwrap();
    }

    #[test]
    fn credentials_are_salted_and_never_serialized() {
        let mut r = Roster::default();
        let u = r.create_user(req("Ana", "student", None)).unwrap();
        assert!(u.credential.verify("pw"));
        assert!(!u.credential.verify("pw2"));
        assert_ne!(CredentialHash::create("pw"), CredentialHash::create("pw"));
        let json = serde_json::to_string(&u).unwrap();
        assert!(!json.contains("sha256"));
        assert!(!json.contains("credential"));
        assert_eq!(r.authenticate("Ana", "pw").map(|u| &u.id), Some(&u.id));
        assert!(r.authenticate("Ana", "nope").is_none());
    }

    #[test]
    fn ids_continue_after_reload() {
        let mut r = Roster::default();
        r.create_user(req("A", "teacher", None)).unwrap();
        r.create_user(req("B", "teacher", None)).unwrap();
        let mut again = Roster::from_users(r.users().cloned());
        let c = again.create_user(req("C", "teacher", None)).unwrap();
        assert_eq!(c.id.as_str(), "u-3");
    }
}
