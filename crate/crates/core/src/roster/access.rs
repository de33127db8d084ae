//! Who may do what.
//!
//! * Students play their own games and read their own progress.
//! * Teachers read their students' progress and create games for them.
//! * Administrators manage users and read progress within their school.
//! * Developers read anonymized class aggregates only.
//! * System administrators may do everything.

use super::{Role, User};

fn same_school(a: &User, b: &User) -> bool {
    a.school_id.is_some() && a.school_id == b.school_id
}

pub fn can_view_progress(viewer: &User, student: &User) -> bool {
    match viewer.role {
        Role::Student => viewer.id == student.id,
        Role::Teacher => student.teacher_id.as_ref() == Some(&viewer.id),
        Role::Administrator => same_school(viewer, student),
        Role::Developer => false,
        Role::SystemAdministrator => true,
    }
}

/// Full (named) class report access. Developers get the anonymized form
/// through [`can_view_anonymized`].
pub fn can_view_class(viewer: &User, teacher: &User) -> bool {
    match viewer.role {
        Role::Teacher => viewer.id == teacher.id,
        Role::Administrator => same_school(viewer, teacher),
        Role::SystemAdministrator => true,
        Role::Student | Role::Developer => false,
    }
}

pub fn can_view_anonymized(viewer: &User) -> bool {
    viewer.role == Role::Developer
}

pub fn can_create_game_for(viewer: &User, student: &User) -> bool {
    student.role == Role::Student
        && match viewer.role {
            Role::Student => viewer.id == student.id,
            Role::Teacher => student.teacher_id.as_ref() == Some(&viewer.id),
            _ => false,
        }
}

/// Whether `viewer` may register a user with `role` under `teacher`/`school`.
pub fn can_create_user(
    viewer: &User,
    role: Role,
    teacher: Option<&User>,
    school: Option<&str>,
) -> bool {
    match viewer.role {
        Role::SystemAdministrator => true,
        Role::Administrator => {
            role != Role::SystemAdministrator
                && viewer.school_id.is_some()
                && school.or(teacher.and_then(|t| t.school_id.as_deref()))
                    == viewer.school_id.as_deref()
        }
        Role::Teacher => role == Role::Student && teacher.is_some_and(|t| t.id == viewer.id),
        Role::Student | Role::Developer => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roster::{CreateUser, Roster};

    fn setup() -> (Roster, [User; 6]) {
        let mut r = Roster::default();
        let mut mk = |name: &str, role: &str, teacher: Option<&User>, school: Option<&str>| {
            r.create_user(CreateUser {
                name: name.into(),
                role: role.into(),
                credential: "pw".into(),
                teacher_id: teacher.map(|t| t.id.clone()),
                school_id: school.map(str::to_string),
            })
            .unwrap()
        };
        let t = mk("T", "teacher", None, Some("s-1"));
        let a = mk("A", "student", Some(&t), None);
        let b = mk("B", "student", None, Some("s-2"));
        let admin = mk("Adm", "administrator", None, Some("s-1"));
        let dev = mk("Dev", "developer", None, None);
        let root = mk("Root", "system_administrator", None, None);
        (r, [t, a, b, admin, dev, root])
    }

    #[test]
    fn progress_visibility() {
        let (_, [t, a, b, admin, dev, root]) = setup();
        assert!(can_view_progress(&a, &a));
        assert!(!can_view_progress(&a, &b));
        assert!(can_view_progress(&t, &a));
        assert!(!can_view_progress(&t, &b));
        assert!(can_view_progress(&admin, &a));
        assert!(!can_view_progress(&admin, &b));
        assert!(!can_view_progress(&dev, &a));
        assert!(can_view_progress(&root, &b));
    }

    #[test]
    fn class_and_game_creation() {
        let (_, [t, a, b, admin, dev, root]) = setup();
        assert!(can_view_class(&t, &t));
        assert!(!can_view_class(&a, &t));
        assert!(can_view_class(&admin, &t));
        assert!(!can_view_class(&dev, &t) && can_view_anonymized(&dev));
        assert!(can_view_class(&root, &t));
        assert!(can_create_game_for(&a, &a));
        assert!(!can_create_game_for(&a, &b));
        assert!(can_create_game_for(&t, &a));
        assert!(!can_create_game_for(&t, &b));
        assert!(!can_create_game_for(&admin, &a));
    }

    #[test]
    fn user_creation_rights() {
        let (_, [t, a, _, admin, dev, root]) = setup();
        assert!(can_create_user(&t, Role::Student, Some(&t), None));
        assert!(!can_create_user(&t, Role::Teacher, None, None));
        assert!(can_create_user(&admin, Role::Teacher, None, Some("s-1")));
        assert!(!can_create_user(&admin, Role::Teacher, None, Some("s-2")));
        assert!(!can_create_user(&admin, Role::SystemAdministrator, None, Some("s-1")));
        assert!(!can_create_user(&a, Role::Student, None, None));
        assert!(!can_create_user(&dev, Role::Student, None, None));
        assert!(can_create_user(&root, Role::SystemAdministrator, None, None));
    }
}
