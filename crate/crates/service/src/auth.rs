//! Signed bearer tokens.
//!
//! A token is `base64url(claims-json) "." base64url(hmac-sha256)`. Any
//! replica holding the shared secret can verify it without a session table.

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use chrono::{DateTime, Duration, Utc};
use hmac::{Hmac, Mac};
use serde::{Deserialize, Serialize};
use sha2::Sha256;
use wordify_core::roster::{Role, User, UserId};

type HmacSha256 = Hmac<Sha256>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claims {
    pub sub: UserId,
    pub role: Role,
    /// Expiry as unix seconds.
    pub exp: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TokenError {
    #[error("malformed token")]
    Malformed,
    #[error("bad token signature")]
    BadSignature,
    #[error("token expired")]
    Expired,
}

#[derive(Clone)]
pub struct TokenSigner {
    secret: Vec<u8>,
    ttl: Duration,
}

impl TokenSigner {
    pub fn new(secret: Vec<u8>, ttl: Duration) -> Self {
        TokenSigner { secret, ttl }
    }

    fn mac(&self, payload: &[u8]) -> HmacSha256 {
        let mut mac = HmacSha256::new_from_slice(&self.secret).expect("hmac takes any key length");
        mac.update(payload);
        mac
    }

    pub fn issue(&self, user: &User, now: DateTime<Utc>) -> (String, DateTime<Utc>) {
        let expires = now + self.ttl;
        let claims = Claims {
            sub: user.id.clone(),
            role: user.role,
            exp: expires.timestamp(),
        };
        let payload = serde_json::to_vec(&claims).expect("claims serialize");
        let sig = self.mac(&payload).finalize().into_bytes();
        let token = format!("{}.{}", URL_SAFE_NO_PAD.encode(&payload), URL_SAFE_NO_PAD.encode(sig));
        (token, expires)
    }

    pub fn verify(&self, token: &str, now: DateTime<Utc>) -> Result<Claims, TokenError> {
        let (payload, sig) = token.split_once('.').ok_or(TokenError::Malformed)?;
        let payload = URL_SAFE_NO_PAD.decode(payload).map_err(|_| TokenError::Malformed)?;
        let sig = URL_SAFE_NO_PAD.decode(sig).map_err(|_| TokenError::Malformed)?;
        self.mac(&payload)
            .verify_slice(&sig)
            .map_err(|_| TokenError::BadSignature)?;
        let claims: Claims = serde_json::from_slice(&payload).map_err(|_| TokenError::Malformed)?;
        if claims.exp <= now.timestamp() {
            return Err(TokenError::Expired);
        }
        Ok(claims)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use wordify_core::roster::CredentialHash;

    fn user() -> User {
        User {
            id: "u-1".into(),
            display_name: "Ana".into(),
            role: Role::Student,
            credential: CredentialHash::default(),
            teacher_id: None,
            school_id: None,
        }
    }

    #[test]
    fn issue_then_verify() {
        let s = TokenSigner::new(b"k".to_vec(), Duration::seconds(60));
        let now = Utc::now();
        let (tok, exp) = s.issue(&user(), now);
        assert_eq!(exp, now + Duration::seconds(60));
        let c = s.verify(&tok, now).unwrap();
        assert_eq!(c.sub.as_str(), "u-1");
        assert_eq!(c.role, Role::Student);
    }

    #[test]
    fn expired_tampered_and_foreign_tokens_fail() {
        let s = TokenSigner::new(b"k".to_vec(), Duration::seconds(60));
        let now = Utc::now();
        let (tok, _) = s.issue(&user(), now);
        assert_eq!(s.verify(&tok, now + Duration::seconds(61)), Err(TokenError::Expired));
        let other = TokenSigner::new(b"j".to_vec(), Duration::seconds(60));
        assert_eq!(other.verify(&tok, now), Err(TokenError::BadSignature));
        assert_eq!(s.verify("nonsense", now), Err(TokenError::Malformed));
        let (payload, sig) = tok.split_once('.').unwrap();
        let forged = URL_SAFE_NO_PAD.encode(
            String::from_utf8(URL_SAFE_NO_PAD.decode(payload).unwrap())
                .unwrap()
                .replace("student", "teacher"),
        );
        assert_eq!(s.verify(&format!("{forged}.{sig}"), now), Err(TokenError::BadSignature));
    }
}
