//! Knowledge exchange between Smart Objects: level-tagged messages, framing
//! under IoT protocol profiles, gateway bridging and the message handler.

pub mod frame;
pub mod message;
pub mod profile;
pub mod smart_object;

use thiserror::Error;

pub use frame::{bridge_frames, decode_frames, encode_message, fragment, reassemble, Frame, Reassembler};
pub use message::{Body, Message, MessageKind};
pub use profile::{ProfileName, ProfileTable, ProtocolProfile};
pub use smart_object::{advertise_services, advertised_services, Handled, SmartObject};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExchangeError {
    #[error("encoded message is {size} bytes, {profile} allows {max}")]
    MessageTooLarge {
        size: usize,
        max: usize,
        profile: ProfileName,
    },
    #[error("message {id} is missing fragments {missing:?}")]
    IncompleteMessage { id: String, missing: Vec<u32> },
    #[error("frame is not {expected}{}", .found.map(|f| format!(" (found {f})")).unwrap_or_default())]
    ProfileMismatch {
        expected: ProfileName,
        found: Option<ProfileName>,
    },
    #[error("fragments of {0} mixed with {1}")]
    MixedFrames(String, String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown message kind `{0}`")]
    UnknownKind(String),
    #[error("unknown protocol profile `{0}`")]
    UnknownProfile(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
}
