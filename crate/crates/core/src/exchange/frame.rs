use std::collections::BTreeMap;

use super::message::Message;
use super::profile::{ProfileName, ProtocolProfile};
use super::ExchangeError;

/// One protocol-framed fragment of an encoded message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub profile: ProfileName,
    pub message_id: String,
    pub index: u32,
    pub count: u32,
    pub payload: Vec<u8>,
}

impl Frame {
    fn tag_line(&self) -> String {
        format!("id:{} frag:{}/{}\n", self.message_id, self.index, self.count)
    }

    /// Bytes on the wire: zeroed header, tag line, payload.
    pub fn to_wire(&self, profile: &ProtocolProfile) -> Vec<u8> {
        let tag = self.tag_line();
        let mut out = Vec::with_capacity(profile.header_bytes + tag.len() + self.payload.len());
        out.resize(profile.header_bytes, 0);
        out.extend_from_slice(tag.as_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn wire_len(&self, profile: &ProtocolProfile) -> usize {
        profile.header_bytes + self.tag_line().len() + self.payload.len()
    }

    pub fn from_wire(bytes: &[u8], profile: &ProtocolProfile) -> Result<Frame, ExchangeError> {
        let h = profile.header_bytes;
        let mismatch = || ExchangeError::ProfileMismatch {
            expected: profile.name,
            found: None,
        };
        if bytes.len() < h || bytes[..h].iter().any(|b| *b != 0) {
            return Err(mismatch());
        }
        let rest = &bytes[h..];
        if rest.first() == Some(&0) {
            return Err(mismatch());
        }
        let bad = |m: &str| ExchangeError::Parse {
            line: 0,
            message: format!("frame tag: {m}"),
        };
        let end = rest.iter().position(|b| *b == b'\n').ok_or_else(|| bad("unterminated"))?;
        let tag = std::str::from_utf8(&rest[..end]).map_err(|_| bad("not utf-8"))?;
        let (id, frag) = tag
            .strip_prefix("id:")
            .and_then(|t| t.split_once(" frag:"))
            .ok_or_else(|| bad(tag))?;
        let (index, count) = frag.split_once('/').ok_or_else(|| bad(tag))?;
        let index: u32 = index.parse().map_err(|_| bad(tag))?;
        let count: u32 = count.parse().map_err(|_| bad(tag))?;
        if id.is_empty() || index >= count {
            return Err(bad(tag));
        }
        Ok(Frame {
            profile: profile.name,
            message_id: id.to_string(),
            index,
            count,
            payload: rest[end + 1..].to_vec(),
        })
    }
}

/// Splits `bytes` into `ceil(len / frame_payload_bytes)` frames; an empty
/// input yields none.
pub fn fragment(bytes: &[u8], profile: &ProtocolProfile, message_id: &str) -> Vec<Frame> {
    let chunks: Vec<&[u8]> = bytes.chunks(profile.frame_payload_bytes).collect();
    let count = chunks.len() as u32;
    chunks
        .into_iter()
        .enumerate()
        .map(|(i, chunk)| Frame {
            profile: profile.name,
            message_id: message_id.to_string(),
            index: i as u32,
            count,
            payload: chunk.to_vec(),
        })
        .collect()
}

pub fn encode_message(m: &Message, profile: &ProtocolProfile) -> Result<Vec<Frame>, ExchangeError> {
    let body = m.encode_body();
    if body.len() > profile.max_message_bytes {
        return Err(ExchangeError::MessageTooLarge {
            size: body.len(),
            max: profile.max_message_bytes,
            profile: profile.name,
        });
    }
    Ok(fragment(&body, profile, &m.id()))
}

/// Concatenates the payloads of one message's fragments in index order.
pub fn reassemble(frames: &[Frame], profile: &ProtocolProfile) -> Result<Vec<u8>, ExchangeError> {
    let first = frames.first().ok_or_else(|| ExchangeError::IncompleteMessage {
        id: String::new(),
        missing: vec![0],
    })?;
    let mut parts: BTreeMap<u32, &Frame> = BTreeMap::new();
    for f in frames {
        if f.profile != profile.name {
            return Err(ExchangeError::ProfileMismatch {
                expected: profile.name,
                found: Some(f.profile),
            });
        }
        if f.message_id != first.message_id || f.count != first.count || f.index >= f.count {
            return Err(ExchangeError::MixedFrames(first.message_id.clone(), f.message_id.clone()));
        }
        if let Some(prev) = parts.insert(f.index, f) {
            if prev.payload != f.payload {
                return Err(ExchangeError::MixedFrames(
                    first.message_id.clone(),
                    format!("{} fragment {} twice", f.message_id, f.index),
                ));
            }
        }
    }
    let missing: Vec<u32> = (0..first.count).filter(|i| !parts.contains_key(i)).collect();
    if !missing.is_empty() {
        return Err(ExchangeError::IncompleteMessage {
            id: first.message_id.clone(),
            missing,
        });
    }
    Ok(parts.values().flat_map(|f| f.payload.iter().copied()).collect())
}

/// Reassembles fragments in any arrival order and parses the message.
pub fn decode_frames(frames: &[Frame], profile: &ProtocolProfile) -> Result<Message, ExchangeError> {
    let bytes = reassemble(frames, profile)?;
    let message = Message::decode_body(&bytes)?;
    if message.id() != frames[0].message_id {
        return Err(ExchangeError::MixedFrames(frames[0].message_id.clone(), message.id()));
    }
    Ok(message)
}

/// Gateway conversion between profiles: decode under `from`, re-encode
/// under `to`.
pub fn bridge_frames(
    frames: &[Frame],
    from: &ProtocolProfile,
    to: &ProtocolProfile,
) -> Result<Vec<Frame>, ExchangeError> {
    encode_message(&decode_frames(frames, from)?, to)
}

/// Collects fragments per message id as they arrive.
#[derive(Debug, Default, Clone)]
pub struct Reassembler {
    partial: BTreeMap<String, BTreeMap<u32, Frame>>,
}

impl Reassembler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a fragment; returns the complete frame set once every index of
    /// its message has arrived.
    pub fn push(&mut self, frame: Frame) -> Option<Vec<Frame>> {
        let count = frame.count as usize;
        let id = frame.message_id.clone();
        let entry = self.partial.entry(id.clone()).or_default();
        entry.insert(frame.index, frame);
        if entry.len() == count {
            self.partial.remove(&id).map(|m| m.into_values().collect())
        } else {
            None
        }
    }

    pub fn pending(&self) -> usize {
        self.partial.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::message::Body;
    use crate::knowledge::{node, term};

    fn query() -> Message {
        Message::new(
            node("SO1"),
            1,
            Body::QueryPrimary([term("event"), term("sensor")].into_iter().collect()),
        )
    }

    #[test]
    fn coap_query_fits_one_frame_with_two_byte_header() {
        let coap = ProtocolProfile::coap();
        let frames = encode_message(&query(), &coap).unwrap();
        assert_eq!(frames.len(), 1);
        let wire = frames[0].to_wire(&coap);
        assert_eq!(&wire[..2], &[0, 0]);
        assert_eq!(&wire[2..5], b"id:");
        assert_eq!(frames[0].wire_len(&coap), wire.len());
        assert_eq!(Frame::from_wire(&wire, &coap).unwrap(), frames[0]);
        assert!(Frame::from_wire(&wire, &ProtocolProfile::mqtt()).is_err());
    }

    #[test]
    fn fragment_counts() {
        let coap = ProtocolProfile::coap();
        assert_eq!(fragment(&[7u8; 2500], &coap, "m").len(), 3);
        assert_eq!(fragment(&[], &coap, "m").len(), 0);
        assert_eq!(fragment(&[1u8; 1024], &coap, "m").len(), 1);
        assert_eq!(fragment(&[1u8; 1025], &coap, "m").len(), 2);
    }

    #[test]
    fn reversed_and_missing_fragments() {
        let mut coap = ProtocolProfile::coap();
        coap.frame_payload_bytes = 8;
        let frames = encode_message(&query(), &coap).unwrap();
        assert!(frames.len() >= 3);
        let mut reversed = frames.clone();
        reversed.reverse();
        assert_eq!(decode_frames(&reversed, &coap).unwrap(), query());
        let mut missing = frames.clone();
        missing.remove(1);
        assert!(matches!(
            decode_frames(&missing, &coap),
            Err(ExchangeError::IncompleteMessage { missing, .. }) if missing == vec![1]
        ));
        assert!(matches!(
            decode_frames(&frames, &ProtocolProfile::mqtt()),
            Err(ExchangeError::ProfileMismatch { .. })
        ));
    }

    #[test]
    fn bridging_merges_fragments() {
        let mut coap = ProtocolProfile::coap();
        coap.frame_payload_bytes = 16;
        let mqtt = ProtocolProfile::mqtt();
        let frames = encode_message(&query(), &coap).unwrap();
        assert!(frames.len() >= 3);
        let bridged = bridge_frames(&frames, &coap, &mqtt).unwrap();
        assert_eq!(bridged.len(), 1);
        assert_eq!(decode_frames(&bridged, &mqtt).unwrap(), query());
        let same = bridge_frames(&frames, &coap, &coap).unwrap();
        assert_eq!(same, frames);
        let mut tiny = mqtt;
        tiny.max_message_bytes = 8;
        tiny.frame_payload_bytes = 8;
        assert!(matches!(
            bridge_frames(&frames, &coap, &tiny),
            Err(ExchangeError::MessageTooLarge { .. })
        ));
    }

    #[test]
    fn reassembler_waits_for_all_fragments() {
        let mut coap = ProtocolProfile::coap();
        coap.frame_payload_bytes = 10;
        let frames = encode_message(&query(), &coap).unwrap();
        let mut r = Reassembler::new();
        let n = frames.len();
        for (i, f) in frames.into_iter().rev().enumerate() {
            let done = r.push(f);
            assert_eq!(done.is_some(), i + 1 == n);
            if let Some(all) = done {
                assert_eq!(decode_frames(&all, &coap).unwrap(), query());
            }
        }
        assert_eq!(r.pending(), 0);
    }
}
