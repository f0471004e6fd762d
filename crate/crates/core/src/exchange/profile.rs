use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::ExchangeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProfileName {
    Coap,
    Mqtt,
    Amqp,
    Http,
}

impl ProfileName {
    pub const ALL: [ProfileName; 4] = [
        ProfileName::Coap,
        ProfileName::Mqtt,
        ProfileName::Amqp,
        ProfileName::Http,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProfileName::Coap => "coap",
            ProfileName::Mqtt => "mqtt",
            ProfileName::Amqp => "amqp",
            ProfileName::Http => "http",
        }
    }
}

impl fmt::Display for ProfileName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProfileName {
    type Err = ExchangeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProfileName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| ExchangeError::UnknownProfile(s.to_string()))
    }
}

/// Resource envelope of an application protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolProfile {
    pub name: ProfileName,
    pub header_bytes: usize,
    pub max_message_bytes: usize,
    pub frame_payload_bytes: usize,
    pub duplex: bool,
    /// 0 is the lightest.
    pub weight_class: u8,
}

impl ProtocolProfile {
    pub fn coap() -> Self {
        ProtocolProfile {
            name: ProfileName::Coap,
            header_bytes: 2,
            max_message_bytes: 256 << 20,
            frame_payload_bytes: 1024,
            duplex: true,
            weight_class: 0,
        }
    }

    pub fn mqtt() -> Self {
        ProtocolProfile {
            name: ProfileName::Mqtt,
            header_bytes: 16,
            max_message_bytes: 268_435_455,
            frame_payload_bytes: 65_536,
            duplex: true,
            weight_class: 1,
        }
    }

    pub fn amqp() -> Self {
        ProtocolProfile {
            name: ProfileName::Amqp,
            header_bytes: 32,
            max_message_bytes: u32::MAX as usize,
            frame_payload_bytes: 65_536,
            duplex: true,
            weight_class: 2,
        }
    }

    pub fn http() -> Self {
        ProtocolProfile {
            name: ProfileName::Http,
            header_bytes: 256,
            max_message_bytes: usize::MAX,
            frame_payload_bytes: 1 << 20,
            duplex: true,
            weight_class: 3,
        }
    }

    pub fn default_for(name: ProfileName) -> Self {
        match name {
            ProfileName::Coap => Self::coap(),
            ProfileName::Mqtt => Self::mqtt(),
            ProfileName::Amqp => Self::amqp(),
            ProfileName::Http => Self::http(),
        }
    }

    pub fn validate(&self) -> Result<(), ExchangeError> {
        if self.frame_payload_bytes == 0 || self.frame_payload_bytes > self.max_message_bytes {
            return Err(ExchangeError::InvalidProfile(format!(
                "{}: frame payload {} must be in 1..={}",
                self.name, self.frame_payload_bytes, self.max_message_bytes
            )));
        }
        Ok(())
    }

    /// Applies a `key = value` override from a scenario file.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ExchangeError> {
        let bad = || ExchangeError::InvalidProfile(format!("{}.{key} cannot be `{value}`", self.name));
        let bytes = || value.parse::<usize>().map_err(|_| bad());
        match key {
            "header_bytes" => self.header_bytes = bytes()?,
            "max_message_bytes" => self.max_message_bytes = bytes()?,
            "frame_payload_bytes" => self.frame_payload_bytes = bytes()?,
            "duplex" => self.duplex = value.parse().map_err(|_| bad())?,
            _ => {
                return Err(ExchangeError::InvalidProfile(format!(
                    "unknown profile key `{key}`"
                )))
            }
        }
        Ok(())
    }
}

/// The four profiles in effect for a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileTable(BTreeMap<ProfileName, ProtocolProfile>);

impl Default for ProfileTable {
    fn default() -> Self {
        ProfileTable(
            ProfileName::ALL
                .into_iter()
                .map(|n| (n, ProtocolProfile::default_for(n)))
                .collect(),
        )
    }
}

impl ProfileTable {
    pub fn get(&self, name: ProfileName) -> &ProtocolProfile {
        &self.0[&name]
    }

    pub fn get_mut(&mut self, name: ProfileName) -> &mut ProtocolProfile {
        self.0.get_mut(&name).expect("every profile is present")
    }

    pub fn iter(&self) -> impl Iterator<Item = &ProtocolProfile> {
        self.0.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_keep_the_weight_order() {
        let t = ProfileTable::default();
        let w: Vec<u8> = t.iter().map(|p| p.weight_class).collect();
        assert_eq!(w, vec![0, 1, 2, 3]);
        assert!(t.iter().all(|p| p.validate().is_ok()));
        let h: Vec<usize> = t.iter().map(|p| p.header_bytes).collect();
        assert!(h.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(t.get(ProfileName::Coap).header_bytes, 2);
        assert_eq!(t.get(ProfileName::Coap).max_message_bytes, 268_435_456);
    }

    #[test]
    fn overrides() {
        let mut p = ProtocolProfile::coap();
        p.set("frame_payload_bytes", "64").unwrap();
        assert_eq!(p.frame_payload_bytes, 64);
        p.set("duplex", "false").unwrap();
        assert!(!p.duplex);
        assert!(p.set("mtu", "1").is_err());
        p.set("max_message_bytes", "10").unwrap();
        assert!(p.validate().is_err());
        assert_eq!("mqtt".parse::<ProfileName>().unwrap(), ProfileName::Mqtt);
        assert!("zigbee".parse::<ProfileName>().is_err());
    }
}
