use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use super::Address;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ServiceTag {
    Exchange,
    Gambling,
}

impl FromStr for ServiceTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exchange" => Ok(ServiceTag::Exchange),
            "gambling" => Ok(ServiceTag::Gambling),
            other => Err(other.to_string()),
        }
    }
}

impl fmt::Display for ServiceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ServiceTag::Exchange => "exchange",
            ServiceTag::Gambling => "gambling",
        })
    }
}

/// Known exchange and gambling addresses. Forward traversal does not
/// follow payments into them.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct ServiceTagRegistry {
    tags: HashMap<Address, ServiceTag>,
}

impl ServiceTagRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, address: Address, tag: ServiceTag) -> Result<()> {
        if address.is_placeholder() {
            return Err(Error::InvalidArgument(format!(
                "placeholder address {address} cannot carry a service tag"
            )));
        }
        if self.tags.contains_key(&address) {
            return Err(Error::DuplicateTag {
                line: 0,
                address: address.to_string(),
            });
        }
        self.tags.insert(address, tag);
        Ok(())
    }

    pub fn get(&self, address: &str) -> Option<ServiceTag> {
        self.tags.get(address).copied()
    }

    pub fn is_tagged(&self, address: &str) -> bool {
        self.tags.contains_key(address)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Entries sorted by address.
    pub fn entries(&self) -> Vec<(&Address, ServiceTag)> {
        let mut v: Vec<_> = self.tags.iter().map(|(a, &t)| (a, t)).collect();
        v.sort();
        v
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for (address, tag) in self.entries() {
            w.write_record([address.as_str(), &tag.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Read `address,tag` lines (no header).
pub fn load_service_tags<R: Read>(reader: R) -> Result<ServiceTagRegistry> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut registry = ServiceTagRegistry::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 1;
        let record = record?;
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 2 columns, found {}", record.len()),
            });
        }
        let address = Address::new(&record[0]).ok_or_else(|| Error::Parse {
            line,
            msg: "empty address".into(),
        })?;
        let tag = record[1]
            .parse::<ServiceTag>()
            .map_err(|tag| Error::UnknownTag { line, tag })?;
        registry.insert(address, tag).map_err(|e| match e {
            Error::DuplicateTag { address, .. } => Error::DuplicateTag { line, address },
            Error::InvalidArgument(msg) => Error::Parse { line, msg },
            other => other,
        })?;
    }
    Ok(registry)
}
