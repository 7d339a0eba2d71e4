//! Binary model containers.
//!
//! Layout: 4-byte magic `OOVF`, format version (u32), section count (u32),
//! then each section as name length (u32), name bytes, payload length (u64),
//! CRC-32 of the payload (u32), payload bytes. All integers little-endian;
//! learned parameters inside payloads are little-endian f32. Containers from
//! a newer format version are rejected rather than half-read.

mod codec;
mod persist;

pub use codec::{Reader, Writer};
pub use persist::*;

use std::collections::BTreeMap;
use std::io::{Read, Write as IoWrite};
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"OOVF";
pub const CURRENT_VERSION: u32 = 1;

const CRC_TABLE: [u32; 256] = crc_table();

const fn crc_table() -> [u32; 256] {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut c = i as u32;
        let mut k = 0;
        while k < 8 {
            c = if c & 1 != 0 { 0xEDB8_8320 ^ (c >> 1) } else { c >> 1 };
            k += 1;
        }
        table[i] = c;
        i += 1;
    }
    table
}

/// CRC-32 (IEEE 802.3 polynomial, reflected).
pub fn crc32(bytes: &[u8]) -> u32 {
    section_crc("", bytes)
}

/// Section checksums cover the name as well as the payload, so a corrupted
/// name cannot silently relabel an otherwise intact section.
fn section_crc(name: &str, payload: &[u8]) -> u32 {
    let mut c = 0xFFFF_FFFFu32;
    for &b in name.as_bytes().iter().chain(payload) {
        c = CRC_TABLE[((c ^ b as u32) & 0xFF) as usize] ^ (c >> 8);
    }
    c ^ 0xFFFF_FFFF
}

#[derive(Debug, Clone)]
pub struct Container {
    pub version: u32,
    sections: BTreeMap<String, Vec<u8>>,
}

impl Default for Container {
    fn default() -> Self {
        Self::new()
    }
}

impl Container {
    pub fn new() -> Self {
        Container { version: CURRENT_VERSION, sections: BTreeMap::new() }
    }

    pub fn insert(&mut self, name: &str, payload: Vec<u8>) {
        self.sections.insert(name.to_string(), payload);
    }

    pub fn has(&self, name: &str) -> bool {
        self.sections.contains_key(name)
    }

    pub fn section(&self, name: &str) -> Result<&[u8]> {
        self.sections
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::container(format!("missing section '{name}'")))
    }

    pub fn maybe_section(&self, name: &str) -> Option<&[u8]> {
        self.sections.get(name).map(Vec::as_slice)
    }

    pub fn section_names(&self) -> impl Iterator<Item = &str> {
        self.sections.keys().map(String::as_str)
    }

    pub fn write_to(&self, mut w: impl IoWrite) -> Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&self.version.to_le_bytes())?;
        w.write_all(&(self.sections.len() as u32).to_le_bytes())?;
        for (name, payload) in &self.sections {
            w.write_all(&(name.len() as u32).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
            w.write_all(&(payload.len() as u64).to_le_bytes())?;
            w.write_all(&section_crc(name, payload).to_le_bytes())?;
            w.write_all(payload)?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Container> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let mut rd = Reader::new(&bytes);
        let magic = rd.take(4)?;
        if magic != MAGIC {
            return Err(Error::container("bad magic, not a model container"));
        }
        let version = rd.u32()?;
        if version == 0 || version > CURRENT_VERSION {
            return Err(Error::container(format!(
                "unsupported container version {version} (this build reads up to {CURRENT_VERSION})"
            )));
        }
        let count = rd.u32()? as usize;
        let mut sections = BTreeMap::new();
        for _ in 0..count {
            let name = rd.string()?;
            let len = rd.u64()? as usize;
            let stored_crc = rd.u32()?;
            let payload = rd.take(len)?.to_vec();
            if section_crc(&name, &payload) != stored_crc {
                return Err(Error::container(format!(
                    "checksum mismatch in section '{name}'"
                )));
            }
            if sections.insert(name.clone(), payload).is_some() {
                return Err(Error::container(format!("duplicate section '{name}'")));
            }
        }
        rd.finish()?;
        Ok(Container { version, sections })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Container> {
        let file = std::fs::File::open(path)?;
        Container::read_from(std::io::BufReader::new(file))
    }
}
