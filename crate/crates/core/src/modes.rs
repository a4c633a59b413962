//! Mode bookkeeping: the bijection between flat mode indices and
//! (channel, polarization, packet) labels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub fn index(self) -> usize {
        match self {
            Pol::H => 0,
            Pol::V => 1,
        }
    }

    pub fn from_index(i: usize) -> Pol {
        if i == 0 {
            Pol::H
        } else {
            Pol::V
        }
    }
}

/// Label of a single mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeLabel {
    pub channel: usize,
    /// `None` for unpolarized circuits.
    pub pol: Option<Pol>,
    pub packet: usize,
}

impl fmt::Display for ModeLabel {
    /// Prints `H(0)2` for channel 2, horizontal, packet 0, and `(0)2` without
    /// polarization.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pol {
            Some(p) => write!(f, "{:?}({}){}", p, self.packet, self.channel),
            None => write!(f, "({}){}", self.packet, self.channel),
        }
    }
}

/// Layout `mode = ((channel_pos * npol) + pol) * npackets + packet`, where `channel_pos`
/// is the position of the channel in `channels`. The channel list lets the same type
/// describe reduced spaces left after post-selection strips some channels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeMap {
    channels: Vec<usize>,
    npol: usize,
    npackets: usize,
}

impl ModeMap {
    pub fn new(nchannels: usize, polarized: bool, npackets: usize) -> Self {
        Self {
            channels: (0..nchannels).collect(),
            npol: if polarized { 2 } else { 1 },
            npackets: npackets.max(1),
        }
    }

    /// Mode map over an explicit (ordered) channel subset.
    pub fn with_channels(channels: Vec<usize>, npol: usize, npackets: usize) -> Self {
        Self {
            channels,
            npol,
            npackets: npackets.max(1),
        }
    }

    pub fn nmodes(&self) -> usize {
        self.channels.len() * self.npol * self.npackets
    }

    pub fn nchannels(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[usize] {
        &self.channels
    }

    pub fn npol(&self) -> usize {
        self.npol
    }

    pub fn polarized(&self) -> bool {
        self.npol == 2
    }

    pub fn npackets(&self) -> usize {
        self.npackets
    }

    fn channel_pos(&self, channel: usize) -> Result<usize> {
        self.channels
            .iter()
            .position(|&c| c == channel)
            .ok_or(Error::ChannelOutOfRange {
                channel,
                nchannels: self.channels.len(),
            })
    }

    pub fn contains_channel(&self, channel: usize) -> bool {
        self.channels.contains(&channel)
    }

    pub fn mode(&self, channel: usize, pol: usize, packet: usize) -> Result<usize> {
        let pos = self.channel_pos(channel)?;
        if pol >= self.npol {
            return Err(Error::Unpolarized);
        }
        if packet >= self.npackets {
            return Err(Error::Capacity(format!(
                "packet {packet} outside table of {}",
                self.npackets
            )));
        }
        Ok((pos * self.npol + pol) * self.npackets + packet)
    }

    pub fn label(&self, mode: usize) -> ModeLabel {
        let packet = mode % self.npackets;
        let rest = mode / self.npackets;
        let pol = rest % self.npol;
        let pos = rest / self.npol;
        ModeLabel {
            channel: self.channels[pos],
            pol: if self.npol == 2 {
                Some(Pol::from_index(pol))
            } else {
                None
            },
            packet,
        }
    }

    /// All modes belonging to `channel`, in index order.
    pub fn channel_modes(&self, channel: usize) -> Result<Vec<usize>> {
        let pos = self.channel_pos(channel)?;
        let per = self.npol * self.npackets;
        Ok((pos * per..(pos + 1) * per).collect())
    }

    /// Mode map with `removed` channels dropped, keeping the order of the rest.
    pub fn without_channels(&self, removed: &[usize]) -> ModeMap {
        ModeMap {
            channels: self
                .channels
                .iter()
                .copied()
                .filter(|c| !removed.contains(c))
                .collect(),
            npol: self.npol,
            npackets: self.npackets,
        }
    }
}
