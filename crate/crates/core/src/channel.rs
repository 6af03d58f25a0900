//! Log-distance path loss with optional Nakagami-m fading, the sensitivity
//! range inversion used by predictive routing, and an interference-free
//! broadcast medium.

use rand_distr::{Distribution, Gamma};

use crate::error::ChannelError;
use crate::geometry::Vec3;
use crate::kernel::{RandomStream, SimTime};
use crate::routing::NodeId;

pub const SPEED_OF_LIGHT: f64 = 2.998e8;

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fading {
    /// Reception iff mean received power reaches the sensitivity.
    None,
    /// Received power is Gamma distributed with shape `m` around the mean.
    Nakagami { m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub carrier_frequency: f64,
    pub path_loss_exponent: f64,
    pub reference_distance: f64,
    pub tx_power_dbm: f64,
    pub sensitivity_dbm: f64,
    pub fading: Fading,
}

impl ChannelModel {
    /// Deterministic log-distance model at 2.4 GHz, 100 mW, −83 dBm.
    pub fn friis(path_loss_exponent: f64) -> Self {
        ChannelModel {
            carrier_frequency: 2.4e9,
            path_loss_exponent,
            reference_distance: 1.0,
            tx_power_dbm: mw_to_dbm(100.0),
            sensitivity_dbm: -83.0,
            fading: Fading::None,
        }
    }

    pub fn nakagami(path_loss_exponent: f64, m: f64) -> Self {
        ChannelModel {
            fading: Fading::Nakagami { m },
            ..Self::friis(path_loss_exponent)
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let bad = |msg: &str| Err(ChannelError::InvalidParameter(msg.to_owned()));
        if !(self.path_loss_exponent >= 2.0) {
            return bad("path loss exponent must be >= 2");
        }
        if !(self.reference_distance > 0.0) {
            return bad("reference distance must be positive");
        }
        if !(self.carrier_frequency > 0.0) {
            return bad("carrier frequency must be positive");
        }
        if let Fading::Nakagami { m } = self.fading {
            if !(m >= 1.0) {
                return bad("nakagami shape must be >= 1");
            }
        }
        Ok(())
    }

    /// Free-space loss at the reference distance.
    pub fn reference_loss_db(&self) -> f64 {
        20.0 * (4.0 * std::f64::consts::PI * self.reference_distance * self.carrier_frequency
            / SPEED_OF_LIGHT)
            .log10()
    }

    /// `PL₀ + 10·α·log₁₀(d/d₀)`; distances below `d₀` are clamped to `d₀`.
    ///
    /// Panics if `d <= 0`.
    pub fn path_loss_db(&self, d: f64) -> f64 {
        assert!(d > 0.0, "distance must be positive, got {d}");
        let d = d.max(self.reference_distance);
        self.reference_loss_db()
            + 10.0 * self.path_loss_exponent * (d / self.reference_distance).log10()
    }

    pub fn mean_rx_power_dbm(&self, d: f64) -> f64 {
        self.tx_power_dbm - self.path_loss_db(d)
    }

    /// Distance at which the mean received power equals the sensitivity.
    pub fn max_distance(&self) -> Result<f64, ChannelError> {
        let budget = self.tx_power_dbm - self.sensitivity_dbm;
        if !(budget > 0.0) {
            return Err(ChannelError::NoRange {
                tx_power_dbm: self.tx_power_dbm,
                sensitivity_dbm: self.sensitivity_dbm,
            });
        }
        let exponent = (budget - self.reference_loss_db()) / (10.0 * self.path_loss_exponent);
        Ok(self.reference_distance * 10f64.powf(exponent))
    }

    /// Whether a single frame over distance `d` is received. Consumes one
    /// draw from `rng` in fading mode and none otherwise.
    pub fn reception_success(&self, d: f64, rng: &mut RandomStream) -> bool {
        let mean_dbm = self.mean_rx_power_dbm(d);
        match self.fading {
            Fading::None => mean_dbm >= self.sensitivity_dbm,
            Fading::Nakagami { m } => {
                let mean_mw = dbm_to_mw(mean_dbm);
                let gamma = Gamma::new(m, mean_mw / m).expect("validated shape and positive mean");
                gamma.sample(rng.rng()) >= dbm_to_mw(self.sensitivity_dbm)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmission {
    pub sender: NodeId,
    pub size_bytes: usize,
    pub start: SimTime,
    pub bitrate: f64,
}

impl Transmission {
    /// Serialization delay in seconds.
    pub fn airtime(&self) -> f64 {
        (self.size_bytes * 8) as f64 / self.bitrate
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delivery {
    pub receiver: NodeId,
    pub at: SimTime,
}

/// Collision-free shared medium: every frame reaches each other node
/// independently according to the channel model.
#[derive(Debug, Clone)]
pub struct Medium {
    pub model: ChannelModel,
}

impl Medium {
    pub fn new(model: ChannelModel) -> Self {
        Medium { model }
    }

    fn delivery(&self, tx: &Transmission, d: f64) -> SimTime {
        SimTime::from_secs(tx.start.secs() + tx.airtime() + d / SPEED_OF_LIGHT)
    }

    /// Evaluates reception at every receiver, in the order given. Callers
    /// pass receivers sorted by id so channel draws are reproducible.
    pub fn broadcast(
        &self,
        tx: &Transmission,
        sender_pos: Vec3,
        receivers: impl IntoIterator<Item = (NodeId, Vec3)>,
        rng: &mut RandomStream,
    ) -> Vec<Delivery> {
        receivers
            .into_iter()
            .filter(|&(id, _)| id != tx.sender)
            .filter_map(|(id, pos)| {
                let d = sender_pos.distance(pos).max(f64::MIN_POSITIVE);
                self.model.reception_success(d, rng).then(|| Delivery {
                    receiver: id,
                    at: self.delivery(tx, d),
                })
            })
            .collect()
    }

    /// Same as [`Medium::broadcast`] restricted to one addressed receiver.
    pub fn unicast(
        &self,
        tx: &Transmission,
        sender_pos: Vec3,
        receiver: (NodeId, Vec3),
        rng: &mut RandomStream,
    ) -> Option<Delivery> {
        self.broadcast(tx, sender_pos, [receiver], rng).pop()
    }
}
