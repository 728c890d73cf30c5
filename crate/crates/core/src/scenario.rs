//! Sub-network deployment and random-direction mobility.

use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Upper bound on rejection-sampling draws during placement.
pub const MAX_PLACEMENT_ATTEMPTS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_subnets: usize,
    /// Side of the square deployment area in meters.
    pub area_side: f64,
    /// Minimum AP-to-AP distance at deployment, meters.
    pub min_separation: f64,
    /// Radius of the disc the device is dropped in around its AP, meters.
    pub cell_radius: f64,
    /// AP speed in m/s.
    pub speed: f64,
    /// TTI duration in seconds.
    pub tti: f64,
    pub n_subbands: usize,
    pub ues_per_subnet: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_subnets: 16,
            area_side: 20.0,
            min_separation: 4.0,
            cell_radius: 2.0,
            speed: 2.0,
            tti: 1e-4,
            n_subbands: 4,
            ues_per_subnet: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("scenario: {m}")));
        if self.n_subnets == 0 {
            return bad("n_subnets must be positive");
        }
        if self.n_subbands == 0 {
            return bad("n_subbands must be at least 1");
        }
        if !self.n_subnets.is_multiple_of(self.n_subbands) {
            return bad("n_subnets must be divisible by n_subbands");
        }
        if !(self.cell_radius > 0.0
            && self.cell_radius < self.min_separation
            && self.min_separation <= self.area_side)
        {
            return bad("require 0 < cell_radius < min_separation <= area_side");
        }
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return bad("speed must be non-negative");
        }
        if !(self.tti > 0.0 && self.tti.is_finite()) {
            return bad("tti must be positive");
        }
        if self.ues_per_subnet != 1 {
            return bad("exactly one device per sub-network is supported");
        }
        Ok(())
    }

    /// Number of sub-networks sharing each sub-band.
    pub fn group_size(&self) -> usize {
        self.n_subnets / self.n_subbands
    }

    /// Distance travelled by an AP in one TTI.
    pub fn step_length(&self) -> f64 {
        self.speed * self.tti
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubnetPose {
    /// AP position in meters.
    pub position: [f64; 2],
    /// Heading in radians, `[0, 2π)`.
    pub heading: f64,
    /// Device position relative to its AP, fixed for a drop.
    pub ue_offset: [f64; 2],
}

impl SubnetPose {
    pub fn device_position(&self) -> [f64; 2] {
        [
            self.position[0] + self.ue_offset[0],
            self.position[1] + self.ue_offset[1],
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioState {
    pub poses: Vec<SubnetPose>,
    /// Sub-band index of each sub-network.
    pub subband_of: Vec<usize>,
}

/// Geometry of the links ending at one device.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGeometry {
    /// Own AP to own device.
    pub desired: f64,
    /// `(interferer id, interferer AP to victim device)`, ascending by id.
    pub interferers: Vec<(usize, f64)>,
}

pub(crate) fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Drops `cfg.n_subnets` sub-networks uniformly in the area, subject to the
/// pairwise minimum separation, and partitions them into equal co-channel
/// groups.
pub fn init_deployment<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<ScenarioState> {
    cfg.validate()?;
    let mut positions: Vec<[f64; 2]> = Vec::with_capacity(cfg.n_subnets);
    let mut attempts = 0u64;
    while positions.len() < cfg.n_subnets {
        if attempts >= MAX_PLACEMENT_ATTEMPTS {
            return Err(Error::PlacementInfeasible {
                subnets: cfg.n_subnets,
                attempts,
            });
        }
        attempts += 1;
        let candidate = [
            rng.random::<f64>() * cfg.area_side,
            rng.random::<f64>() * cfg.area_side,
        ];
        if positions
            .iter()
            .all(|&p| distance(p, candidate) >= cfg.min_separation)
        {
            positions.push(candidate);
        }
    }

    let poses = positions
        .into_iter()
        .map(|position| {
            let heading = rng.random::<f64>() * TAU;
            let radius = cfg.cell_radius * rng.random::<f64>().sqrt();
            let angle = rng.random::<f64>() * TAU;
            SubnetPose {
                position,
                heading,
                ue_offset: [radius * angle.cos(), radius * angle.sin()],
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..cfg.n_subnets).collect();
    order.shuffle(rng);
    let group = cfg.group_size();
    let mut subband_of = vec![0; cfg.n_subnets];
    for (slot, &subnet) in order.iter().enumerate() {
        subband_of[subnet] = slot / group;
    }

    Ok(ScenarioState { poses, subband_of })
}

fn reflect(x: f64, side: f64) -> (f64, bool) {
    if x < 0.0 {
        ((-x).min(side), true)
    } else if x > side {
        ((2.0 * side - x).max(0.0), true)
    } else {
        (x, false)
    }
}

/// Advances every AP by `speed * tti` along its heading. An AP leaving the
/// area is mirrored back inside and draws a fresh uniform heading.
pub fn step_mobility<R: Rng + ?Sized>(state: &ScenarioState, cfg: &ScenarioConfig, rng: &mut R) -> ScenarioState {
    let step = cfg.step_length();
    let mut next = state.clone();
    if step == 0.0 {
        return next;
    }
    for pose in &mut next.poses {
        let (x, rx) = reflect(pose.position[0] + step * pose.heading.cos(), cfg.area_side);
        let (y, ry) = reflect(pose.position[1] + step * pose.heading.sin(), cfg.area_side);
        pose.position = [x, y];
        if rx || ry {
            pose.heading = rng.random::<f64>() * TAU;
        }
    }
    next
}

impl ScenarioState {
    pub fn n_subnets(&self) -> usize {
        self.poses.len()
    }

    /// Co-channel interferers of `subnet`, ascending by id.
    pub fn interferers_of(&self, subnet: usize) -> Vec<usize> {
        let band = self.subband_of[subnet];
        (0..self.n_subnets())
            .filter(|&m| m != subnet && self.subband_of[m] == band)
            .collect()
    }

    /// Desired-link and interferer distances seen by the device of `subnet`.
    pub fn link_distances(&self, subnet: usize) -> LinkGeometry {
        let pose = &self.poses[subnet];
        let device = pose.device_position();
        LinkGeometry {
            desired: distance(pose.position, device),
            interferers: self
                .interferers_of(subnet)
                .into_iter()
                .map(|m| (m, distance(self.poses[m].position, device)))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;
    use rand::SeedableRng;

    fn rng(seed: u64) -> SimRng {
        SimRng::seed_from_u64(seed)
    }

    #[test]
    fn default_deployment_forms_four_groups_of_four() {
        let cfg = ScenarioConfig::default();
        let state = init_deployment(&cfg, &mut rng(1)).unwrap();
        assert_eq!(state.poses.len(), 16);
        let mut counts = [0usize; 4];
        for &b in &state.subband_of {
            counts[b] += 1;
        }
        assert_eq!(counts, [4, 4, 4, 4]);
        for i in 0..16 {
            for j in i + 1..16 {
                assert!(distance(state.poses[i].position, state.poses[j].position) >= 4.0);
            }
            let o = state.poses[i].ue_offset;
            assert!(o[0].hypot(o[1]) <= 2.0);
            assert!((0.0..std::f64::consts::TAU).contains(&state.poses[i].heading));
        }
    }

    #[test]
    fn single_subnet_has_no_interferers() {
        let cfg = ScenarioConfig {
            n_subnets: 1,
            n_subbands: 1,
            ..Default::default()
        };
        let state = init_deployment(&cfg, &mut rng(2)).unwrap();
        let geo = state.link_distances(0);
        assert!(geo.interferers.is_empty());
        assert!(geo.desired <= 2.0);
    }

    #[test]
    fn impossible_separation_is_reported() {
        let cfg = ScenarioConfig {
            n_subnets: 4,
            n_subbands: 1,
            area_side: 20.0,
            min_separation: 20.0,
            ..Default::default()
        };
        // Four points pairwise >= 20 m apart cannot fit in a 20 m square
        // except at the corners, which have probability zero.
        let err = init_deployment(&cfg, &mut rng(3)).unwrap_err();
        assert!(matches!(err, Error::PlacementInfeasible { .. }));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = ScenarioConfig::default();
        for cfg in [
            ScenarioConfig { n_subnets: 0, ..base.clone() },
            ScenarioConfig { n_subbands: 3, ..base.clone() },
            ScenarioConfig { speed: -1.0, ..base.clone() },
            ScenarioConfig { tti: 0.0, ..base.clone() },
            ScenarioConfig { cell_radius: 5.0, ..base.clone() },
            ScenarioConfig { min_separation: 30.0, ..base.clone() },
        ] {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn step_length_matches_default_mobility() {
        let cfg = ScenarioConfig::default();
        assert!((cfg.step_length() - 2e-4).abs() < 1e-18);
        let state = init_deployment(&cfg, &mut rng(4)).unwrap();
        let next = step_mobility(&state, &cfg, &mut rng(5));
        for (a, b) in state.poses.iter().zip(&next.poses) {
            if a.heading == b.heading {
                assert!((distance(a.position, b.position) - 2e-4).abs() < 1e-12);
            }
            assert_eq!(a.ue_offset, b.ue_offset);
        }
    }

    #[test]
    fn zero_speed_freezes_positions() {
        let cfg = ScenarioConfig { speed: 0.0, ..Default::default() };
        let start = init_deployment(&cfg, &mut rng(6)).unwrap();
        let mut state = start.clone();
        let mut r = rng(7);
        for _ in 0..1000 {
            state = step_mobility(&state, &cfg, &mut r);
        }
        assert_eq!(state, start);
    }

    #[test]
    fn boundary_crossing_reflects_and_redraws_heading() {
        let cfg = ScenarioConfig::default();
        let eps = 1e-5;
        let state = ScenarioState {
            poses: vec![SubnetPose {
                position: [cfg.area_side - eps, 10.0],
                heading: 0.0,
                ue_offset: [0.0, 0.0],
            }],
            subband_of: vec![0],
        };
        let next = step_mobility(&state, &cfg, &mut rng(8));
        let p = next.poses[0].position;
        // Overshoot of 2e-4 - 1e-5 mirrored about the wall.
        let expected = cfg.area_side - (cfg.step_length() - eps);
        assert!((p[0] - expected).abs() < 1e-12, "{p:?}");
        assert!(p[0] <= cfg.area_side);
        assert_eq!(p[1], 10.0);
        assert_ne!(next.poses[0].heading, 0.0);
    }

    #[test]
    fn three_four_five_distance() {
        let state = ScenarioState {
            poses: vec![
                SubnetPose { position: [0.0, 0.0], heading: 0.0, ue_offset: [0.0, 0.0] },
                SubnetPose { position: [3.0, 4.0], heading: 0.0, ue_offset: [0.0, 0.0] },
            ],
            subband_of: vec![0, 0],
        };
        let geo = state.link_distances(0);
        assert_eq!(geo.interferers, vec![(1, 5.0)]);
        assert_eq!(geo.desired, 0.0);
    }

    #[test]
    fn group_of_four_yields_three_interferers() {
        let cfg = ScenarioConfig::default();
        let state = init_deployment(&cfg, &mut rng(9)).unwrap();
        for n in 0..16 {
            let geo = state.link_distances(n);
            assert_eq!(geo.interferers.len(), 3);
            assert!(geo.interferers.iter().all(|&(m, _)| state.subband_of[m] == state.subband_of[n]));
        }
    }

    #[test]
    fn unconstrained_positions_are_centered() {
        let cfg = ScenarioConfig {
            n_subnets: 1,
            n_subbands: 1,
            min_separation: 1e-9,
            cell_radius: 1e-10,
            ..Default::default()
        };
        let mut r = rng(10);
        let draws = 20_000;
        let mut sum = [0.0; 2];
        for _ in 0..draws {
            let s = init_deployment(&cfg, &mut r).unwrap();
            sum[0] += s.poses[0].position[0];
            sum[1] += s.poses[0].position[1];
        }
        for axis in sum {
            let mean = axis / draws as f64;
            assert!((mean - 10.0).abs() < 0.2, "mean {mean}");
        }
    }
}
