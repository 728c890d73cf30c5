use crate::channel::{los_probability, LinkChannel};
use crate::interference::{aggregate_interference, sample_traffic, thermal_noise_power, true_sinr};
use crate::rng::{SimRng, Stream, StreamSeeds};
use crate::scenario::{init_deployment, step_mobility, ScenarioState};
use crate::{Result, RunConfig};

/// Channel of one transmitter-to-device link with its private random streams.
struct Link {
    tx: usize,
    channel: LinkChannel,
    shadow_rng: SimRng,
    los_rng: SimRng,
    /// Transmitter-to-device vector at the last step.
    rel: [f64; 2],
}

impl Link {
    fn new(cfg: &RunConfig, seeds: &StreamSeeds, state: &ScenarioState, rx: usize, tx: usize) -> Self {
        let rel = relative(state, rx, tx);
        let mut fading_rng = seeds.stream(Stream::Fading, rx as u64, tx as u64);
        let mut shadow_rng = seeds.stream(Stream::Shadowing, rx as u64, tx as u64);
        let mut los_rng = seeds.stream(Stream::LosState, rx as u64, tx as u64);
        let channel = LinkChannel::new(
            &cfg.channel,
            cfg.scenario.tti,
            norm(rel),
            &mut fading_rng,
            &mut shadow_rng,
            &mut los_rng,
        );
        Self {
            tx,
            channel,
            shadow_rng,
            los_rng,
            rel,
        }
    }

    fn step(&mut self, cfg: &RunConfig, state: &ScenarioState, rx: usize) {
        let rel = relative(state, rx, self.tx);
        let d = norm(rel);
        self.channel
            .step_los_state(los_probability(d, &cfg.channel), &cfg.channel, &mut self.los_rng);
        let moved = norm([rel[0] - self.rel[0], rel[1] - self.rel[1]]);
        self.channel.step_shadowing(moved, &cfg.channel, &mut self.shadow_rng);
        self.channel.step_fading();
        self.rel = rel;
    }

    fn gain(&self, cfg: &RunConfig) -> f64 {
        self.channel.gain(norm(self.rel), &cfg.channel)
    }
}

fn relative(state: &ScenarioState, rx: usize, tx: usize) -> [f64; 2] {
    let device = state.poses[rx].device_position();
    let ap = state.poses[tx].position;
    [device[0] - ap[0], device[1] - ap[1]]
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Ground truth seen by one device in one TTI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceTruth {
    pub ipv: f64,
    pub signal_power: f64,
    pub sinr: f64,
}

/// Deployment, channels and traffic of one drop.
pub struct World<'a> {
    cfg: &'a RunConfig,
    state: ScenarioState,
    desired: Vec<Link>,
    interferers: Vec<Vec<Link>>,
    mobility_rng: SimRng,
    traffic_rng: SimRng,
    noise: f64,
    tti: usize,
}

impl<'a> World<'a> {
    pub fn new(cfg: &'a RunConfig, seeds: &StreamSeeds) -> Result<Self> {
        let mut deploy_rng = seeds.stream(Stream::Deployment, 0, 0);
        let state = init_deployment(&cfg.scenario, &mut deploy_rng)?;
        let n = state.n_subnets();
        let desired = (0..n).map(|m| Link::new(cfg, seeds, &state, m, m)).collect();
        let interferers = (0..n)
            .map(|m| {
                state
                    .interferers_of(m)
                    .into_iter()
                    .map(|tx| Link::new(cfg, seeds, &state, m, tx))
                    .collect()
            })
            .collect();
        Ok(Self {
            cfg,
            state,
            desired,
            interferers,
            mobility_rng: seeds.stream(Stream::Mobility, 0, 0),
            traffic_rng: seeds.stream(Stream::Traffic, 0, 0),
            noise: thermal_noise_power(&cfg.noise),
            tti: 0,
        })
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn n_subnets(&self) -> usize {
        self.state.n_subnets()
    }

    pub fn state(&self) -> &ScenarioState {
        &self.state
    }

    /// Produces the ground truth of the current TTI for every device and
    /// moves the world on to the next TTI. TTI 0 uses the deployment as drawn.
    pub fn next_tti(&mut self, out: &mut Vec<DeviceTruth>) {
        let cfg = self.cfg;
        if self.tti > 0 {
            self.state = step_mobility(&self.state, &cfg.scenario, &mut self.mobility_rng);
            for (m, link) in self.desired.iter_mut().enumerate() {
                link.step(cfg, &self.state, m);
            }
            for (m, links) in self.interferers.iter_mut().enumerate() {
                for link in links {
                    link.step(cfg, &self.state, m);
                }
            }
        }
        let active = sample_traffic(self.n_subnets(), &cfg.traffic, &mut self.traffic_rng);
        let p = cfg.traffic.tx_power();
        out.clear();
        let mut gains = Vec::new();
        let mut mask = Vec::new();
        for m in 0..self.n_subnets() {
            gains.clear();
            mask.clear();
            for link in &self.interferers[m] {
                gains.push(link.gain(cfg));
                mask.push(active[link.tx]);
            }
            let ipv = aggregate_interference(&gains, &mask, &cfg.traffic);
            let signal_power = p * self.desired[m].gain(cfg);
            out.push(DeviceTruth {
                ipv,
                signal_power,
                sinr: true_sinr(signal_power, ipv, self.noise),
            });
        }
        self.tti += 1;
    }
}
