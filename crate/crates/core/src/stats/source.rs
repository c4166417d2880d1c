use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::Domain;
use crate::sampler::{chain_rng, MasterSample, MasterSampler, SamplerContext, RELEASE_CHECK_EVERY};

/// Monte Carlo effort of an estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McParams {
    pub seed: u64,
    pub chains: usize,
    /// Total number of samples over all chains.
    pub samples: usize,
    pub burn_in: usize,
    pub thinning: usize,
}

impl Default for McParams {
    fn default() -> Self {
        McParams {
            seed: 0,
            chains: 1,
            samples: 10_000,
            burn_in: 100,
            thinning: 10,
        }
    }
}

impl McParams {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 || self.samples == 0 || self.thinning == 0 {
            return invalid("chains, samples and thinning must be positive");
        }
        Ok(())
    }

    /// Samples drawn by chain `c`; the remainder goes to the first chains.
    pub fn samples_of_chain(&self, c: usize) -> usize {
        self.samples / self.chains + usize::from(c < self.samples % self.chains)
    }

    /// Same effort under another seed.
    pub fn reseeded(&self, seed: u64) -> McParams {
        McParams { seed, ..self.clone() }
    }
}

/// Stream of master samples on a fixed domain.
pub trait SampleSource: Send {
    fn domain(&self) -> &Domain;
    fn next_sample(&mut self) -> Result<MasterSample>;
}

/// Samples from one Markov chain, burnt in on first use.
pub struct ChainSource<'c> {
    sampler: MasterSampler<'c>,
    rng: ChaCha8Rng,
    burn_in: usize,
    thinning: usize,
    drawn: usize,
}

impl<'c> ChainSource<'c> {
    pub fn new(ctx: &'c SamplerContext, seed: u64, chain: u64, burn_in: usize, thinning: usize) -> Result<Self> {
        Ok(ChainSource {
            sampler: ctx.sampler()?,
            rng: chain_rng(seed, chain),
            burn_in,
            thinning: thinning.max(1),
            drawn: 0,
        })
    }
}

impl SampleSource for ChainSource<'_> {
    fn domain(&self) -> &Domain {
        self.sampler.context().domain()
    }

    fn next_sample(&mut self) -> Result<MasterSample> {
        if self.drawn == 0 {
            self.sampler.advance(self.burn_in, &mut self.rng);
        }
        let s = self.sampler.next(self.thinning, &mut self.rng)?;
        if cfg!(debug_assertions) || self.drawn % RELEASE_CHECK_EVERY == 0 {
            self.sampler.context().check_invariants(&s)?;
        }
        self.drawn += 1;
        Ok(s)
    }
}

/// Source repeating one fixed sample; used to test estimators on known configurations.
pub struct FixedSource {
    domain: Domain,
    sample: MasterSample,
}

impl FixedSource {
    pub fn new(domain: Domain, sample: MasterSample) -> Self {
        FixedSource { domain, sample }
    }
}

impl SampleSource for FixedSource {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn next_sample(&mut self) -> Result<MasterSample> {
        Ok(self.sample.clone())
    }
}

/// One chain source per chain of `p`, with the number of samples each should draw.
pub fn chain_sources<'c>(ctx: &'c SamplerContext, p: &McParams) -> Result<Vec<(ChainSource<'c>, usize)>> {
    p.validate()?;
    (0..p.chains)
        .map(|c| Ok((ChainSource::new(ctx, p.seed, c as u64, p.burn_in, p.thinning)?, p.samples_of_chain(c))))
        .collect()
}

/// Apply `f` to `count` samples of every source, in parallel over sources.
pub fn gather<S, T, F>(sources: &mut [(S, usize)], f: F) -> Result<Vec<Vec<T>>>
where
    S: SampleSource,
    T: Send,
    F: Fn(&MasterSample, &Domain) -> Result<T> + Sync,
{
    sources
        .par_iter_mut()
        .map(|(src, count)| {
            let mut out = Vec::with_capacity(*count);
            for _ in 0..*count {
                let s = src.next_sample()?;
                out.push(f(&s, src.domain())?);
            }
            Ok(out)
        })
        .collect()
}

/// Run `p.chains` chains on `ctx` and apply `f` to every sample.
pub fn gather_chains<T, F>(ctx: &SamplerContext, p: &McParams, f: F) -> Result<Vec<Vec<T>>>
where
    T: Send,
    F: Fn(&MasterSample, &Domain) -> Result<T> + Sync,
{
    let mut sources = chain_sources(ctx, p)?;
    gather(&mut sources, f)
}
