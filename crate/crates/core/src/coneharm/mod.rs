//! Cone partitions of frequency space and dyadic seminorm profiles.

pub mod partition;
pub mod profile;
pub mod stft;

pub use partition::ConePartition;
pub use profile::{
    band_seminorm, cone_seminorm_profile, full_seminorm, sector_profiles, DyadicProfile, Exponent, ProfileConfig,
    Verdict,
};
pub use stft::{mod_sector_profiles, mod_seminorm_profile, stft, stft_near, Flavor, GaborCoefficients};
