//! Simulation and reconstruction pipeline for widefield NV-diamond magnetic
//! imaging of microcircuit currents.
//!
//! The crate is organized around the stages of a lock-in camera measurement:
//!
//! * [`geom`] — circuit layouts as straight wire segments and the magnetic
//!   field they produce (closed-form Biot-Savart), projected onto an NV axis.
//! * [`nv`] — the NV spin model: resonance frequencies, the FM-demodulated
//!   ODMR lineshape, its slope, and pixel-value → Tesla conversion.
//! * [`waveform`] — drive current waveforms: AC square wave, bipolar pulse
//!   train, synthetic fEPSP, and arbitrary sampled traces.
//! * [`camera`] — per-pixel lock-in acquisition synthesis: oversampled
//!   modulated fluorescence, photon shot noise, square-wave I/Q
//!   demodulation, and 10-bit quantization.
//! * [`recon`] — the measurement pipeline: ODMR slope calibration, field
//!   conversion, amplitude spectra, pulse metrics, SNR masking and noise
//!   statistics.
//! * [`formats`] — on-disk interchange formats (layouts, frame stacks,
//!   field maps, slope maps, CSV outputs, PGM renders).
//! * [`config`] / [`experiment`] — declarative experiment configs and the
//!   calibrate/simulate/analyze/render stages behind the `nvw` CLI.
//!
//! All randomness is derived from a single 64-bit seed through per-pixel,
//! per-frame counter streams, so results are bit-identical regardless of
//! how work is partitioned across threads.

pub mod camera;
pub mod config;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod geom;
pub mod manifest;
pub mod nv;
pub mod recon;
pub mod rng;
pub mod vec3;
pub mod waveform;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;
