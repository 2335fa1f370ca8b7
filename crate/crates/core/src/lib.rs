//! Acoustic biomarkers for newborn cry recordings and linear screening models.

pub mod audio_io;
pub mod dsp;
pub mod stats;
pub mod segmenter;
pub mod biomarkers;
pub mod voicefeat;
pub mod analytics;
pub mod synthcry;
pub mod table;
pub mod config;
pub mod pipeline;
