//! Transmission scheduling for links where both the transmitter and the
//! receiver run on harvested energy.
//!
//! The transmitter's harvest limits how fast bits can go out; the receiver's
//! harvest limits how long it can listen. [`offline_single::off`] and
//! [`offline_multi::offm`] compute the minimum finish time with full
//! knowledge of both profiles, [`online::on_simulate`] runs the causal
//! policy, and [`finite_battery`] covers the slotted Accumulate&Dump
//! algorithms with bounded batteries. [`oracle`] holds brute-force
//! references and [`harness`] runs seeded Monte Carlo experiments.

// Negated float comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod finite_battery;
pub mod fmt;
pub mod harness;
pub mod offline_multi;
pub mod offline_single;
pub mod online;
pub mod oracle;
pub mod policy;
pub mod profiles;
pub mod rate;
