//! Control and closed-loop simulation for fully-actuated multirotors.
//!
//! A multirotor with tilted rotor axes can produce force along its body x/y
//! axes, but only a bounded amount of it (a laterally bounded force, LBF,
//! platform). This crate implements the two halves of flying such a vehicle:
//!
//! - attitude setpoint strategies that decide how much the vehicle should
//!   tilt, from "not at all" to "as much as an underactuated quadrotor"
//!   ([`attitude`]), and
//! - thrust setpoint strategies that keep the commanded body force inside
//!   the lateral bound while giving up as little as possible ([`thrust`]).
//!
//! Around those sit a motor allocation layer for a tilted-rotor hexarotor
//! ([`allocation`]), a rigid-body simulator ([`sim`]), a cascaded
//! position/attitude controller ([`controller`]), and a scenario runner with
//! CSV telemetry ([`scenario`]).
//!
//! All frames are right-handed: the inertial frame is NED (north, east,
//! down), the body frame FRD (forward, right, down). Gravity points along
//! inertial +z and usable thrust along body -z. See [`frames`] for the
//! conventions shared by every module.

pub mod allocation;
pub mod attitude;
pub mod controller;
pub mod frames;
pub mod scenario;
pub mod sim;
pub mod thrust;
