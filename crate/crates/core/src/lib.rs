//! Lane-driving reinforcement-learning laboratory.
//!
//! A deterministic track simulator with a synthetic front camera ([`sim`]),
//! a lane-segmentation pipeline ([`vision`]), a small convolutional
//! Q-network ([`qnet`]), a double-DQN learner ([`agent`]), a gym-style
//! environment ([`env`]) and a line-delimited JSON bridge that lets remote
//! agents drive the car ([`wire`]).

pub mod agent;
pub mod env;
pub mod par;
pub mod qnet;
pub mod sim;
pub mod vision;
pub mod wire;
