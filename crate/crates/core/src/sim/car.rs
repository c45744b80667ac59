use std::f64::consts::PI;

/// Physical constants of the 1:16-scale car.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarParams {
    pub wheelbase: f64,
    pub max_steer: f64,
    pub max_speed: f64,
    /// Acceleration at full throttle, m/s².
    pub max_accel: f64,
    /// Linear speed drag, 1/s. Equilibrium speed is `max_accel * throttle / drag`.
    pub drag: f64,
    pub dt: f64,
}

impl Default for CarParams {
    fn default() -> Self {
        Self {
            wheelbase: 0.25,
            max_steer: 25f64.to_radians(),
            max_speed: 2.5,
            max_accel: 2.5,
            drag: 1.0,
            dt: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarState {
    pub x: f64,
    pub y: f64,
    /// Radians in (−π, π].
    pub heading: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Control {
    /// In [−1, 1], scaled by `max_steer`. Positive steers left.
    pub steering: f64,
    /// In [0, 1].
    pub throttle: f64,
}

impl Control {
    pub fn new(steering: f64, throttle: f64) -> Self {
        Self {
            steering: steering.clamp(-1.0, 1.0),
            throttle: throttle.clamp(0.0, 1.0),
        }
    }
}

pub fn normalize_angle(a: f64) -> f64 {
    let mut a = a.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

impl CarParams {
    pub fn acceleration(&self, speed: f64, throttle: f64) -> f64 {
        self.max_accel * throttle - self.drag * speed
    }

    /// Throttle that holds `speed` constant.
    pub fn holding_throttle(&self, speed: f64) -> f64 {
        (self.drag * speed / self.max_accel).clamp(0.0, 1.0)
    }
}

/// One kinematic bicycle step.
///
/// Distance along the heading uses constant-acceleration integration,
/// `v·dt + ½·a·dt²`, with `a` limited so the speed stays in `[0, max_speed]`.
/// Heading rate is evaluated at the speed at the start of the step.
pub fn step_kinematics(params: &CarParams, state: CarState, control: Control, dt: f64) -> CarState {
    let delta = control.steering.clamp(-1.0, 1.0) * params.max_steer;
    let accel = params.acceleration(state.speed, control.throttle.clamp(0.0, 1.0));
    let new_speed = (state.speed + accel * dt).clamp(0.0, params.max_speed);
    let distance = 0.5 * (state.speed + new_speed) * dt;
    let (s, c) = state.heading.sin_cos();
    let heading = if delta == 0.0 {
        state.heading
    } else {
        normalize_angle(state.heading + state.speed / params.wheelbase * delta.tan() * dt)
    };
    CarState {
        x: state.x + distance * c,
        y: state.y + distance * s,
        heading,
        speed: new_speed,
    }
}
