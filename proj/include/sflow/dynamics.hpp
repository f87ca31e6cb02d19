#pragma once

#include "sflow/geometry.hpp"
#include "sflow/scenario.hpp"

namespace sflow {

struct VehicleState {
  Pose2D pose;
  double speed = 0.0;

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

/// Reference speed and steering angle.
struct Action {
  double v_ref = 0.0;
  double sigma = 0.0;

  friend bool operator==(const Action&, const Action&) = default;
};

/// Clamps an action into [0, v_max] x [-sigma_max, sigma_max].
Action clamp_action(const Action& a, const VehicleParams& params);

struct PidParams {
  double kp = 2.0;
  double ki = 0.0;
  double kd = 0.0;
  double accel_max = 5.0;

  void validate() const;
  friend bool operator==(const PidParams&, const PidParams&) = default;
};

/// Per-agent integral and previous-error record.
struct PidMemory {
  double integral = 0.0;
  double previous_error = 0.0;
  bool has_previous = false;

  friend bool operator==(const PidMemory&, const PidMemory&) = default;
};

/// Speed-tracking PID; returns acceleration clamped to [-accel_max, accel_max].
double pid_speed_control(const VehicleState& state, double v_ref, const PidParams& pid, PidMemory& memory,
                         double dt);

/// Rear-axle kinematic bicycle, explicit Euler. Speed is clamped to [0, v_max].
VehicleState bicycle_step(const VehicleState& state, double accel, double sigma, double dt,
                          const VehicleParams& params);

}  // namespace sflow
