#include "sflow/dynamics.hpp"

#include <algorithm>
#include <stdexcept>

namespace sflow {

Action clamp_action(const Action& a, const VehicleParams& params) {
  return {std::clamp(a.v_ref, 0.0, params.v_max), std::clamp(a.sigma, -params.sigma_max, params.sigma_max)};
}

void PidParams::validate() const {
  if (!(kp > 0.0)) throw std::invalid_argument("pid kp must be positive");
  if (!(accel_max > 0.0)) throw std::invalid_argument("pid accel bound must be positive");
}

double pid_speed_control(const VehicleState& state, double v_ref, const PidParams& pid, PidMemory& memory,
                         double dt) {
  const double error = v_ref - state.speed;
  memory.integral += error * dt;
  const double derivative = memory.has_previous ? (error - memory.previous_error) / dt : 0.0;
  memory.previous_error = error;
  memory.has_previous = true;
  const double u = pid.kp * error + pid.ki * memory.integral + pid.kd * derivative;
  return std::clamp(u, -pid.accel_max, pid.accel_max);
}

VehicleState bicycle_step(const VehicleState& state, double accel, double sigma, double dt,
                          const VehicleParams& params) {
  const double v = state.speed;
  const double theta = state.pose.theta;
  VehicleState next;
  next.pose.x = state.pose.x + v * std::cos(theta) * dt;
  next.pose.y = state.pose.y + v * std::sin(theta) * dt;
  next.pose.theta = normalize_angle(theta + v * std::tan(sigma) / params.wheelbase * dt);
  next.speed = std::clamp(v + accel * dt, 0.0, params.v_max);
  return next;
}

}  // namespace sflow
