#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sflow/dynamics.hpp"
#include "sflow/idm.hpp"
#include "sflow/observation.hpp"

namespace sflow {

class WeightFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BadMagic : public WeightFormatError {
 public:
  BadMagic() : WeightFormatError("weight file does not start with SVOW") {}
};

class ChecksumMismatch : public WeightFormatError {
 public:
  ChecksumMismatch(std::uint32_t stored, std::uint32_t computed);
};

/// Tensor shapes disagree; `tensor()` names the offending tensor or layer prefix.
class ShapeInconsistency : public WeightFormatError {
 public:
  ShapeInconsistency(std::string tensor, const std::string& detail);
  const std::string& tensor() const { return tensor_; }

 private:
  std::string tensor_;
};

/// Observation width does not match the network input.
class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Policy used for the wrong role (lower-level vs adversary).
class RoleMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<float> data;  // row-major

  std::size_t numel() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

enum class OutputKind { action = 0, svo = 1 };

/// Shape summary derived from a validated bundle.
struct NetworkShape {
  int input_width = 6;  // dynamic vector length V
  int feature_dim = 64;  // D
  int heads = 4;
  OutputKind output = OutputKind::action;
  double v_max = 10.0;
  double sigma_max = 0.6;
  std::vector<int> vector_hidden = {64, 64};  // vector_mlp widths (both encoders)
  std::vector<int> post_hidden = {};          // post_mlp widths before the final D layer
  std::vector<int> decoder_hidden = {64, 64};

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

struct Network;

/// Immutable, validated set of named tensors plus the compiled forward pass.
class WeightBundle {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  /// Validates shapes and compiles the network. Throws ShapeInconsistency.
  static std::shared_ptr<const WeightBundle> from_tensors(std::vector<NamedTensor> tensors);

  const std::vector<NamedTensor>& tensors() const { return tensors_; }
  const Tensor& tensor(std::string_view name) const;
  const NetworkShape& shape() const { return shape_; }
  const Network& network() const { return *network_; }

 private:
  std::vector<NamedTensor> tensors_;
  NetworkShape shape_;
  std::shared_ptr<const Network> network_;
};

/// Deterministic scaled-uniform initialization for the given shape.
std::shared_ptr<const WeightBundle> init_weights(const NetworkShape& shape, std::uint64_t seed);

std::vector<std::uint8_t> weights_to_bytes(const WeightBundle& bundle);
std::shared_ptr<const WeightBundle> weights_from_bytes(std::span<const std::uint8_t> bytes);
void save_weights(const WeightBundle& bundle, const std::filesystem::path& path);
std::shared_ptr<const WeightBundle> load_weights(const std::filesystem::path& path);

/// CRC-32C (Castagnoli) as used by the weight file trailer.
std::uint32_t crc32c(std::span<const std::uint8_t> bytes);

/// Attended D-dimensional feature of the query polyline.
std::vector<double> encode_observation(const SerializedObservation& obs, const WeightBundle& w);
std::vector<double> encode_observation(const ObservationFrame& obs, const WeightBundle& w);

/// Raw decoder output before squashing (2 values for actions, 1 for SVO).
std::vector<double> decode_raw(const SerializedObservation& obs, const WeightBundle& w);

enum class PolicyKind { idm_scripted, neural_lower, neural_adversary, constant_action };

std::string_view to_string(PolicyKind k);

struct PolicyHandle {
  PolicyKind kind = PolicyKind::idm_scripted;
  std::shared_ptr<const WeightBundle> weights;
  Action constant;
  bool parameter_shared = true;
  LeaderSearch leader;
  double lookahead = 5.0;

  static PolicyHandle idm();
  static PolicyHandle constant_action(Action a);
  /// Throws RoleMismatch when the bundle's input width or output kind does not fit the role.
  static PolicyHandle neural_lower(std::shared_ptr<const WeightBundle> w);
  static PolicyHandle neural_adversary(std::shared_ptr<const WeightBundle> w);

  bool needs_observation() const { return kind == PolicyKind::neural_lower; }
};

/// Scripted IDM longitudinal control with pure-pursuit steering.
Action idm_action(int agent, const WorldState& world, const LeaderSearch& search = {}, double lookahead = 5.0);

/// Lower-level action for `agent`. Neural policies need `obs` with context attached.
Action act(const PolicyHandle& policy, int agent, const WorldState& world, const ObservationFrame* obs);

/// Mistaken ego SVO in [0, 90] degrees from an adversary observation.
double act_adversary(const PolicyHandle& policy, const ObservationFrame& obs);

}  // namespace sflow
