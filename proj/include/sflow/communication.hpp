#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace sflow {

struct ObservationFrame;

/// SVO value delivered in place of a context the receiver may not see.
inline constexpr double kInvisibleSvo = -1.0;

enum class Provenance { genuine, mistaken, invisible, constant };

/// Genuine per-agent SVO angles in degrees, indexed by agent id - 1.
struct SvoContext {
  std::vector<double> genuine;
};

struct DeliveredContext {
  std::vector<std::optional<double>> entries;  // nullopt for invisible entries
  std::vector<Provenance> provenance;

  /// Entry for agent `id` or the invisible sentinel.
  double value(int id) const;
  std::size_t size() const { return entries.size(); }
  friend bool operator==(const DeliveredContext&, const DeliveredContext&) = default;
};

/// Produces the mistaken ego SVO from an adversary observation.
using MistakenSource = std::function<double(const ObservationFrame&)>;

struct CommConstant {
  double c0 = 0.0;
};
struct CommSelfVisible {};
struct CommFullyVisible {};
struct CommAdversarial {
  MistakenSource source;
};

using CommMode = std::variant<CommConstant, CommSelfVisible, CommFullyVisible, CommAdversarial>;

class MissingAdversaryObservation : public std::invalid_argument {
 public:
  MissingAdversaryObservation() : std::invalid_argument("adversarial delivery needs an adversary observation") {}
};

class ContextOutOfRange : public std::out_of_range {
 public:
  explicit ContextOutOfRange(double value);
  double value;
};

/// Context delivered to `receiver` (1-based id). `adv_obs` is consulted only in
/// adversarial mode while the ego is within `clip_radius` of the receiver.
DeliveredContext communicate(const CommMode& mode, int receiver, const SvoContext& genuine,
                             const ObservationFrame* adv_obs, double ego_distance, double clip_radius);

}  // namespace sflow
