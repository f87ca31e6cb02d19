#include "sflow/communication.hpp"

#include <string>

namespace sflow {

namespace {

double checked(double v) {
  if (!(v >= 0.0 && v <= 90.0)) throw ContextOutOfRange(v);
  return v;
}

}  // namespace

ContextOutOfRange::ContextOutOfRange(double v)
    : std::out_of_range("context value " + std::to_string(v) + " outside [0, 90] degrees"), value(v) {}

double DeliveredContext::value(int id) const {
  const auto& e = entries.at(static_cast<std::size_t>(id - 1));
  return e ? *e : kInvisibleSvo;
}

DeliveredContext communicate(const CommMode& mode, int receiver, const SvoContext& genuine,
                             const ObservationFrame* adv_obs, double ego_distance, double clip_radius) {
  const std::size_t n = genuine.genuine.size();
  if (receiver < 1 || static_cast<std::size_t>(receiver) > n) {
    throw std::invalid_argument("receiver " + std::to_string(receiver) + " outside the context");
  }
  DeliveredContext out;
  out.entries.resize(n);
  out.provenance.resize(n);

  if (const auto* c = std::get_if<CommConstant>(&mode)) {
    const double v = checked(c->c0);
    for (std::size_t i = 0; i < n; ++i) {
      out.entries[i] = v;
      out.provenance[i] = Provenance::constant;
    }
    return out;
  }
  if (std::holds_alternative<CommSelfVisible>(mode)) {
    for (std::size_t i = 0; i < n; ++i) out.provenance[i] = Provenance::invisible;
    const auto self = static_cast<std::size_t>(receiver - 1);
    out.entries[self] = checked(genuine.genuine[self]);
    out.provenance[self] = Provenance::genuine;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.entries[i] = checked(genuine.genuine[i]);
    out.provenance[i] = Provenance::genuine;
  }
  if (const auto* adv = std::get_if<CommAdversarial>(&mode)) {
    if (ego_distance > clip_radius) return out;
    if (adv_obs == nullptr || !adv->source) throw MissingAdversaryObservation();
    out.entries[0] = checked(adv->source(*adv_obs));
    out.provenance[0] = Provenance::mistaken;
  }
  return out;
}

}  // namespace sflow
