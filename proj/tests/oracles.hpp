#pragma once

// Independent reference computations and generators shared by the unit tests
// and the acceptance runner. Nothing here calls into the code it checks.

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "sflow/policy.hpp"

namespace sflow::testing {

/// Car-following law written out term by term with the published constants.
double idm_by_hand(double v_back, double v_front, double gap);

/// Splits a flat row-major feature block into polylines of `width`-wide rows.
std::vector<std::vector<std::vector<double>>> split_polylines(const std::vector<std::uint32_t>& counts,
                                                              const std::vector<float>& flat, std::size_t width);

/// Forward pass in plain loops over the bundle's named tensors.
std::vector<double> reference_forward(const WeightBundle& w, const SerializedObservation& obs);

NetworkShape random_network_shape(std::mt19937_64& g, int width, OutputKind kind);
SerializedObservation random_observation(std::mt19937_64& g, int width, int n_dyn, int n_static, int max_rows);

/// Copy with every weight and bias multiplied by `factor` (meta untouched).
std::shared_ptr<const WeightBundle> scaled_bundle(const WeightBundle& w, float factor);

}  // namespace sflow::testing
