#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>

#include "json.hpp"
#include "sflow/policy.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace sflow {
namespace {

namespace fs = std::filesystem;
using testing::draw;
using testing::draw_int;
using Vec = std::vector<double>;

const fs::path kFixtures = SFLOW_TEST_FIXTURES;

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ------------------------------------------------------------------- tests

TEST(Inference, MatchesPlainReferenceOnRandomBundles) {
  auto g = testing::rng(81);
  for (int trial = 0; trial < 100; ++trial) {
    const int width = draw_int(g, 5, 6);
    const OutputKind kind = width == 6 ? OutputKind::action : OutputKind::svo;
    const auto w = init_weights(testing::random_network_shape(g, width, kind), 1000 + trial);
    const int n_dyn = draw_int(g, 1, 2);
    const SerializedObservation obs = testing::random_observation(g, width, n_dyn, draw_int(g, 0, 3 - n_dyn), 4);
    const Vec got = decode_raw(obs, *w), want = testing::reference_forward(*w, obs);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < got.size(); ++k) EXPECT_NEAR(got[k], want[k], 1e-5) << "trial " << trial;
  }
}

TEST(Inference, GoldenFixturesMatchIndependentForwardPass) {
  const auto expected = nlohmann::json::parse(std::ifstream(kFixtures / "golden_expected.json"));
  for (const std::string label : {"lower", "adversary"}) {
    const auto w = load_weights(kFixtures / ("golden_" + label + ".svow"));
    const SerializedObservation obs = observation_from_bytes(read_bytes(kFixtures / ("golden_" + label + "_obs.svob")));
    const Vec raw = decode_raw(obs, *w);
    const auto want = expected[label]["raw"].get<Vec>();
    ASSERT_EQ(raw.size(), want.size());
    for (std::size_t k = 0; k < raw.size(); ++k) EXPECT_NEAR(raw[k], want[k], 1e-5) << label;
    const Vec ref = testing::reference_forward(*w, obs);
    for (std::size_t k = 0; k < raw.size(); ++k) EXPECT_NEAR(ref[k], want[k], 1e-5) << label;
  }
}

TEST(Inference, GoldenBundleRoundTripsBitwise) {
  for (const char* name : {"golden_lower.svow", "golden_adversary.svow"}) {
    const auto bytes = read_bytes(kFixtures / name);
    EXPECT_EQ(weights_to_bytes(*weights_from_bytes(bytes)), bytes) << name;
  }
}

TEST(Inference, CrcMatchesCastagnoliCheckValue) {
  const std::string check = "123456789";
  const auto expected = nlohmann::json::parse(std::ifstream(kFixtures / "golden_expected.json"));
  const std::uint32_t crc = crc32c(std::span(reinterpret_cast<const std::uint8_t*>(check.data()), check.size()));
  EXPECT_EQ(crc, 0xE3069283u);
  EXPECT_EQ(crc, expected["crc32c_check"].get<std::uint32_t>());
}

TEST(Inference, SetEncodingIgnoresPolylineOrder) {
  auto g = testing::rng(82);
  for (int trial = 0; trial < 50; ++trial) {
    const auto w = init_weights(testing::random_network_shape(g, 6, OutputKind::action), 2000 + trial);
    SerializedObservation obs = testing::random_observation(g, 6, draw_int(g, 2, 5), draw_int(g, 1, 5), 6);
    obs.query_index = 0;
    const Vec base = encode_observation(obs, *w);

    auto dyn = testing::split_polylines(obs.dynamic_rows, obs.dynamic, 6);
    auto sta = testing::split_polylines(obs.static_rows, obs.statics, 5);
    std::shuffle(dyn.begin() + 1, dyn.end(), g);
    std::shuffle(sta.begin(), sta.end(), g);
    for (auto& rows : dyn) std::shuffle(rows.begin(), rows.end(), g);  // rows within a polyline too
    SerializedObservation perm;
    perm.dynamic_width = 6;
    for (const auto& p : dyn) {
      perm.dynamic_rows.push_back(static_cast<std::uint32_t>(p.size()));
      for (const Vec& r : p) perm.dynamic.insert(perm.dynamic.end(), r.begin(), r.end());
    }
    for (const auto& p : sta) {
      perm.static_rows.push_back(static_cast<std::uint32_t>(p.size()));
      for (const Vec& r : p) perm.statics.insert(perm.statics.end(), r.begin(), r.end());
    }
    const Vec got = encode_observation(perm, *w);
    for (std::size_t k = 0; k < base.size(); ++k) EXPECT_NEAR(got[k], base[k], 1e-6);
  }
}

TEST(Inference, OutputsStayInsideBounds) {
  auto s = testing::bundled(ScenarioName::intersection);
  auto g = testing::rng(83);
  const CaseSpec c = generate_cases(*s, 1, 83, SvoUniform{}).front();
  WorldState world = reset(s, c, EnvMode::ego_vs_flow);
  for (int t = 0; t < 20; ++t) step(world, testing::uniform_actions(world, {5.0, 0.0}));
  SvoContext genuine;
  for (const AgentRecord& a : world.agents) genuine.genuine.push_back(a.genuine_svo);

  NetworkShape lower;
  lower.feature_dim = 8;
  lower.heads = 2;
  lower.vector_hidden = {8};
  lower.decoder_hidden = {8, 8};
  NetworkShape adv = lower;
  adv.input_width = 5;
  adv.output = OutputKind::svo;
  for (int trial = 0; trial < 40; ++trial) {
    const float factor = static_cast<float>(draw(g, 0.1, 60.0));
    const auto lw = testing::scaled_bundle(*init_weights(lower, 3000 + trial), factor);
    const PolicyHandle lp = PolicyHandle::neural_lower(lw);
    const PolicyHandle ap = PolicyHandle::neural_adversary(testing::scaled_bundle(*init_weights(adv, 4000 + trial), factor));
    for (const AgentRecord& a : world.agents) {
      if (!a.alive()) continue;
      const ObservationFrame obs =
          attach_context(build_observation(a.id, world), communicate(CommFullyVisible{}, a.id, genuine, nullptr, 0, 30));
      const Action act_out = act(lp, a.id, world, &obs);
      EXPECT_GE(act_out.v_ref, 0.0);
      // bounds as stored in the file (single precision)
      EXPECT_LE(act_out.v_ref, lw->shape().v_max);
      EXPECT_LE(std::abs(act_out.sigma), lw->shape().sigma_max);
      EXPECT_EQ(act(lp, a.id, world, &obs), act_out);  // pure function
      if (a.id == 1 || !world.agents[0].alive()) continue;
      const double svo = act_adversary(ap, build_adversary_observation(a.id, world));
      EXPECT_GE(svo, 0.0);
      EXPECT_LE(svo, 90.0);
    }
  }
}

TEST(Inference, WidthMismatchIsReported) {
  const auto w = init_weights(NetworkShape{}, 5);
  auto g = testing::rng(84);
  EXPECT_THROW(decode_raw(testing::random_observation(g, 5, 2, 1, 3), *w), ShapeMismatch);
  EXPECT_THROW(PolicyHandle::neural_adversary(w), RoleMismatch);
  NetworkShape a;
  a.input_width = 5;
  a.output = OutputKind::svo;
  EXPECT_THROW(PolicyHandle::neural_lower(init_weights(a, 5)), RoleMismatch);
}

TEST(WeightFile, DefaultShapeRoundTripsThroughDisk) {
  const auto w = init_weights(NetworkShape{}, 6);
  const fs::path p = fs::temp_directory_path() / "sflow_roundtrip.svow";
  save_weights(*w, p);
  const auto back = load_weights(p);
  EXPECT_EQ(back->tensors(), w->tensors());
  EXPECT_EQ(back->shape(), w->shape());
  EXPECT_EQ(weights_to_bytes(*back), read_bytes(p));
  fs::remove(p);
}

TEST(WeightFile, CorruptionIsDetected) {
  const auto bytes = weights_to_bytes(*init_weights(NetworkShape{}, 7));
  auto bad = bytes;
  bad[bad.size() / 2] ^= 0x10;
  EXPECT_THROW(weights_from_bytes(bad), ChecksumMismatch);
  bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(weights_from_bytes(bad), BadMagic);
  bad = bytes;
  bad.resize(bytes.size() - 9);
  EXPECT_THROW(weights_from_bytes(bad), WeightFormatError);
  EXPECT_THROW(weights_from_bytes(std::vector<std::uint8_t>{'S', 'V'}), BadMagic);
}

std::vector<std::uint8_t> with_crc(std::vector<std::uint8_t> body) {
  const std::uint32_t crc = crc32c(body);
  for (int i = 0; i < 4; ++i) body.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
  return body;
}

TEST(WeightFile, VersionIsChecked) {
  auto bytes = weights_to_bytes(*init_weights(NetworkShape{}, 8));
  bytes.resize(bytes.size() - 4);
  bytes[4] = 2;
  EXPECT_THROW(weights_from_bytes(with_crc(bytes)), WeightFormatError);
}

TEST(WeightFile, EmptyModelIsASchemaError) {
  const std::vector<std::uint8_t> body{'S', 'V', 'O', 'W', 1, 0, 0, 0, 0, 0, 0, 0};
  try {
    weights_from_bytes(with_crc(body));
    FAIL();
  } catch (const ShapeInconsistency& e) {
    EXPECT_EQ(e.tensor(), "meta");
  }
}

std::string offending(std::vector<NamedTensor> tensors) {
  try {
    WeightBundle::from_tensors(std::move(tensors));
  } catch (const ShapeInconsistency& e) {
    return e.tensor();
  }
  return "";
}

Tensor& named(std::vector<NamedTensor>& ts, const std::string& name) {
  return std::find_if(ts.begin(), ts.end(), [&](const NamedTensor& t) { return t.name == name; })->tensor;
}

TEST(WeightFile, ShapeErrorsNameTheTensor) {
  const auto base = init_weights(NetworkShape{}, 9)->tensors();

  auto t = base;
  std::swap(named(t, "dyn.vector_mlp.0.weight").shape[0], named(t, "dyn.vector_mlp.0.weight").shape[1]);
  EXPECT_EQ(offending(t), "dyn.vector_mlp.0");

  t = base;
  std::swap(named(t, "decoder_mlp.2.weight").shape[0], named(t, "decoder_mlp.2.weight").shape[1]);
  EXPECT_EQ(offending(t), "decoder_mlp.2");

  t = base;
  t.push_back({"extra.weight", Tensor{{1}, {0.0f}}});
  EXPECT_EQ(offending(t), "extra.weight");

  t = base;
  t.erase(std::find_if(t.begin(), t.end(), [](const NamedTensor& n) { return n.name == "mha.b_v"; }));
  EXPECT_EQ(offending(t), "mha.w_v");

  t = base;
  named(t, "meta").data[1] = 3.0f;  // 64 features over 3 heads
  EXPECT_EQ(offending(t), "mha.w_q");

  t = base;
  named(t, "meta").data[0] = 7.0f;
  EXPECT_EQ(offending(t), "meta");

  t = base;
  t.push_back(t.front());
  EXPECT_EQ(offending(t), t.front().name);

  t = base;
  named(t, "meta").data[2] = 1.0f;  // svo output but two decoder outputs
  EXPECT_EQ(offending(t), "decoder_mlp.2");

  t = base;
  named(t, "static.post_mlp.0.weight").data.pop_back();
  EXPECT_EQ(offending(t), "static.post_mlp.0.weight");
}

TEST(WeightFile, StaticEncoderWidthMustMatch) {
  NetworkShape s;
  s.feature_dim = 8;
  s.heads = 2;
  auto t = init_weights(s, 10)->tensors();
  NetworkShape wide = s;
  wide.feature_dim = 16;
  wide.heads = 2;
  const auto other = init_weights(wide, 10)->tensors();
  for (const char* n : {"static.post_mlp.0.weight", "static.post_mlp.0.bias"}) {
    named(t, n) = std::find_if(other.begin(), other.end(), [&](const NamedTensor& x) { return x.name == n; })->tensor;
  }
  EXPECT_EQ(offending(t), "static.post_mlp.0");
}

TEST(WeightFile, DecoderNeedsThreeLayers) {
  auto t = init_weights(NetworkShape{}, 11)->tensors();
  t.push_back({"decoder_mlp.3.weight", Tensor{{2, 2}, std::vector<float>(4, 0.0f)}});
  t.push_back({"decoder_mlp.3.bias", Tensor{{2}, {0.0f, 0.0f}}});
  EXPECT_EQ(offending(t), "decoder_mlp");
}

TEST(WeightFile, MetaDescribesTheNetwork) {
  NetworkShape s;
  s.post_hidden = {32};
  const auto w = init_weights(s, 12);
  NetworkShape stored = s;
  stored.sigma_max = static_cast<float>(s.sigma_max);
  EXPECT_EQ(w->shape(), stored);
  EXPECT_EQ(w->tensor("meta").data, (std::vector<float>{6, 4, 0, 10, 0.6f, 0, 0, 0}));
}

}  // namespace
}  // namespace sflow
