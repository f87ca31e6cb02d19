#include "sflow/policy.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <boost/crc.hpp>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <set>

#include "sflow/random.hpp"

namespace sflow {

namespace {

constexpr char kWeightMagic[4] = {'S', 'V', 'O', 'W'};
constexpr std::uint32_t kDtypeF32 = 0;
constexpr std::size_t kMetaLength = 8;
constexpr double kActivationRelu = 0.0;

}  // namespace

struct Linear {
  Eigen::MatrixXd w;
  Eigen::VectorXd b;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return w * x + b; }
};

struct Encoder {
  std::vector<Linear> vector_mlp;
  std::vector<Linear> post_mlp;
};

struct Network {
  Encoder dynamic;
  Encoder statics;
  Linear q, k, v, o;
  std::vector<Linear> decoder;
};

namespace {

Eigen::VectorXd relu(Eigen::VectorXd x) { return x.cwiseMax(0.0); }

Eigen::VectorXd encode_polyline(const Encoder& enc, const float* rows, std::size_t count, std::size_t width) {
  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(enc.vector_mlp.back().b.size());
  Eigen::VectorXd x(static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < count; ++r) {
    for (std::size_t c = 0; c < width; ++c) x[static_cast<Eigen::Index>(c)] = rows[r * width + c];
    Eigen::VectorXd h = x;
    for (const Linear& layer : enc.vector_mlp) h = relu(layer(h));
    pooled += h;
  }
  for (const Linear& layer : enc.post_mlp) pooled = relu(layer(pooled));
  return pooled;
}

Eigen::VectorXd attend(const Network& net, int heads, const std::vector<Eigen::VectorXd>& features,
                       std::size_t query) {
  const Eigen::Index d = net.q.b.size();
  const Eigen::Index dk = d / heads;
  const Eigen::VectorXd q = net.q(features[query]);
  Eigen::MatrixXd keys(d, static_cast<Eigen::Index>(features.size()));
  Eigen::MatrixXd values(d, static_cast<Eigen::Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j) {
    keys.col(static_cast<Eigen::Index>(j)) = net.k(features[j]);
    values.col(static_cast<Eigen::Index>(j)) = net.v(features[j]);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  Eigen::VectorXd concat(d);
  for (int h = 0; h < heads; ++h) {
    const Eigen::Index off = h * dk;
    Eigen::VectorXd scores = keys.middleRows(off, dk).transpose() * q.segment(off, dk) * scale;
    scores = (scores.array() - scores.maxCoeff()).exp();
    scores /= scores.sum();
    concat.segment(off, dk) = values.middleRows(off, dk) * scores;
  }
  return net.o(concat);
}

std::vector<Eigen::VectorXd> polyline_features(const SerializedObservation& obs, const Network& net) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(obs.dynamic_rows.size() + obs.static_rows.size());
  std::size_t at = 0;
  for (std::uint32_t rows : obs.dynamic_rows) {
    out.push_back(encode_polyline(net.dynamic, obs.dynamic.data() + at, rows, obs.dynamic_width));
    at += std::size_t{rows} * obs.dynamic_width;
  }
  at = 0;
  for (std::uint32_t rows : obs.static_rows) {
    out.push_back(encode_polyline(net.statics, obs.statics.data() + at, rows, 5));
    at += std::size_t{rows} * 5;
  }
  return out;
}

Eigen::VectorXd encode(const SerializedObservation& obs, const WeightBundle& w) {
  const NetworkShape& s = w.shape();
  if (static_cast<int>(obs.dynamic_width) != s.input_width) {
    throw ShapeMismatch("observation dynamic width " + std::to_string(obs.dynamic_width) +
                        " but network expects " + std::to_string(s.input_width));
  }
  if (obs.query_index >= obs.dynamic_rows.size()) throw ShapeMismatch("query index outside the agent polylines");
  std::size_t dyn_total = 0, static_total = 0;
  for (auto r : obs.dynamic_rows) dyn_total += std::size_t{r} * obs.dynamic_width;
  for (auto r : obs.static_rows) static_total += std::size_t{r} * 5;
  if (dyn_total != obs.dynamic.size() || static_total != obs.statics.size()) {
    throw ShapeMismatch("observation row counts disagree with payload");
  }
  return attend(w.network(), s.heads, polyline_features(obs, w.network()), obs.query_index);
}

Eigen::VectorXd decode(const SerializedObservation& obs, const WeightBundle& w) {
  Eigen::VectorXd h = encode(obs, w);
  const auto& dec = w.network().decoder;
  for (std::size_t i = 0; i < dec.size(); ++i) {
    h = dec[i](h);
    if (i + 1 < dec.size()) h = relu(h);
  }
  return h;
}

// ----------------------------------------------------------- bundle validation

class Manifest {
 public:
  explicit Manifest(const std::vector<NamedTensor>& tensors) {
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      if (!index_.emplace(tensors[i].name, i).second) {
        throw ShapeInconsistency(tensors[i].name, "duplicate tensor");
      }
      const Tensor& t = tensors[i].tensor;
      if (t.numel() != t.data.size()) throw ShapeInconsistency(tensors[i].name, "payload size disagrees with shape");
    }
    tensors_ = &tensors;
  }

  const Tensor* find(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) return nullptr;
    used_.insert(name);
    return &(*tensors_)[it->second].tensor;
  }

  const Tensor& need(const std::string& name, const std::string& owner) {
    const Tensor* t = find(name);
    if (!t) throw ShapeInconsistency(owner, "missing tensor " + name);
    return *t;
  }

  void reject_unused() const {
    for (const NamedTensor& t : *tensors_) {
      if (!used_.count(t.name)) throw ShapeInconsistency(t.name, "unexpected tensor");
    }
  }

 private:
  const std::vector<NamedTensor>* tensors_ = nullptr;
  std::map<std::string, std::size_t> index_;
  std::set<std::string> used_;
};

Linear to_linear(const Tensor& w, const Tensor& b, const std::string& owner) {
  if (w.shape.size() != 2) throw ShapeInconsistency(owner, "weight must be 2-D");
  if (b.shape.size() != 1 || b.shape[0] != w.shape[0]) throw ShapeInconsistency(owner, "bias length must match rows");
  Linear l;
  const auto rows = static_cast<Eigen::Index>(w.shape[0]);
  const auto cols = static_cast<Eigen::Index>(w.shape[1]);
  l.w.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) l.w(r, c) = w.data[static_cast<std::size_t>(r * cols + c)];
  }
  l.b.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) l.b[r] = b.data[static_cast<std::size_t>(r)];
  return l;
}

// Reads `prefix.0`, `prefix.1`, ... and checks that widths chain from `in`.
std::vector<Linear> read_stack(Manifest& m, const std::string& prefix, Eigen::Index in) {
  std::vector<Linear> layers;
  for (int i = 0;; ++i) {
    const std::string owner = prefix + "." + std::to_string(i);
    const Tensor* w = m.find(owner + ".weight");
    if (!w) break;
    Linear l = to_linear(*w, m.need(owner + ".bias", owner), owner);
    if (l.w.cols() != in) {
      throw ShapeInconsistency(owner, "expects input " + std::to_string(l.w.cols()) + " but receives " +
                                          std::to_string(in));
    }
    in = l.w.rows();
    layers.push_back(std::move(l));
  }
  if (layers.empty()) throw ShapeInconsistency(prefix + ".0", "missing layer");
  return layers;
}

Encoder read_encoder(Manifest& m, const std::string& prefix, Eigen::Index in) {
  Encoder e;
  e.vector_mlp = read_stack(m, prefix + ".vector_mlp", in);
  e.post_mlp = read_stack(m, prefix + ".post_mlp", e.vector_mlp.back().w.rows());
  return e;
}

Linear read_square(Manifest& m, const char* w_name, const char* b_name, Eigen::Index d) {
  const std::string owner = std::string("mha.") + w_name;
  Linear l = to_linear(m.need(owner, owner), m.need(std::string("mha.") + b_name, owner), owner);
  if (l.w.rows() != d || l.w.cols() != d) {
    throw ShapeInconsistency(owner, "must be " + std::to_string(d) + "x" + std::to_string(d));
  }
  return l;
}

std::vector<int> widths(const std::vector<Linear>& layers, bool drop_last) {
  std::vector<int> out;
  for (std::size_t i = 0; i + (drop_last ? 1 : 0) < layers.size(); ++i) {
    out.push_back(static_cast<int>(layers[i].w.rows()));
  }
  return out;
}

template <typename T>
void put(std::vector<std::uint8_t>& out, const T& v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T take(std::span<const std::uint8_t> bytes, std::size_t& at) {
  if (at > bytes.size() || bytes.size() - at < sizeof(T)) throw WeightFormatError("weight file truncated");
  T v;
  std::memcpy(&v, bytes.data() + at, sizeof(T));
  at += sizeof(T);
  return v;
}

}  // namespace

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (std::uint32_t d : shape) n *= d;
  return n;
}

ChecksumMismatch::ChecksumMismatch(std::uint32_t stored, std::uint32_t computed)
    : WeightFormatError("weight checksum mismatch: stored " + std::to_string(stored) + ", computed " +
                        std::to_string(computed)) {}

ShapeInconsistency::ShapeInconsistency(std::string tensor, const std::string& detail)
    : WeightFormatError("shape inconsistency at " + tensor + ": " + detail), tensor_(std::move(tensor)) {}

std::shared_ptr<const WeightBundle> WeightBundle::from_tensors(std::vector<NamedTensor> tensors) {
  auto bundle = std::make_shared<WeightBundle>();
  bundle->tensors_ = std::move(tensors);
  Manifest m(bundle->tensors_);

  const Tensor& meta = m.need("meta", "meta");
  if (meta.shape != std::vector<std::uint32_t>{kMetaLength}) throw ShapeInconsistency("meta", "must hold 8 values");
  NetworkShape s;
  s.input_width = static_cast<int>(meta.data[0]);
  s.heads = static_cast<int>(meta.data[1]);
  const auto kind = static_cast<int>(meta.data[2]);
  s.v_max = meta.data[3];
  s.sigma_max = meta.data[4];
  if (s.input_width != 5 && s.input_width != 6) throw ShapeInconsistency("meta", "input width must be 5 or 6");
  if (s.heads < 1) throw ShapeInconsistency("meta", "head count must be positive");
  if (kind != 0 && kind != 1) throw ShapeInconsistency("meta", "unknown output kind");
  if (meta.data[5] != kActivationRelu) throw ShapeInconsistency("meta", "unsupported activation");
  if (!(s.v_max > 0.0) || !(s.sigma_max > 0.0)) throw ShapeInconsistency("meta", "action bounds must be positive");
  s.output = static_cast<OutputKind>(kind);

  auto net = std::make_shared<Network>();
  net->dynamic = read_encoder(m, "dyn", s.input_width);
  const Eigen::Index d = net->dynamic.post_mlp.back().w.rows();
  net->statics = read_encoder(m, "static", 5);
  if (net->statics.post_mlp.back().w.rows() != d) {
    throw ShapeInconsistency("static.post_mlp." + std::to_string(net->statics.post_mlp.size() - 1),
                             "output width differs from the dynamic encoder");
  }
  if (d % s.heads != 0) throw ShapeInconsistency("mha.w_q", "feature width not divisible by head count");
  net->q = read_square(m, "w_q", "b_q", d);
  net->k = read_square(m, "w_k", "b_k", d);
  net->v = read_square(m, "w_v", "b_v", d);
  net->o = read_square(m, "w_o", "b_o", d);
  net->decoder = read_stack(m, "decoder_mlp", d);
  if (net->decoder.size() != 3) throw ShapeInconsistency("decoder_mlp", "must have exactly 3 layers");
  const Eigen::Index out = s.output == OutputKind::action ? 2 : 1;
  if (net->decoder.back().w.rows() != out) {
    throw ShapeInconsistency("decoder_mlp.2", "output width must be " + std::to_string(out));
  }
  m.reject_unused();

  s.feature_dim = static_cast<int>(d);
  s.vector_hidden = widths(net->dynamic.vector_mlp, false);
  s.post_hidden = widths(net->dynamic.post_mlp, true);
  s.decoder_hidden = widths(net->decoder, true);
  bundle->shape_ = s;
  bundle->network_ = std::move(net);
  return bundle;
}

const Tensor& WeightBundle::tensor(std::string_view name) const {
  for (const NamedTensor& t : tensors_) {
    if (t.name == name) return t.tensor;
  }
  throw std::out_of_range("no tensor named " + std::string(name));
}

std::shared_ptr<const WeightBundle> init_weights(const NetworkShape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<NamedTensor> tensors;
  auto linear = [&](const std::string& name, int in, int out) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Tensor w{{static_cast<std::uint32_t>(out), static_cast<std::uint32_t>(in)}, {}};
    Tensor b{{static_cast<std::uint32_t>(out)}, {}};
    for (std::size_t i = 0; i < w.numel(); ++i) w.data.push_back(static_cast<float>(uniform(rng, -bound, bound)));
    for (std::size_t i = 0; i < b.numel(); ++i) b.data.push_back(static_cast<float>(uniform(rng, -bound, bound)));
    tensors.push_back({name + ".weight", std::move(w)});
    tensors.push_back({name + ".bias", std::move(b)});
  };
  auto stack = [&](const std::string& prefix, int in, const std::vector<int>& hidden, int out) {
    std::vector<int> dims = hidden;
    if (out > 0) dims.push_back(out);
    for (std::size_t i = 0; i < dims.size(); ++i) {
      linear(prefix + "." + std::to_string(i), in, dims[i]);
      in = dims[i];
    }
    return in;
  };

  const int d = shape.feature_dim;
  tensors.push_back({"meta",
                     {{static_cast<std::uint32_t>(kMetaLength)},
                      {static_cast<float>(shape.input_width), static_cast<float>(shape.heads),
                       static_cast<float>(shape.output), static_cast<float>(shape.v_max),
                       static_cast<float>(shape.sigma_max), static_cast<float>(kActivationRelu), 0.0f, 0.0f}}});
  for (const auto& [prefix, in] : {std::pair<std::string, int>{"dyn", shape.input_width}, {"static", 5}}) {
    const int width = stack(prefix + ".vector_mlp", in, shape.vector_hidden, 0);
    stack(prefix + ".post_mlp", width, shape.post_hidden, d);
  }
  for (const char* n : {"q", "k", "v", "o"}) {
    linear(std::string("mha.") + n, d, d);
    auto& b = tensors.back();
    auto& w = tensors[tensors.size() - 2];
    w.name = std::string("mha.w_") + n;
    b.name = std::string("mha.b_") + n;
  }
  if (shape.decoder_hidden.size() != 2) throw std::invalid_argument("decoder needs two hidden widths");
  stack("decoder_mlp", d, shape.decoder_hidden, shape.output == OutputKind::action ? 2 : 1);
  return WeightBundle::from_tensors(std::move(tensors));
}

std::uint32_t crc32c(std::span<const std::uint8_t> bytes) {
  boost::crc_optimal<32, 0x1EDC6F41, 0xFFFFFFFF, 0xFFFFFFFF, true, true> crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::vector<std::uint8_t> weights_to_bytes(const WeightBundle& bundle) {
  static_assert(std::endian::native == std::endian::little);
  std::vector<std::uint8_t> out(kWeightMagic, kWeightMagic + 4);
  put(out, WeightBundle::kFormatVersion);
  put(out, static_cast<std::uint32_t>(bundle.tensors().size()));
  for (const NamedTensor& t : bundle.tensors()) {
    put(out, static_cast<std::uint32_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put(out, kDtypeF32);
    put(out, static_cast<std::uint32_t>(t.tensor.shape.size()));
    for (std::uint32_t d : t.tensor.shape) put(out, d);
  }
  for (const NamedTensor& t : bundle.tensors()) {
    for (float f : t.tensor.data) put(out, f);
  }
  put(out, crc32c(out));
  return out;
}

std::shared_ptr<const WeightBundle> weights_from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kWeightMagic, 4) != 0) throw BadMagic();
  if (bytes.size() < 16) throw WeightFormatError("weight file truncated");
  const auto body = bytes.first(bytes.size() - 4);
  std::size_t tail = bytes.size() - 4;
  const auto stored = take<std::uint32_t>(bytes, tail);
  const std::uint32_t computed = crc32c(body);
  if (stored != computed) throw ChecksumMismatch(stored, computed);

  std::size_t at = 4;
  const auto version = take<std::uint32_t>(body, at);
  if (version != WeightBundle::kFormatVersion) {
    throw WeightFormatError("unsupported weight format version " + std::to_string(version));
  }
  const auto count = take<std::uint32_t>(body, at);
  if (count > body.size()) throw WeightFormatError("tensor count exceeds file size");
  std::vector<NamedTensor> tensors(count);
  for (NamedTensor& t : tensors) {
    const auto len = take<std::uint32_t>(body, at);
    if (len > body.size() - at) throw WeightFormatError("tensor name runs past the end of the file");
    t.name.assign(reinterpret_cast<const char*>(body.data() + at), len);
    at += len;
    if (take<std::uint32_t>(body, at) != kDtypeF32) throw WeightFormatError("tensor " + t.name + " is not float32");
    const auto ndim = take<std::uint32_t>(body, at);
    if (ndim > 8) throw WeightFormatError("tensor " + t.name + " has too many dimensions");
    std::size_t numel = 1;
    for (std::uint32_t i = 0; i < ndim; ++i) {
      t.tensor.shape.push_back(take<std::uint32_t>(body, at));
      numel *= t.tensor.shape.back();
      if (numel > body.size()) throw WeightFormatError("tensor " + t.name + " larger than the file");
    }
  }
  for (NamedTensor& t : tensors) {
    const std::size_t n = t.tensor.numel();
    if (n * sizeof(float) > body.size() - at) throw WeightFormatError("payload of " + t.name + " truncated");
    t.tensor.data.resize(n);
    std::memcpy(t.tensor.data.data(), body.data() + at, n * sizeof(float));
    at += n * sizeof(float);
  }
  if (at != body.size()) throw WeightFormatError("trailing bytes after tensor payloads");
  return WeightBundle::from_tensors(std::move(tensors));
}

void save_weights(const WeightBundle& bundle, const std::filesystem::path& path) {
  const auto bytes = weights_to_bytes(bundle);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::shared_ptr<const WeightBundle> load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return weights_from_bytes(bytes);
}

std::vector<double> encode_observation(const SerializedObservation& obs, const WeightBundle& w) {
  const Eigen::VectorXd f = encode(obs, w);
  return {f.data(), f.data() + f.size()};
}

std::vector<double> encode_observation(const ObservationFrame& obs, const WeightBundle& w) {
  return encode_observation(serialize_observation(obs), w);
}

std::vector<double> decode_raw(const SerializedObservation& obs, const WeightBundle& w) {
  const Eigen::VectorXd y = decode(obs, w);
  return {y.data(), y.data() + y.size()};
}

// -------------------------------------------------------------------- policies

std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::idm_scripted: return "idm_scripted";
    case PolicyKind::neural_lower: return "neural_lower";
    case PolicyKind::neural_adversary: return "neural_adversary";
    case PolicyKind::constant_action: return "constant_action";
  }
  return "unknown";
}

PolicyHandle PolicyHandle::idm() { return {}; }

PolicyHandle PolicyHandle::constant_action(Action a) {
  PolicyHandle p;
  p.kind = PolicyKind::constant_action;
  p.constant = a;
  return p;
}

PolicyHandle PolicyHandle::neural_lower(std::shared_ptr<const WeightBundle> w) {
  if (!w) throw std::invalid_argument("neural policy needs weights");
  if (w->shape().input_width != 6 || w->shape().output != OutputKind::action) {
    throw RoleMismatch("lower-level policy needs V = 6 inputs and an action output");
  }
  PolicyHandle p;
  p.kind = PolicyKind::neural_lower;
  p.weights = std::move(w);
  return p;
}

PolicyHandle PolicyHandle::neural_adversary(std::shared_ptr<const WeightBundle> w) {
  if (!w) throw std::invalid_argument("neural policy needs weights");
  if (w->shape().input_width != 5 || w->shape().output != OutputKind::svo) {
    throw RoleMismatch("adversary policy needs V = 5 inputs and an SVO output");
  }
  PolicyHandle p;
  p.kind = PolicyKind::neural_adversary;
  p.weights = std::move(w);
  return p;
}

Action idm_action(int agent, const WorldState& world, const LeaderSearch& search, double lookahead) {
  const AgentRecord& a = world.agent(agent);
  const VehicleParams& vp = world.params(a);
  const IdmParams& idm = world.scenario->idm;
  const double v = a.state.speed;
  double accel;
  if (auto leader = find_leader(agent, world, search)) {
    accel = idm_acceleration(v, world.agent(leader->id).state.speed, leader->gap, idm);
  } else {
    accel = idm_free_road_acceleration(v, idm);
  }
  const Path& path = world.path(a).geometry;
  const double sigma = pure_pursuit_steer(a.state.pose, a.progress, path, lookahead, vp.wheelbase);
  return {std::clamp(v + accel * world.config.dt, 0.0, vp.v_max), std::clamp(sigma, -vp.sigma_max, vp.sigma_max)};
}

Action act(const PolicyHandle& policy, int agent, const WorldState& world, const ObservationFrame* obs) {
  switch (policy.kind) {
    case PolicyKind::constant_action:
      return policy.constant;
    case PolicyKind::idm_scripted:
      return idm_action(agent, world, policy.leader, policy.lookahead);
    case PolicyKind::neural_adversary:
      throw RoleMismatch("adversary policy cannot drive an agent");
    case PolicyKind::neural_lower:
      break;
  }
  if (obs == nullptr) throw std::invalid_argument("neural policy needs an observation");
  const SerializedObservation s = serialize_observation(*obs);
  if (static_cast<int>(s.dynamic_width) != policy.weights->shape().input_width) {
    throw RoleMismatch("lower-level policy received dynamic vectors of length " + std::to_string(s.dynamic_width));
  }
  const Eigen::VectorXd y = decode(s, *policy.weights);
  const NetworkShape& shape = policy.weights->shape();
  return {0.5 * shape.v_max * (1.0 + std::tanh(y[0])), shape.sigma_max * std::tanh(y[1])};
}

double act_adversary(const PolicyHandle& policy, const ObservationFrame& obs) {
  if (policy.kind != PolicyKind::neural_adversary) throw RoleMismatch("policy is not an adversary");
  const SerializedObservation s = serialize_observation(obs);
  if (static_cast<int>(s.dynamic_width) != policy.weights->shape().input_width) {
    throw RoleMismatch("adversary received dynamic vectors of length " + std::to_string(s.dynamic_width));
  }
  const Eigen::VectorXd y = decode(s, *policy.weights);
  return 45.0 + 45.0 * std::tanh(y[0]);
}

}  // namespace sflow
