#include "wescatter/serialize.hpp"

#include <bit>
#include <fstream>

namespace wsn {

namespace {

constexpr std::uint8_t kMagic[4] = {'W', 'S', 'N', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kKindLearner = 0;
constexpr std::uint8_t kKindEnsemble = 1;

// Anything claiming more elements than this is a corrupt or hostile file,
// not a model we ever wrote.
constexpr std::uint64_t kSaneCount = 1ull << 32;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void u64(std::uint64_t v) {
    for (int s = 0; s < 64; s += 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(const std::vector<double>& vs) {
    u64(vs.size());
    for (double v : vs) f64(v);
  }
  void matrix(const Matrix& m) {
    u64(m.rows());
    u64(m.cols());
    for (double v : m.raw()) f64(v);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int s = 0; s < 32; s += 8) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << s;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int s = 0; s < 64; s += 8) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << s;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::uint64_t count() {
    const std::uint64_t n = u64();
    if (n > kSaneCount) throw DecodeError("element count out of range");
    return n;
  }
  // Structural dimension (features, classes): implies at least n doubles
  // somewhere in the payload, so anything past size/8 is provably corrupt and
  // must not reach an allocator.
  std::uint64_t dim() {
    const std::uint64_t n = count();
    if (n > bytes_.size() / 8) throw DecodeError("dimension larger than the payload");
    return n;
  }
  std::vector<double> f64s() {
    const std::uint64_t n = count();
    need(n * 8);
    std::vector<double> vs(n);
    for (auto& v : vs) v = f64();
    return vs;
  }
  Matrix matrix() {
    const std::uint64_t rows = count();
    const std::uint64_t cols = count();
    if (rows != 0 && cols > kSaneCount / rows) throw DecodeError("matrix size out of range");
    need(rows * cols * 8);
    Matrix m(rows, cols);
    for (double& v : m.raw()) v = f64();
    return m;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::uint64_t n) {
    if (bytes_.size() - pos_ < n) throw DecodeError("truncated model file");
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

void put_learner(Writer& w, const BaseLearner& l) {
  w.u64(l.n_features());
  w.u64(l.n_classes());
  const LearnerConfig& cfg = l.config();
  w.f64(cfg.gamma);
  w.f64(cfg.k3);
  w.f64(cfg.omega_init);
  w.f64(cfg.alpha);
  w.u64(cfg.min_rules);
  w.u64(l.steps());

  const NsState& ns = l.ns();
  w.f64(ns.mean_bias);
  w.f64(ns.std_bias);
  w.f64(ns.mean_var);
  w.f64(ns.std_var);
  w.f64(ns.min_mean_bias);
  w.f64(ns.min_std_bias);
  w.f64(ns.min_mean_var);
  w.f64(ns.min_std_var);
  w.f64(ns.m2_bias);
  w.f64(ns.m2_var);
  w.u64(ns.sample_count);

  const ForgettingState& fs = l.forgetting();
  w.f64s(fs.mu);
  w.f64(fs.F);
  w.f64(fs.f);
  w.f64(fs.rate);

  w.u64(l.rules().size());
  for (const Rule& r : l.rules()) {
    w.matrix(r.w);
    w.f64(r.support);
    w.matrix(r.omega);
    w.matrix(r.anchor_w);
    w.u64(r.birth_index);
    w.f64(r.firing_sum);
  }
}

BaseLearner get_learner(Reader& rd) {
  const std::uint64_t n_features = rd.dim();
  const std::uint64_t n_classes = rd.dim();
  LearnerConfig cfg;
  cfg.gamma = rd.f64();
  cfg.k3 = rd.f64();
  cfg.omega_init = rd.f64();
  cfg.alpha = rd.f64();
  cfg.min_rules = rd.count();
  BaseLearner l(n_features, n_classes, cfg);
  l.set_steps(rd.u64());

  NsState& ns = l.ns();
  ns.mean_bias = rd.f64();
  ns.std_bias = rd.f64();
  ns.mean_var = rd.f64();
  ns.std_var = rd.f64();
  ns.min_mean_bias = rd.f64();
  ns.min_std_bias = rd.f64();
  ns.min_mean_var = rd.f64();
  ns.min_std_var = rd.f64();
  ns.m2_bias = rd.f64();
  ns.m2_var = rd.f64();
  ns.sample_count = rd.u64();

  ForgettingState& fs = l.forgetting();
  fs.mu = rd.f64s();
  if (fs.mu.size() != n_features + 1) throw DecodeError("forgetting mean dimension mismatch");
  fs.F = rd.f64();
  fs.f = rd.f64();
  fs.rate = rd.f64();

  // No reserve on decoded counts: a corrupt count must hit the truncation
  // check on its first element, not pre-allocate by the claimed size.
  const std::uint64_t n_rules = rd.count();
  for (std::uint64_t i = 0; i < n_rules; ++i) {
    Rule r;
    r.w = rd.matrix();
    r.support = rd.f64();
    r.omega = rd.matrix();
    r.anchor_w = rd.matrix();
    r.birth_index = rd.u64();
    r.firing_sum = rd.f64();
    if (r.w.rows() != n_features + 1 || r.w.cols() != n_classes)
      throw DecodeError("rule consequent dimension mismatch");
    if (r.omega.rows() != n_features + 1 || r.omega.cols() != n_features + 1)
      throw DecodeError("rule correction dimension mismatch");
    if (!r.anchor_w.same_shape(r.w)) throw DecodeError("rule anchor dimension mismatch");
    l.rules().push_back(std::move(r));
  }
  return l;
}

void put_header(Writer& w, std::uint8_t kind) {
  for (std::uint8_t b : kMagic) w.u8(b);
  w.u32(kVersion);
  w.u8(kind);
}

void check_header(Reader& rd, std::uint8_t kind) {
  for (std::uint8_t b : kMagic)
    if (rd.u8() != b) throw DecodeError("bad magic, not a model file");
  const std::uint32_t version = rd.u32();
  if (version != kVersion) throw DecodeError("unsupported format version " + std::to_string(version));
  const std::uint8_t k = rd.u8();
  if (k != kind) throw DecodeError("wrong payload kind");
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const BaseLearner& learner) {
  Writer w;
  put_header(w, kKindLearner);
  put_learner(w, learner);
  return w.take();
}

BaseLearner deserialize_model(const std::vector<std::uint8_t>& bytes) {
  Reader rd(bytes);
  check_header(rd, kKindLearner);
  BaseLearner l = get_learner(rd);
  if (!rd.done()) throw DecodeError("trailing bytes after model payload");
  return l;
}

std::vector<std::uint8_t> serialize_ensemble(const Ensemble& ens) {
  Writer w;
  put_header(w, kKindEnsemble);
  w.u64(ens.n_features);
  w.u64(ens.n_classes);
  w.f64(ens.learner_cfg.gamma);
  w.f64(ens.learner_cfg.k3);
  w.f64(ens.learner_cfg.omega_init);
  w.f64(ens.learner_cfg.alpha);
  w.u64(ens.learner_cfg.min_rules);
  w.f64(ens.fac);
  w.f64(ens.delta);
  w.u64(ens.learners.size());
  for (const BaseLearner& l : ens.learners) put_learner(w, l);
  w.f64s(ens.betas);
  w.f64s(ens.input_min);
  w.f64s(ens.input_max);
  return w.take();
}

Ensemble deserialize_ensemble(const std::vector<std::uint8_t>& bytes) {
  Reader rd(bytes);
  check_header(rd, kKindEnsemble);
  Ensemble ens;
  ens.n_features = rd.dim();
  ens.n_classes = rd.dim();
  ens.learner_cfg.gamma = rd.f64();
  ens.learner_cfg.k3 = rd.f64();
  ens.learner_cfg.omega_init = rd.f64();
  ens.learner_cfg.alpha = rd.f64();
  ens.learner_cfg.min_rules = rd.count();
  ens.fac = rd.f64();
  ens.delta = rd.f64();
  const std::uint64_t m = rd.count();
  for (std::uint64_t i = 0; i < m; ++i) ens.learners.push_back(get_learner(rd));
  ens.betas = rd.f64s();
  ens.input_min = rd.f64s();
  ens.input_max = rd.f64s();
  if (ens.betas.size() != ens.learners.size())
    throw DecodeError("vote weight count does not match learner count");
  if (!rd.done()) throw DecodeError("trailing bytes after ensemble payload");
  return ens;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot read " + path);
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw std::runtime_error("short read from " + path);
  return bytes;
}

}  // namespace wsn
