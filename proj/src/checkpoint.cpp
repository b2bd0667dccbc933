#include "bandit/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "bandit/errors.hpp"

namespace bandit {

namespace {

constexpr char kMagic[4] = {'B', 'N', 'S', 'Q'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::size_t v) {
    if (v > UINT32_MAX) throw FormatError("value does not fit the u32 field");
    le(static_cast<std::uint32_t>(v));
  }
  void u64(std::uint64_t v) { le(v); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(s.size());
    bytes(s.data(), s.size());
  }
  void tensors(const ParamSet& set) {
    u32(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
      str(set.name(i));
      const Tensor& t = set[i];
      u32(t.rank());
      for (std::size_t d : t.shape()) u64(d);
      for (double v : t.values()) f64(v);
    }
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("checkpoint offset " + std::to_string(pos_) + ": " + what);
  }
  void need(std::size_t n, const char* what) const {
    if (b_.size() - pos_ < n) fail(std::string("truncated while reading ") + what);
  }
  template <typename T>
  T le(const char* what) {
    need(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(b_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  std::uint8_t u8(const char* what) { return le<std::uint8_t>(what); }
  std::uint32_t u32(const char* what) { return le<std::uint32_t>(what); }
  std::uint64_t u64(const char* what) { return le<std::uint64_t>(what); }
  double f64(const char* what) { return std::bit_cast<double>(le<std::uint64_t>(what)); }
  std::string str(const char* what) {
    const std::uint32_t n = u32(what);
    need(n, what);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  ParamSet tensors(const char* what) {
    const std::uint32_t count = u32(what);
    ParamSet set;
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::size_t start = pos_;
      std::string name = str("tensor name");
      const std::uint32_t rank = u32("tensor rank");
      if (rank == 0 || rank > 8) fail("tensor '" + name + "' has unsupported rank " + std::to_string(rank));
      Shape shape;
      std::uint64_t count_values = 1;
      for (std::uint32_t r = 0; r < rank; ++r) {
        const std::uint64_t d = u64("tensor dimension");
        if (d == 0) fail("tensor '" + name + "' has a zero dimension");
        if (count_values > (b_.size() - pos_) / 8 / d) fail("tensor '" + name + "' exceeds the file size");
        count_values *= d;
        shape.push_back(static_cast<std::size_t>(d));
      }
      std::vector<double> values(static_cast<std::size_t>(count_values));
      for (double& v : values) v = f64("tensor values");
      if (set.contains(name)) {
        pos_ = start;
        fail("duplicate tensor '" + name + "'");
      }
      set.add(std::move(name), Tensor(std::move(shape), std::move(values)));
    }
    return set;
  }
  std::size_t pos() const noexcept { return pos_; }
  bool done() const noexcept { return pos_ == b_.size(); }
  void expect_magic() {
    need(4, "magic");
    if (std::memcmp(b_.data(), kMagic, 4) != 0) fail("bad magic, expected BNSQ");
    pos_ += 4;
  }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& c) {
  if (c.vocab.size() != c.params.dims().vocab)
    throw ShapeError("checkpoint vocabulary has " + std::to_string(c.vocab.size()) +
                     " tokens but the model expects " + std::to_string(c.params.dims().vocab));
  Writer w;
  w.bytes(kMagic, 4);
  w.le(kCheckpointVersion);
  w.u32(c.vocab.size());
  for (const auto& t : c.vocab.tokens()) w.str(t);
  w.tensors(c.params.tensors());
  w.u8(c.optimizer ? 1 : 0);
  if (c.optimizer) {
    const OptimizerState& o = *c.optimizer;
    o.first_moment.require_same_layout(c.params.tensors(), "optimizer first moment");
    o.second_moment.require_same_layout(c.params.tensors(), "optimizer second moment");
    w.u64(o.step);
    w.f64(o.config.alpha);
    w.f64(o.config.beta1);
    w.f64(o.config.beta2);
    w.f64(o.config.eps);
    w.tensors(o.first_moment);
    w.tensors(o.second_moment);
  }
  w.u64(c.metadata.iteration);
  w.u64(c.metadata.seed);
  w.u64(c.metadata.config_hash);
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.expect_magic();
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion)
    r.fail("unsupported version " + std::to_string(version));

  const std::size_t vocab_at = r.pos();
  const std::uint32_t n_tokens = r.u32("vocabulary count");
  std::vector<std::string> tokens;
  for (std::uint32_t i = 0; i < n_tokens; ++i) tokens.push_back(r.str("token"));
  Checkpoint c;
  try {
    c.vocab = Vocabulary::from_tokens(std::move(tokens));
  } catch (const FormatError& e) {
    throw FormatError("checkpoint offset " + std::to_string(vocab_at) + ": " + e.what());
  }

  const std::size_t tensors_at = r.pos();
  ParamSet tensors = r.tensors("tensor count");
  try {
    c.params = ModelParams::from_tensors(std::move(tensors));
  } catch (const ShapeError& e) {
    throw FormatError("checkpoint offset " + std::to_string(tensors_at) + ": " + e.what());
  }
  if (c.params.dims().vocab != c.vocab.size())
    throw FormatError("checkpoint offset " + std::to_string(tensors_at) + ": tensors expect " +
                      std::to_string(c.params.dims().vocab) + " tokens, vocabulary has " +
                      std::to_string(c.vocab.size()));

  const std::uint8_t flag = r.u8("optimizer flag");
  if (flag > 1) r.fail("optimizer flag must be 0 or 1");
  if (flag == 1) {
    OptimizerState o;
    o.step = r.u64("optimizer step");
    o.config.alpha = r.f64("adam alpha");
    o.config.beta1 = r.f64("adam beta1");
    o.config.beta2 = r.f64("adam beta2");
    o.config.eps = r.f64("adam eps");
    const std::size_t moments_at = r.pos();
    o.first_moment = r.tensors("first moment");
    o.second_moment = r.tensors("second moment");
    if (!o.first_moment.same_layout(c.params.tensors()) ||
        !o.second_moment.same_layout(c.params.tensors()))
      throw FormatError("checkpoint offset " + std::to_string(moments_at) +
                        ": optimizer moments do not match the parameter layout");
    c.optimizer = std::move(o);
  }
  c.metadata.iteration = r.u64("iteration");
  c.metadata.seed = r.u64("seed");
  c.metadata.config_hash = r.u64("config hash");
  if (!r.done()) r.fail("trailing bytes after the metadata block");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const auto bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace bandit
