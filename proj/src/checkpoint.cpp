#include "drld/checkpoint.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>

#include <zlib.h>

#include "drld/error.h"

namespace drld {

namespace {

static_assert(sizeof(double) == 8);

template <typename T>
void put(std::string& out, T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    out.append(bytes.data(), bytes.size());
  } else {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.append(bytes, sizeof(T));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::array<char, sizeof(T)> raw;
    std::memcpy(raw.data(), bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    return std::bit_cast<T>(raw);
  }

  std::string str(std::size_t n) {
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("checkpoint truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

NamedTensor from_ref(const TensorRef& ref) {
  NamedTensor t;
  t.name = ref.name;
  t.shape = {static_cast<std::uint64_t>(ref.rows), static_cast<std::uint64_t>(ref.cols)};
  t.values.reserve(static_cast<std::size_t>(ref.size()));
  const Eigen::Map<const Eigen::MatrixXd> m(ref.data, ref.rows, ref.cols);
  for (Eigen::Index r = 0; r < ref.rows; ++r) {
    for (Eigen::Index c = 0; c < ref.cols; ++c) t.values.push_back(m(r, c));
  }
  return t;
}

NamedTensor vec(std::string name, std::vector<double> values) {
  NamedTensor t;
  t.name = std::move(name);
  t.shape = {static_cast<std::uint64_t>(values.size())};
  t.values = std::move(values);
  return t;
}

NamedTensor matrix(std::string name, const Eigen::MatrixXd& m) {
  NamedTensor t;
  t.name = std::move(name);
  t.shape = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.values.push_back(m(r, c));
  }
  return t;
}

Eigen::MatrixXd to_matrix(const NamedTensor& t) {
  if (t.shape.size() != 2) throw DataError("tensor " + t.name + " is not a matrix");
  const auto rows = static_cast<Eigen::Index>(t.shape[0]);
  const auto cols = static_cast<Eigen::Index>(t.shape[1]);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = t.values[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

void append_state(std::vector<NamedTensor>& out, const std::string& prefix, const RawState& s) {
  out.push_back(vec(prefix + ".global", std::vector<double>(s.global.begin(), s.global.end())));
  out.push_back(matrix(prefix + ".locals", s.locals));
  out.push_back(vec(prefix + ".scales", {s.minpts_scale, s.size_scale}));
}

RawState read_state(const std::map<std::string, const NamedTensor*>& index, const std::string& prefix) {
  auto find = [&](const std::string& name) -> const NamedTensor& {
    const auto it = index.find(name);
    if (it == index.end()) throw DataError("checkpoint is missing tensor " + name);
    return *it->second;
  };
  RawState s;
  const auto& g = find(prefix + ".global");
  if (g.values.size() != s.global.size()) throw DataError("bad state tensor " + g.name);
  std::copy(g.values.begin(), g.values.end(), s.global.begin());
  s.locals = to_matrix(find(prefix + ".locals"));
  const auto& scales = find(prefix + ".scales");
  s.minpts_scale = scales.values.at(0);
  s.size_scale = scales.values.at(1);
  return s;
}

std::vector<double> config_values(const AgentConfig& c) {
  return {static_cast<double>(c.local_width),
          static_cast<double>(c.hidden),
          c.learning_rate,
          c.momentum,
          c.gamma,
          c.tau,
          static_cast<double>(c.batch_size),
          static_cast<double>(c.actor_delay),
          static_cast<double>(c.buffer_capacity),
          c.explore_start,
          c.explore_end,
          static_cast<double>(c.explore_decay_steps),
          c.encoder_training == EncoderTraining::kJoint ? 0.0 : 1.0};
}

AgentConfig config_from(const std::vector<double>& v) {
  if (v.size() != 13) throw DataError("checkpoint config has wrong length");
  AgentConfig c;
  c.local_width = static_cast<int>(v[0]);
  c.hidden = static_cast<int>(v[1]);
  c.learning_rate = v[2];
  c.momentum = v[3];
  c.gamma = v[4];
  c.tau = v[5];
  c.batch_size = static_cast<int>(v[6]);
  c.actor_delay = static_cast<int>(v[7]);
  c.buffer_capacity = static_cast<std::size_t>(v[8]);
  c.explore_start = v[9];
  c.explore_end = v[10];
  c.explore_decay_steps = static_cast<int>(v[11]);
  c.encoder_training = v[12] == 0.0 ? EncoderTraining::kJoint : EncoderTraining::kActorOnly;
  return c;
}

void append_velocity(std::vector<NamedTensor>& out, const std::string& name, const SgdMomentum& opt) {
  for (std::size_t i = 0; i < opt.velocity().size(); ++i) {
    const auto& v = opt.velocity()[i];
    out.push_back(vec("opt." + name + "." + std::to_string(i), std::vector<double>(v.data(), v.data() + v.size())));
  }
}

void read_velocity(const std::map<std::string, const NamedTensor*>& index, const std::string& name,
                   SgdMomentum& opt) {
  opt.velocity().clear();
  for (std::size_t i = 0;; ++i) {
    const auto it = index.find("opt." + name + "." + std::to_string(i));
    if (it == index.end()) break;
    const auto& values = it->second->values;
    opt.velocity().push_back(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
}

}  // namespace

std::string encode_tensors(const std::vector<NamedTensor>& tensors) {
  std::string out = "DRLD";
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    std::uint64_t count = 1;
    for (const auto d : t.shape) count *= d;
    if (count != t.values.size()) throw Error("tensor " + t.name + ": shape does not match value count");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
    for (const auto d : t.shape) put<std::uint64_t>(out, d);
    for (const double v : t.values) put<double>(out, v);
  }
  put<std::uint32_t>(out, crc32_of(out));
  return out;
}

std::vector<NamedTensor> decode_tensors(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 4) != "DRLD") throw DataError("not a DRLD checkpoint");
  const auto body = bytes.substr(0, bytes.size() - 4);
  Reader tail(bytes.substr(bytes.size() - 4));
  if (tail.get<std::uint32_t>() != crc32_of(body)) throw ChecksumError("checkpoint checksum mismatch");

  Reader in(body);
  in.str(4);
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  const auto count = in.get<std::uint32_t>();
  std::vector<NamedTensor> tensors;
  tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = in.str(in.get<std::uint32_t>());
    const auto rank = in.get<std::uint32_t>();
    std::uint64_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      t.shape.push_back(in.get<std::uint64_t>());
      n *= t.shape.back();
    }
    if (n > in.remaining() / 8) throw DataError("checkpoint truncated");
    t.values.resize(static_cast<std::size_t>(n));
    for (auto& v : t.values) v = in.get<double>();
    tensors.push_back(std::move(t));
  }
  if (in.remaining() != 0) throw DataError("trailing bytes in checkpoint");
  return tensors;
}

void save_checkpoint(const AgentBundle& bundle, const std::string& path, bool include_buffer) {
  auto& b = const_cast<AgentBundle&>(bundle);  // tensors() hands out mutable views; nothing is written
  std::vector<NamedTensor> tensors;
  tensors.push_back(vec("meta.config", config_values(b.config)));
  tensors.push_back(vec("meta.counters", {static_cast<double>(b.env_steps), static_cast<double>(b.updates),
                                          static_cast<double>(b.buffer.total_pushed())}));
  for (const auto& ref : b.online.tensors("online.")) tensors.push_back(from_ref(ref));
  for (const auto& ref : b.target.tensors("target.")) tensors.push_back(from_ref(ref));
  append_velocity(tensors, "encoder", b.encoder_opt);
  append_velocity(tensors, "actor", b.actor_opt);
  append_velocity(tensors, "critic", b.critic_opt);
  if (include_buffer) {
    tensors.push_back(vec("buffer.size", {static_cast<double>(b.buffer.size())}));
    for (std::size_t i = 0; i < b.buffer.size(); ++i) {
      const auto& t = b.buffer.at(i);
      const std::string prefix = "buffer." + std::to_string(i);
      append_state(tensors, prefix + ".before", t.before);
      append_state(tensors, prefix + ".after", t.after);
      tensors.push_back(vec(prefix + ".step", {static_cast<double>(t.action), t.reward}));
    }
  }

  const std::string bytes = encode_tensors(tensors);
  const auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing " + path);
  }
  std::filesystem::rename(tmp, path);
}

AgentBundle load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto tensors = decode_tensors(bytes);

  std::map<std::string, const NamedTensor*> index;
  for (const auto& t : tensors) index[t.name] = &t;
  auto find = [&](const std::string& name) -> const NamedTensor& {
    const auto it = index.find(name);
    if (it == index.end()) throw DataError("checkpoint is missing tensor " + name);
    return *it->second;
  };

  AgentBundle bundle(config_from(find("meta.config").values), 0);
  const auto& counters = find("meta.counters").values;
  if (counters.size() < 2) throw DataError("checkpoint counters malformed");
  bundle.env_steps = static_cast<std::int64_t>(counters[0]);
  bundle.updates = static_cast<std::int64_t>(counters[1]);

  auto restore = [&](Networks& nets, const std::string& prefix) {
    for (const auto& ref : nets.tensors(prefix)) {
      const auto& t = find(ref.name);
      if (t.shape.size() != 2 || t.shape[0] != static_cast<std::uint64_t>(ref.rows) ||
          t.shape[1] != static_cast<std::uint64_t>(ref.cols)) {
        throw DataError("tensor " + ref.name + " has unexpected shape");
      }
      Eigen::Map<Eigen::MatrixXd>(ref.data, ref.rows, ref.cols) = to_matrix(t);
    }
  };
  restore(bundle.online, "online.");
  restore(bundle.target, "target.");
  read_velocity(index, "encoder", bundle.encoder_opt);
  read_velocity(index, "actor", bundle.actor_opt);
  read_velocity(index, "critic", bundle.critic_opt);

  if (const auto it = index.find("buffer.size"); it != index.end()) {
    const auto n = static_cast<std::size_t>(it->second->values.at(0));
    for (std::size_t i = 0; i < n; ++i) {
      const std::string prefix = "buffer." + std::to_string(i);
      Transition t;
      t.before = read_state(index, prefix + ".before");
      t.after = read_state(index, prefix + ".after");
      const auto& step = find(prefix + ".step").values;
      t.action = static_cast<Action>(static_cast<int>(step.at(0)));
      t.reward = step.at(1);
      bundle.buffer.push(std::move(t));
    }
  }
  return bundle;
}

void save_layer_checkpoints(const std::vector<AgentBundle>& bundles, const std::string& dir, bool include_buffer) {
  std::filesystem::create_directories(dir);
  for (std::size_t l = 0; l < bundles.size(); ++l) {
    save_checkpoint(bundles[l], (std::filesystem::path(dir) / ("layer_" + std::to_string(l + 1) + ".drld")).string(),
                    include_buffer);
  }
}

std::vector<AgentBundle> load_layer_checkpoints(const std::string& dir, int layers) {
  std::vector<AgentBundle> bundles;
  for (int l = 1; l <= layers; ++l) {
    bundles.push_back(load_checkpoint((std::filesystem::path(dir) / ("layer_" + std::to_string(l) + ".drld")).string()));
  }
  return bundles;
}

}  // namespace drld
