#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "drld/checkpoint.h"
#include "drld/error.h"

using namespace drld;
namespace fs = std::filesystem;

namespace {

RawState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RawState s;
  s.global = {u(rng), 3, u(rng), u(rng), -1, u(rng), 0.1};
  s.locals = Eigen::MatrixXd::NullaryExpr(3, 4, [&] { return u(rng); });
  s.minpts_scale = 7;
  s.size_scale = 30;
  return s;
}

AgentBundle trained_bundle() {
  std::mt19937_64 rng(1);
  AgentConfig c;
  c.hidden = 24;
  c.buffer_capacity = 50;
  AgentBundle b(c, 9);
  for (int i = 0; i < 30; ++i) store(b, {random_state(rng), static_cast<Action>(i % 5), random_state(rng), 0.1 * (i % 10)});
  for (int i = 0; i < 6; ++i) update(b, 8, 0.1, 0.005);
  b.env_steps = 123;
  return b;
}

std::string temp(const std::string& name) { return (fs::temp_directory_path() / name).string(); }

}  // namespace

TEST_CASE("container round trip") {
  std::vector<NamedTensor> t = {{"a", {2, 3}, {1, 2, 3, 4, 5, 6}}, {"b", {1}, {-0.5}}, {"empty", {0}, {}}};
  const auto decoded = decode_tensors(encode_tensors(t));
  REQUIRE(decoded.size() == 3);
  CHECK(decoded[0].name == "a");
  CHECK(decoded[0].shape == std::vector<std::uint64_t>{2, 3});
  CHECK(decoded[0].values == t[0].values);
  CHECK(decoded[1].values == t[1].values);
  const auto bytes = encode_tensors(t);
  CHECK(bytes.substr(0, 4) == "DRLD");
  CHECK(bytes[4] == 1);  // version, little-endian
}

TEST_CASE("parameters survive save and load bit for bit") {
  auto b = trained_bundle();
  const auto path = temp("drld_ckpt_test.drld");
  save_checkpoint(b, path);
  auto loaded = load_checkpoint(path);
  const auto x = b.online.tensors(), y = loaded.online.tensors();
  REQUIRE(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].flat() == y[i].flat());
  const auto tx = b.target.tensors(), ty = loaded.target.tensors();
  for (std::size_t i = 0; i < tx.size(); ++i) CHECK(tx[i].flat() == ty[i].flat());
  CHECK(loaded.env_steps == 123);
  CHECK(loaded.updates == b.updates);
  CHECK(loaded.config.hidden == 24);
  CHECK(loaded.buffer.size() == 0);

  std::mt19937_64 rng(5), r1(0), r2(0);
  for (int i = 0; i < 10; ++i) {
    const auto s = random_state(rng);
    CHECK(act(s, b, false, r1) == act(s, loaded, false, r2));
  }
}

TEST_CASE("buffer contents are saved on request") {
  auto b = trained_bundle();
  const auto path = temp("drld_ckpt_buffer.drld");
  save_checkpoint(b, path, true);
  const auto loaded = load_checkpoint(path);
  REQUIRE(loaded.buffer.size() == b.buffer.size());
  for (std::size_t i = 0; i < b.buffer.size(); ++i) {
    CHECK(loaded.buffer.at(i).reward == b.buffer.at(i).reward);
    CHECK(loaded.buffer.at(i).action == b.buffer.at(i).action);
    CHECK(loaded.buffer.at(i).after.locals == b.buffer.at(i).after.locals);
    CHECK(loaded.buffer.at(i).before.global == b.buffer.at(i).before.global);
  }
}

TEST_CASE("corruption is detected") {
  auto b = trained_bundle();
  const auto path = temp("drld_ckpt_corrupt.drld");
  save_checkpoint(b, path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(200);
    char c;
    f.read(&c, 1);
    f.seekp(200);
    c = static_cast<char>(c ^ 0x5a);
    f.write(&c, 1);
  }
  CHECK_THROWS_AS(load_checkpoint(path), ChecksumError);
  CHECK_THROWS_AS(decode_tensors("DRLDxx"), DataError);
  CHECK_THROWS_AS(load_checkpoint(temp("drld_missing_file.drld")), DataError);
}

TEST_CASE("per-layer checkpoint directories") {
  std::vector<AgentBundle> bundles;
  bundles.push_back(trained_bundle());
  bundles.push_back(trained_bundle());
  const auto dir = temp("drld_ckpt_layers");
  save_layer_checkpoints(bundles, dir);
  CHECK(fs::exists(fs::path(dir) / "layer_1.drld"));
  CHECK(fs::exists(fs::path(dir) / "layer_2.drld"));
  CHECK(load_layer_checkpoints(dir, 2).size() == 2);
  CHECK_THROWS_AS(load_layer_checkpoints(dir, 3), DataError);
}
