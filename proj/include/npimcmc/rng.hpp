#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <string_view>

namespace npimcmc {

// Stream purposes. The numeric tags are part of the reproducibility contract.
enum class Purpose : std::uint64_t {
  aux = 1,
  extend_x = 2,
  extend_v = 3,
  pairing = 4,
  uniform = 5,
  mix = 6,
  direction = 7,
  init = 8,
};
inline constexpr std::size_t kPurposeCount = 9;

std::string_view purpose_name(Purpose p);

std::uint64_t mix64(std::uint64_t z);
// hash(seed, chain, purpose, step)
std::uint64_t stream_id(std::uint64_t seed, std::uint64_t chain, Purpose p,
                        std::uint64_t step);

class Stream {
 public:
  virtual ~Stream() = default;
  // Uniform on the open interval (0, 1).
  virtual double uniform() = 0;
  virtual double normal() = 0;
  virtual bool coin() = 0;
};

// Counter-based generator: the n-th output of a lane is mix64 of (key, lane, n),
// so streams are addressable without any shared state. Reals and coins use
// separate lanes, which keeps real draws aligned whether or not coins are
// drawn in between.
class CounterStream final : public Stream {
 public:
  explicit CounterStream(std::uint64_t key) : key_(key) {}
  double uniform() override;
  double normal() override;
  bool coin() override;

 private:
  std::uint64_t next(std::uint64_t lane, std::uint64_t& ctr);
  std::uint64_t key_;
  std::uint64_t real_ctr_ = 0;
  std::uint64_t bit_ctr_ = 0;
};

// Replays fixed values; used to stub draws in tests. Falls back to `fallback`
// (if any) once a queue runs dry.
class ScriptedStream final : public Stream {
 public:
  ScriptedStream() = default;
  explicit ScriptedStream(std::deque<double> n) : normals(std::move(n)) {}
  double uniform() override;
  double normal() override;
  bool coin() override;

  std::deque<double> normals;
  std::deque<double> uniforms;
  std::deque<bool> coins;
  std::unique_ptr<Stream> fallback;
};

// The streams used by one step of one chain.
class StepStreams {
 public:
  StepStreams(std::uint64_t seed, std::uint64_t chain, std::uint64_t step);
  Stream& get(Purpose p);
  void override_stream(Purpose p, std::unique_ptr<Stream> s);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t chain() const { return chain_; }
  std::uint64_t step() const { return step_; }

 private:
  std::uint64_t seed_, chain_, step_;
  std::array<std::unique_ptr<Stream>, kPurposeCount> streams_;
};

}  // namespace npimcmc
