#include "npimcmc/rng.hpp"

#include <cmath>
#include <numbers>

#include "npimcmc/errors.hpp"

namespace npimcmc {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kRealLane = 0x5851f42d4c957f2dULL;
constexpr std::uint64_t kBitLane = 0x14057b7ef767814fULL;

double to_open_unit(std::uint64_t z) {
  return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::string_view purpose_name(Purpose p) {
  switch (p) {
    case Purpose::aux: return "aux";
    case Purpose::extend_x: return "extend_x";
    case Purpose::extend_v: return "extend_v";
    case Purpose::pairing: return "pairing";
    case Purpose::uniform: return "uniform";
    case Purpose::mix: return "mix";
    case Purpose::direction: return "direction";
    case Purpose::init: return "init";
  }
  return "unknown";
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_id(std::uint64_t seed, std::uint64_t chain, Purpose p,
                        std::uint64_t step) {
  std::uint64_t h = mix64(seed + kGamma);
  h = mix64(h ^ (chain + kGamma));
  h = mix64(h ^ (static_cast<std::uint64_t>(p) + 2 * kGamma));
  return mix64(h ^ (step + 3 * kGamma));
}

std::uint64_t CounterStream::next(std::uint64_t lane, std::uint64_t& ctr) {
  return mix64(mix64(key_ ^ lane) + (ctr++) * kGamma);
}

double CounterStream::uniform() { return to_open_unit(next(kRealLane, real_ctr_)); }

double CounterStream::normal() {
  // Box-Muller, cosine branch only so every normal costs two uniforms.
  double u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool CounterStream::coin() { return (next(kBitLane, bit_ctr_) >> 63) != 0; }

double ScriptedStream::uniform() {
  if (!uniforms.empty()) {
    double u = uniforms.front();
    uniforms.pop_front();
    return u;
  }
  if (fallback) return fallback->uniform();
  throw PreconditionViolation("scripted stream: no uniforms left");
}

double ScriptedStream::normal() {
  if (!normals.empty()) {
    double r = normals.front();
    normals.pop_front();
    return r;
  }
  if (fallback) return fallback->normal();
  throw PreconditionViolation("scripted stream: no normals left");
}

bool ScriptedStream::coin() {
  if (!coins.empty()) {
    bool c = coins.front();
    coins.pop_front();
    return c;
  }
  if (fallback) return fallback->coin();
  throw PreconditionViolation("scripted stream: no coins left");
}

StepStreams::StepStreams(std::uint64_t seed, std::uint64_t chain, std::uint64_t step)
    : seed_(seed), chain_(chain), step_(step) {}

Stream& StepStreams::get(Purpose p) {
  auto& slot = streams_[static_cast<std::size_t>(p)];
  if (!slot) slot = std::make_unique<CounterStream>(stream_id(seed_, chain_, p, step_));
  return *slot;
}

void StepStreams::override_stream(Purpose p, std::unique_ptr<Stream> s) {
  streams_[static_cast<std::size_t>(p)] = std::move(s);
}

}  // namespace npimcmc
