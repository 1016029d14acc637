#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "fuchsim/zircon/chacha20.hpp"

namespace fuchsim::zircon {

using EntropySource = std::function<std::array<uint8_t, 32>()>;

/// Draw-based CSPRNG. Each draw takes keystream bytes at (key, nonce)
/// and increments the nonce by exactly one, zero-length draws included.
/// The periodic reseed is modeled as a draw-count epoch: once the draw
/// counter reaches the interval, the key is replaced from the entropy
/// source and both counters restart.
class Cprng {
 public:
  static constexpr uint64_t kDefaultReseedInterval = 1024;

  explicit Cprng(std::array<uint8_t, 32> key,
                 uint64_t reseed_interval = kDefaultReseedInterval,
                 EntropySource entropy = nullptr);

  std::vector<uint8_t> draw(size_t n);

  const std::array<uint8_t, 32>& key() const { return key_; }
  uint64_t nonce() const { return nonce_; }
  uint64_t draws_since_reseed() const { return draws_since_reseed_; }

 private:
  std::array<uint8_t, 32> key_;
  uint64_t nonce_ = 0;
  uint64_t draws_since_reseed_ = 0;
  uint64_t reseed_interval_;
  EntropySource entropy_;
};

/// Deterministic entropy device for the simulator: a ChaCha20 stream
/// over a fixed seed, 32 bytes per request.
EntropySource make_seeded_entropy(std::array<uint8_t, 32> seed);

}  // namespace fuchsim::zircon
