#include "fuchsim/zircon/cprng.hpp"

#include <memory>

namespace fuchsim::zircon {

Cprng::Cprng(std::array<uint8_t, 32> key, uint64_t reseed_interval,
             EntropySource entropy)
    : key_(key), reseed_interval_(reseed_interval), entropy_(std::move(entropy)) {
  if (!entropy_) entropy_ = make_seeded_entropy(key);
}

std::vector<uint8_t> Cprng::draw(size_t n) {
  std::vector<uint8_t> out = chacha20_keystream(key_, nonce_, n);
  nonce_++;
  draws_since_reseed_++;
  if (draws_since_reseed_ >= reseed_interval_) {
    key_ = entropy_();
    nonce_ = 0;
    draws_since_reseed_ = 0;
  }
  return out;
}

EntropySource make_seeded_entropy(std::array<uint8_t, 32> seed) {
  // Distinct nonce space from any Cprng instance: draws count down from
  // the top of the 64-bit range.
  auto counter = std::make_shared<uint64_t>(~uint64_t{0});
  return [seed, counter]() {
    std::vector<uint8_t> bytes = chacha20_keystream(seed, (*counter)--, 32);
    std::array<uint8_t, 32> out{};
    std::copy(bytes.begin(), bytes.end(), out.begin());
    return out;
  };
}

}  // namespace fuchsim::zircon
