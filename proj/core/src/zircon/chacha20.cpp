#include "fuchsim/zircon/chacha20.hpp"

#include <cstring>

namespace fuchsim::zircon {

namespace {

inline uint32_t rotl(uint32_t x, int n) { return (x << n) | (x >> (32 - n)); }

inline void quarter_round(uint32_t& a, uint32_t& b, uint32_t& c, uint32_t& d) {
  a += b; d ^= a; d = rotl(d, 16);
  c += d; b ^= c; b = rotl(b, 12);
  a += b; d ^= a; d = rotl(d, 8);
  c += d; b ^= c; b = rotl(b, 7);
}

inline uint32_t load_le32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

inline void store_le32(uint8_t* p, uint32_t v) {
  p[0] = static_cast<uint8_t>(v);
  p[1] = static_cast<uint8_t>(v >> 8);
  p[2] = static_cast<uint8_t>(v >> 16);
  p[3] = static_cast<uint8_t>(v >> 24);
}

}  // namespace

void chacha20_block(const std::array<uint8_t, 32>& key, uint32_t counter,
                    const std::array<uint8_t, 12>& nonce,
                    std::array<uint8_t, 64>& out) {
  uint32_t state[16];
  state[0] = 0x61707865;
  state[1] = 0x3320646e;
  state[2] = 0x79622d32;
  state[3] = 0x6b206574;
  for (int i = 0; i < 8; i++) state[4 + i] = load_le32(key.data() + 4 * i);
  state[12] = counter;
  for (int i = 0; i < 3; i++) state[13 + i] = load_le32(nonce.data() + 4 * i);

  uint32_t x[16];
  std::memcpy(x, state, sizeof(x));
  for (int round = 0; round < 10; round++) {
    quarter_round(x[0], x[4], x[8], x[12]);
    quarter_round(x[1], x[5], x[9], x[13]);
    quarter_round(x[2], x[6], x[10], x[14]);
    quarter_round(x[3], x[7], x[11], x[15]);
    quarter_round(x[0], x[5], x[10], x[15]);
    quarter_round(x[1], x[6], x[11], x[12]);
    quarter_round(x[2], x[7], x[8], x[13]);
    quarter_round(x[3], x[4], x[9], x[14]);
  }
  for (int i = 0; i < 16; i++) store_le32(out.data() + 4 * i, x[i] + state[i]);
}

std::vector<uint8_t> chacha20_keystream(const std::array<uint8_t, 32>& key,
                                        uint64_t draw_nonce, size_t n) {
  std::array<uint8_t, 12> nonce{};
  for (int i = 0; i < 8; i++)
    nonce[i] = static_cast<uint8_t>(draw_nonce >> (8 * i));

  std::vector<uint8_t> out;
  out.reserve(n);
  std::array<uint8_t, 64> block;
  uint32_t counter = 0;
  while (out.size() < n) {
    chacha20_block(key, counter++, nonce, block);
    size_t take = std::min<size_t>(64, n - out.size());
    out.insert(out.end(), block.begin(), block.begin() + take);
  }
  return out;
}

}  // namespace fuchsim::zircon
